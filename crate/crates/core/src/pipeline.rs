//! Seeded dataset generation for all three synthesis methods.
//!
//! Page `i` draws from its own random stream of the master seed, so a run
//! of `n` pages is a prefix of any longer run with the same settings.
//! Instance switching produces pages in pairs; page `i` belongs to pair
//! `i / 2` and takes its stream.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{instance_switch, naive_cut_paste};
use crate::compositor::{render, DatasetInfo, DatasetManifest, DatasetWriter, SynthPage};
use crate::corpus::{annotation_json, ComponentBank, Corpus};
use crate::error::{Error, Result};
use crate::layout::{plan_page, LayoutConfig};
use crate::seed::item_rng;

pub const DEFAULT_PAGE_WIDTH: u32 = 1166;
pub const DEFAULT_PAGE_HEIGHT: u32 = 1654;

/// Pages rendered per parallel batch before being written out.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Context,
    Naive,
    Switch,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Context, Method::Naive, Method::Switch];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Context => "context",
            Method::Naive => "naive",
            Method::Switch => "switch",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method {s:?} (expected context, naive or switch)"))
    }
}

/// Everything that determines the pages a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSettings {
    pub count: usize,
    pub layout: LayoutConfig,
    pub method: Method,
    pub page_height: u32,
    pub page_width: u32,
    pub seed: u64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings {
            count: 0,
            layout: LayoutConfig::default(),
            method: Method::Context,
            page_height: DEFAULT_PAGE_HEIGHT,
            page_width: DEFAULT_PAGE_WIDTH,
            seed: 0,
        }
    }
}

impl SynthSettings {
    pub fn check(&self) -> Result<()> {
        if self.page_width == 0 || self.page_height == 0 {
            return Err(Error::Config(format!("page size {}x{} is empty", self.page_width, self.page_height)));
        }
        self.layout.check()
    }
}

/// Inputs a method draws from: a component bank for cut-paste methods, a
/// corpus for instance switching.
pub enum Source<'a> {
    Bank(&'a ComponentBank),
    Corpus(&'a Corpus),
}

impl Source<'_> {
    /// Content identifier recorded in the dataset manifest.
    pub fn fingerprint(&self) -> String {
        match self {
            Source::Bank(b) => b.version().to_owned(),
            Source::Corpus(c) => hex::encode(Sha256::digest(annotation_json(c).as_bytes()))[..16].to_owned(),
        }
    }
}

pub fn page_id(index: usize) -> String {
    format!("synth_{index:06}")
}

/// Generates page `index` of a run.
pub fn generate_page(settings: &SynthSettings, source: &Source, index: usize) -> Result<SynthPage> {
    let (w, h) = (settings.page_width, settings.page_height);
    let mut page = match (settings.method, source) {
        (Method::Context, Source::Bank(bank)) => {
            let mut rng = item_rng(settings.seed, index as u64);
            let plan = plan_page(&mut rng, w as i64, h as i64, bank, &settings.layout)?;
            render(&plan, bank)?
        }
        (Method::Naive, Source::Bank(bank)) => {
            let mut rng = item_rng(settings.seed, index as u64);
            let mut page = naive_cut_paste(&mut rng, bank, w, h)?;
            page.provenance.bank_version = Some(bank.version().to_owned());
            page
        }
        (Method::Switch, Source::Corpus(corpus)) => {
            let mut rng = item_rng(settings.seed, (index / 2) as u64);
            let (a, b) = instance_switch(&mut rng, corpus)?;
            let (mut page, other) = if index.is_multiple_of(2) { (a, b) } else { (b, a) };
            page.provenance.sources = vec![page.id.clone(), other.id];
            page
        }
        (m, _) => {
            let need = if m == Method::Switch { "a corpus" } else { "a component bank" };
            return Err(Error::Config(format!("method {m} needs {need}")));
        }
    };
    page.id = page_id(index);
    page.provenance.seed = settings.seed;
    page.provenance.index = index as u64;
    Ok(page)
}

/// Generates pages `0..settings.count`, rendering in parallel batches
/// while keeping output order fixed.
pub fn generate_pages(settings: &SynthSettings, source: &Source) -> Result<Vec<SynthPage>> {
    settings.check()?;
    (0..settings.count).into_par_iter().map(|i| generate_page(settings, source, i)).collect()
}

/// Generates a run and writes it as a dataset directory.
pub fn synthesize(settings: &SynthSettings, source: &Source, out: &Path) -> Result<DatasetManifest> {
    settings.check()?;
    let mut writer = DatasetWriter::create(out)?;
    let mut start = 0;
    while start < settings.count {
        let end = (start + BATCH).min(settings.count);
        let batch: Vec<SynthPage> =
            (start..end).into_par_iter().map(|i| generate_page(settings, source, i)).collect::<Result<_>>()?;
        writer.write_batch(&batch)?;
        start = end;
    }
    let mut value = serde_json::to_value(settings).expect("settings serialize");
    value["input"] = serde_json::Value::String(source.fingerprint());
    writer.finish(&DatasetInfo { method: settings.method.to_string(), seed: settings.seed, settings: value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_components, DEFAULT_INK_THRESHOLD};
    use crate::fixture::fixture_corpus;

    fn small(method: Method, count: usize) -> SynthSettings {
        SynthSettings { count, method, page_width: 600, page_height: 850, seed: 5, ..Default::default() }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("collage".parse::<Method>().is_err());
    }

    #[test]
    fn runs_are_prefix_stable() {
        let (corpus, manifest) = fixture_corpus();
        let bank = extract_components(&corpus, &manifest, DEFAULT_INK_THRESHOLD).unwrap();
        for (m, src) in [
            (Method::Context, Source::Bank(&bank)),
            (Method::Naive, Source::Bank(&bank)),
            (Method::Switch, Source::Corpus(&corpus)),
        ] {
            let short = generate_pages(&small(m, 3), &src).unwrap();
            let long = generate_pages(&small(m, 6), &src).unwrap();
            assert_eq!(short[..], long[..3], "{m}");
            assert_eq!(long[4].id, "synth_000004");
        }
    }

    #[test]
    fn method_source_mismatch_is_an_error() {
        let (corpus, _) = fixture_corpus();
        assert!(generate_page(&small(Method::Context, 1), &Source::Corpus(&corpus), 0).is_err());
    }
}
