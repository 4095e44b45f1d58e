//! Command-line front end.
//!
//! Exit codes: 0 success, 1 corpus validation failed, 2 usage or
//! configuration error, 3 missing or invalid input, 4 write failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    extract_components, load_corpus, stats, validate_corpus, ComponentBank, ComponentManifest, Corpus,
    DEFAULT_INK_THRESHOLD,
};
use crate::error::Error;
use crate::layout::LayoutConfig;
use crate::metrics::{evaluate, load_ground_truth, load_predictions, EvalOptions, MiouMode, MAX_DETECTIONS};
use crate::pipeline::{synthesize, Method, Source, SynthSettings, DEFAULT_PAGE_HEIGHT, DEFAULT_PAGE_WIDTH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_WRITE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "instruct-synth", about = "Synthesize and score annotated assembly-instruction pages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus directory and report every problem found.
    Validate { corpus: PathBuf },
    /// Print per-category instance and image counts.
    Stats { corpus: PathBuf },
    /// Cut component patches listed in a manifest into a bank directory.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        /// Component manifest (JSON list of page_id, category, rect).
        #[arg(long)]
        components: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pixels darker than this count as ink for box components.
        #[arg(long, default_value_t = DEFAULT_INK_THRESHOLD)]
        ink_threshold: u8,
    },
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Score predictions against ground truth.
    Eval {
        /// Corpus directory or annotation file.
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        preds: PathBuf,
        /// Also write the full report as JSON (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Report per-category pixel mIoU instead of instance mIoU.
        #[arg(long)]
        pixel_miou: bool,
        #[arg(long, default_value_t = MAX_DETECTIONS)]
        max_detections: usize,
    },
}

#[derive(Debug, Args, Default)]
pub struct SynthArgs {
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extracted component bank (context and naive methods).
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Annotated corpus (switch method, or with --components instead of --bank).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub components: Option<PathBuf>,
    #[arg(long)]
    pub ink_threshold: Option<u8>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long)]
    pub margin_frac: Option<f64>,
    #[arg(long)]
    pub scale_cap: Option<f64>,
    #[arg(long)]
    pub placement_attempts: Option<usize>,
    #[arg(long)]
    pub mandatory_retries: Option<usize>,
    #[arg(long)]
    pub downscale_step: Option<f64>,
}

/// Run configuration file contents. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bank: Option<PathBuf>,
    pub components: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub count: Option<usize>,
    pub ink_threshold: Option<u8>,
    pub layout: Option<LayoutConfig>,
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
    pub page_height: Option<u32>,
    pub page_width: Option<u32>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    /// Applies explicit flags on top of the file values.
    pub fn merge(mut self, a: &SynthArgs) -> Self {
        fn over<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        over(&mut self.bank, &a.bank);
        over(&mut self.components, &a.components);
        over(&mut self.corpus, &a.corpus);
        over(&mut self.count, &a.count);
        over(&mut self.ink_threshold, &a.ink_threshold);
        over(&mut self.method, &a.method);
        over(&mut self.out, &a.out);
        over(&mut self.page_height, &a.height);
        over(&mut self.page_width, &a.width);
        over(&mut self.seed, &a.seed);
        let mut layout = self.layout.take().unwrap_or_default();
        if let Some(v) = a.margin_frac {
            layout.margin_frac = v;
        }
        if let Some(v) = a.scale_cap {
            layout.scale_cap = v;
        }
        if let Some(v) = a.placement_attempts {
            layout.placement_attempts = v;
        }
        if let Some(v) = a.mandatory_retries {
            layout.mandatory_retries = v;
        }
        if let Some(v) = a.downscale_step {
            layout.downscale_step = v;
        }
        self.layout = Some(layout);
        self
    }

    pub fn settings(&self) -> SynthSettings {
        SynthSettings {
            count: self.count.unwrap_or(0),
            layout: self.layout.clone().unwrap_or_default(),
            method: self.method.unwrap_or_default(),
            page_height: self.page_height.unwrap_or(DEFAULT_PAGE_HEIGHT),
            page_width: self.page_width.unwrap_or(DEFAULT_PAGE_WIDTH),
            seed: self.seed.unwrap_or(0),
        }
    }
}

/// A failure paired with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn input(e: Error) -> Self {
        let code = if matches!(e, Error::Config(_)) { EXIT_USAGE } else { EXIT_INPUT };
        Failure { code, message: e.to_string() }
    }

    fn write(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::PngEncode(_) => EXIT_WRITE,
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    static VERSION: OnceLock<String> = OnceLock::new();
    let command = Cli::command().version(VERSION.get_or_init(crate::generator_version).as_str());
    let parsed = command.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return e.exit_code();
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate { corpus } => cmd_validate(&corpus, out, err),
        Command::Stats { corpus } => {
            let corpus = load_corpus(&corpus).map_err(Failure::input)?;
            emit(out, &stats(&corpus).to_table())
        }
        Command::Extract { corpus, components, out: dir, ink_threshold } => {
            let corpus = load_corpus(&corpus).map_err(Failure::input)?;
            let manifest = ComponentManifest::load(&components).map_err(Failure::input)?;
            let bank = extract_components(&corpus, &manifest, ink_threshold).map_err(Failure::input)?;
            bank.save(&dir).map_err(Failure::write)?;
            emit(out, &format!("extracted {} components (bank {})\n", bank.len(), bank.version()))
        }
        Command::Synth(args) => cmd_synth(&args, out),
        Command::Eval { gt, preds, json, pixel_miou, max_detections } => {
            let gts = load_ground_truth(&gt).map_err(Failure::input)?;
            let preds = load_predictions(&preds).map_err(Failure::input)?;
            let miou = if pixel_miou { MiouMode::Pixel } else { MiouMode::Instance };
            let report = evaluate(&preds, &gts, &EvalOptions { max_detections, miou }).map_err(Failure::input)?;
            match json.as_deref() {
                Some(p) if p == Path::new("-") => {
                    emit(err, &report.to_table())?;
                    emit(out, &report.to_json())
                }
                Some(p) => {
                    fs::write(p, report.to_json()).map_err(|e| Failure::write(Error::io(p, e)))?;
                    emit(out, &report.to_table())
                }
                None => emit(out, &report.to_table()),
            }
        }
    }
}

fn emit(sink: &mut dyn Write, text: &str) -> Outcome {
    sink.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_WRITE, message: e.to_string() })?;
    Ok(EXIT_OK)
}

fn cmd_validate(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if !dir.is_dir() {
        return Err(Failure { code: EXIT_INPUT, message: format!("{}: not a directory", dir.display()) });
    }
    let problems = validate_corpus(dir);
    if problems.is_empty() {
        let corpus = load_corpus(dir).map_err(Failure::input)?;
        return emit(out, &format!("ok: {} pages, {} instances\n", corpus.pages.len(), corpus.instance_count()));
    }
    for p in &problems {
        let _ = writeln!(err, "{p}");
    }
    let _ = writeln!(err, "{} problem(s) found", problems.len());
    Ok(EXIT_INVALID)
}

fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Outcome {
    let base = match &args.config {
        Some(p) => RunConfig::load(p).map_err(Failure::input)?,
        None => RunConfig::default(),
    };
    let cfg = base.merge(args);
    let settings = cfg.settings();
    settings.check().map_err(Failure::input)?;
    let dir = cfg.out.clone().ok_or_else(|| Failure::usage("synth needs --out"))?;

    let corpus: Option<Corpus> = match &cfg.corpus {
        Some(p) => Some(load_corpus(p).map_err(Failure::input)?),
        None => None,
    };
    let bank: Option<ComponentBank> = match (settings.method, &cfg.bank, &corpus, &cfg.components) {
        (Method::Switch, _, _, _) => None,
        (_, Some(p), _, _) => Some(ComponentBank::load(p).map_err(Failure::input)?),
        (_, None, Some(c), Some(m)) => {
            let manifest = ComponentManifest::load(m).map_err(Failure::input)?;
            let threshold = cfg.ink_threshold.unwrap_or(DEFAULT_INK_THRESHOLD);
            Some(extract_components(c, &manifest, threshold).map_err(Failure::input)?)
        }
        _ => {
            return Err(Failure::usage(format!(
                "method {} needs --bank or --corpus with --components",
                settings.method
            )))
        }
    };
    let source = match (&bank, &corpus) {
        (Some(b), _) => Source::Bank(b),
        (None, Some(c)) => Source::Corpus(c),
        (None, None) => return Err(Failure::usage("method switch needs --corpus")),
    };
    let manifest = synthesize(&settings, &source, &dir).map_err(Failure::write)?;
    emit(out, &format!("wrote {} {} pages to {}\n", manifest.page_count, settings.method, dir.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let file = RunConfig {
            count: Some(10),
            seed: Some(1),
            layout: Some(LayoutConfig { scale_cap: 0.3, ..Default::default() }),
            ..Default::default()
        };
        let args = SynthArgs { seed: Some(7), margin_frac: Some(0.05), ..Default::default() };
        let s = file.merge(&args).settings();
        assert_eq!((s.count, s.seed), (10, 7));
        assert_eq!((s.layout.scale_cap, s.layout.margin_frac), (0.3, 0.05));
        assert_eq!((s.page_width, s.page_height, s.method), (1166, 1654, Method::Context));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 3}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"method": "naive", "layout": {"scale_cap": 0.4}}"#).unwrap();
        assert_eq!(c.method, Some(Method::Naive));
        assert_eq!(c.layout.unwrap().placement_attempts, 20);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["instruct-synth", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["instruct-synth", "synth", "--method", "collage"], &mut o, &mut e), EXIT_USAGE);
    }

    #[test]
    fn version_prints_generator_hash() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["instruct-synth", "--version"], &mut o, &mut e), EXIT_OK);
        assert!(String::from_utf8(o).unwrap().contains(&crate::generator_version()));
    }
}
