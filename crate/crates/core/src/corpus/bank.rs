//! Component bank: labeled patches cut from corpus pages according to an
//! explicit crop manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{to_canonical_json, Category, Corpus, Geometry};
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::raster::{rasterize_polygon, GrayImage, Mask};

/// Pixels darker than this are ink.
pub const DEFAULT_INK_THRESHOLD: u8 = 250;

const BANK_FILE: &str = "bank.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    StageNumber,
    SpeechBubble,
    AssemblyGroup,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 3] =
        [ComponentKind::StageNumber, ComponentKind::SpeechBubble, ComponentKind::AssemblyGroup];

    pub fn category(self) -> Category {
        match self {
            ComponentKind::StageNumber => Category::StageNumber,
            ComponentKind::SpeechBubble => Category::SpeechBubble,
            ComponentKind::AssemblyGroup => Category::AssemblyGroup,
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.category().as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub category: ComponentKind,
    pub page_id: String,
    pub rect: Rect,
}

/// Ordered list of crops to cut into the bank.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentManifest(pub Vec<ManifestEntry>);

impl ComponentManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSource {
    pub page_id: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPatch {
    pub id: u32,
    pub kind: ComponentKind,
    pub image: GrayImage,
    /// Foreground mask with window `(0, 0, native_w, native_h)`.
    pub mask: Mask,
    /// Speech-bubble outline in patch-local coordinates.
    pub polygon: Option<Polygon>,
    pub source: PatchSource,
}

impl ComponentPatch {
    pub fn native_w(&self) -> i64 {
        self.image.width() as i64
    }

    pub fn native_h(&self) -> i64 {
        self.image.height() as i64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PatchRecord {
    category: ComponentKind,
    id: u32,
    image: String,
    mask: String,
    native_h: u32,
    native_w: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygon: Option<Polygon>,
    source: PatchSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BankFile {
    patches: Vec<PatchRecord>,
    version: String,
}

/// Immutable collection of component patches, indexed by kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentBank {
    patches: Vec<ComponentPatch>,
    by_kind: BTreeMap<ComponentKind, Vec<usize>>,
    version: String,
}

impl ComponentBank {
    pub fn new(patches: Vec<ComponentPatch>) -> Self {
        let mut by_kind: BTreeMap<ComponentKind, Vec<usize>> = BTreeMap::new();
        for (i, p) in patches.iter().enumerate() {
            by_kind.entry(p.kind).or_default().push(i);
        }
        let version = content_hash(&patches);
        ComponentBank { patches, by_kind, version }
    }

    pub fn patches(&self) -> &[ComponentPatch] {
        &self.patches
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&ComponentPatch> {
        self.patches.iter().find(|p| p.id == id)
    }

    /// Patches of one kind, in bank order.
    pub fn of_kind(&self, kind: ComponentKind) -> impl Iterator<Item = &ComponentPatch> + '_ {
        self.by_kind.get(&kind).into_iter().flatten().map(move |&i| &self.patches[i])
    }

    pub fn count(&self, kind: ComponentKind) -> usize {
        self.by_kind.get(&kind).map_or(0, Vec::len)
    }

    pub fn require_all_kinds(&self) -> Result<()> {
        match ComponentKind::ALL.into_iter().find(|&k| self.count(k) == 0) {
            Some(k) => Err(Error::MissingComponent(k)),
            None => Ok(()),
        }
    }

    /// The `i`-th patch of `kind`; panics when out of range.
    pub fn nth_of_kind(&self, kind: ComponentKind, i: usize) -> &ComponentPatch {
        &self.patches[self.by_kind[&kind][i]]
    }

    /// Content hash of the bank's patches, hex.
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut records = Vec::with_capacity(self.patches.len());
        for p in &self.patches {
            let image = format!("patch_{:05}.png", p.id);
            let mask = format!("mask_{:05}.png", p.id);
            p.image.write_png(&dir.join(&image))?;
            mask_to_image(&p.mask).write_png(&dir.join(&mask))?;
            records.push(PatchRecord {
                category: p.kind,
                id: p.id,
                image,
                mask,
                native_h: p.image.height(),
                native_w: p.image.width(),
                polygon: p.polygon.clone(),
                source: p.source.clone(),
            });
        }
        let file = BankFile { patches: records, version: self.version.clone() };
        let path = dir.join(BANK_FILE);
        fs::write(&path, to_canonical_json(&file)).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(BANK_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let file: BankFile = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        let mut patches = Vec::with_capacity(file.patches.len());
        for r in file.patches {
            let image = GrayImage::read_png(&dir.join(&r.image))?;
            let mask_img = GrayImage::read_png(&dir.join(&r.mask))?;
            if (image.width(), image.height()) != (r.native_w, r.native_h)
                || (mask_img.width(), mask_img.height()) != (r.native_w, r.native_h)
            {
                return Err(Error::json(&path, format!("patch {} has inconsistent dimensions", r.id)));
            }
            let mask = Mask::from_bits(
                Rect::new(0, 0, r.native_w as i64, r.native_h as i64),
                mask_img.data().iter().map(|&v| v >= 128).collect(),
            );
            patches.push(ComponentPatch {
                id: r.id,
                kind: r.category,
                image,
                mask,
                polygon: r.polygon,
                source: r.source,
            });
        }
        let bank = ComponentBank::new(patches);
        if bank.version != file.version {
            return Err(Error::json(
                &path,
                format!("bank content hash {} does not match recorded version {}", bank.version, file.version),
            ));
        }
        Ok(bank)
    }
}

fn mask_to_image(mask: &Mask) -> GrayImage {
    let w = mask.window();
    GrayImage::from_raw(w.w as u32, w.h as u32, mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect())
        .expect("mask window matches bit count")
}

fn content_hash(patches: &[ComponentPatch]) -> String {
    let mut h = Sha256::new();
    for p in patches {
        h.update(p.id.to_le_bytes());
        h.update(serde_json::to_vec(&p.kind).expect("kind serializes"));
        h.update(serde_json::to_vec(&p.source).expect("source serializes"));
        h.update(serde_json::to_vec(&p.polygon).expect("polygon serializes"));
        h.update(p.image.width().to_le_bytes());
        h.update(p.image.height().to_le_bytes());
        h.update(p.image.data());
        h.update(p.mask.bits().iter().map(|&b| b as u8).collect::<Vec<_>>());
    }
    hex::encode(h.finalize())[..16].to_owned()
}

/// Cuts one patch per manifest entry.
///
/// Speech-bubble masks come from the largest annotated bubble polygon lying
/// entirely inside the crop; other kinds use an ink threshold
/// (`pixel < ink_threshold`).
pub fn extract_components(corpus: &Corpus, manifest: &ComponentManifest, ink_threshold: u8) -> Result<ComponentBank> {
    let mut patches = Vec::with_capacity(manifest.0.len());
    for (index, entry) in manifest.0.iter().enumerate() {
        let fail = |reason: String| Error::InvalidManifestEntry { index, page_id: entry.page_id.clone(), reason };
        let page = corpus.page(&entry.page_id).ok_or_else(|| fail("no such page in corpus".into()))?;
        let rect = entry.rect;
        if !rect.within_page(page.width() as i64, page.height() as i64) {
            return Err(fail(format!(
                "crop rect {:?} exceeds {}x{} page",
                <[i64; 4]>::from(rect),
                page.width(),
                page.height()
            )));
        }
        let image = page.image.crop(&rect);
        let local = Rect::new(0, 0, rect.w, rect.h);
        let (mask, polygon) = match entry.category {
            ComponentKind::SpeechBubble => {
                let poly = page
                    .instances
                    .iter()
                    .filter(|i| i.category == Category::SpeechBubble)
                    .filter_map(|i| match &i.geometry {
                        Geometry::Polygon(p) if p.within_rect(&rect) => Some(p),
                        _ => None,
                    })
                    .fold(None::<&Polygon>, |best, p| match best {
                        Some(b) if b.doubled_area().abs() >= p.doubled_area().abs() => Some(b),
                        _ => Some(p),
                    })
                    .ok_or_else(|| fail("crop contains no speech_bubble polygon".into()))?;
                let local_poly = poly.translate(-rect.x, -rect.y);
                (rasterize_polygon(&local_poly, &local), Some(local_poly))
            }
            ComponentKind::StageNumber | ComponentKind::AssemblyGroup => {
                let bits = image.data().iter().map(|&v| v < ink_threshold).collect();
                (Mask::from_bits(local, bits), None)
            }
        };
        if mask.count() == 0 {
            return Err(fail("empty mask".into()));
        }
        // rasterized polygons may cover a smaller window; normalize to the full patch
        let mask = if mask.window() == local {
            mask
        } else {
            let mut full = Mask::empty(local);
            for (x, y) in mask.iter_set() {
                full.set(x, y, true);
            }
            full
        };
        patches.push(ComponentPatch {
            id: index as u32,
            kind: entry.category,
            image,
            mask,
            polygon,
            source: PatchSource { page_id: entry.page_id.clone(), rect },
        });
    }
    Ok(ComponentBank::new(patches))
}
