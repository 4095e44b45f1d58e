//! Renders layout plans into annotated page images and writes datasets in
//! the corpus format.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    to_canonical_json, AnnotationFile, ComponentBank, ComponentKind, ComponentPatch, Geometry, Instance, PageRecord,
    ANNOTATION_FILE,
};
use crate::error::{Error, Result};
use crate::geometry::{snap_polygon, Affine, Polygon, Rect};
use crate::layout::LayoutPlan;
use crate::raster::{rasterize_polygon, resize_mask_nearest, GrayImage, Mask};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub bank_version: Option<String>,
    pub index: u64,
    pub plan_hash: Option<String>,
    pub seed: u64,
    /// Corpus pages an edited page was derived from.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<String>,
}

/// A synthesized page: image, exact annotations, and for each annotation
/// the pixel mask that was actually pasted (not written to disk).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPage {
    pub id: String,
    pub image: GrayImage,
    pub annotations: Vec<Instance>,
    pub masks: Vec<Mask>,
    pub provenance: Provenance,
}

impl SynthPage {
    pub fn blank(width: u32, height: u32) -> Self {
        SynthPage {
            id: String::new(),
            image: GrayImage::new(width, height, 255),
            annotations: Vec::new(),
            masks: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.png", self.id)
    }
}

/// A patch resampled to its target rectangle. Outline patches also carry
/// their placed outline, and their mask is that outline rasterized, so the
/// annotation covers exactly the composited pixels.
pub(crate) struct Pasted {
    /// Where `image` lands on the page.
    pub target: Rect,
    pub image: GrayImage,
    pub mask: Mask,
    pub outline: Option<Polygon>,
}

pub(crate) fn resample_patch(patch: &ComponentPatch, target: &Rect) -> Pasted {
    let image = patch.image.resize_bilinear(target.w as u32, target.h as u32);
    match &patch.polygon {
        Some(local) => {
            let native = Rect::new(0, 0, patch.native_w(), patch.native_h());
            let outline = place_polygon(local, &native, target);
            Pasted { target: *target, image, mask: rasterize_polygon(&outline, target), outline: Some(outline) }
        }
        None => Pasted {
            target: *target,
            image,
            mask: resize_mask_nearest(&patch.mask, target.x, target.y, target.w, target.h),
            outline: None,
        },
    }
}

/// `out = min(canvas, patch)` on the pasted mask.
pub(crate) fn min_blend(canvas: &mut GrayImage, pasted: &Pasted) {
    let t = pasted.target;
    for (x, y) in pasted.mask.iter_set() {
        let src = pasted.image.get((x - t.x) as u32, (y - t.y) as u32);
        let (cx, cy) = (x as u32, y as u32);
        let dst = canvas.get(cx, cy);
        canvas.set(cx, cy, dst.min(src));
    }
}

/// Maps a patch-local outline onto `target`. Same-size targets translate
/// exactly; scaled targets are snapped back onto the pixel lattice.
pub(crate) fn place_polygon(local: &Polygon, native: &Rect, target: &Rect) -> Polygon {
    if native.w == target.w && native.h == target.h {
        return local.translate(target.x, target.y);
    }
    let pts = Affine::fit(native, target).apply_polygon(local);
    snap_polygon(&pts, target).unwrap_or_else(|| {
        Polygon::from_rect(&Rect::new(target.x, target.y, (target.w - 1).max(1), (target.h - 1).max(1)))
    })
}

/// Composites every placement of `plan` onto a white page.
pub fn render(plan: &LayoutPlan, bank: &ComponentBank) -> Result<SynthPage> {
    let mut page = SynthPage::blank(plan.page_w as u32, plan.page_h as u32);
    for (i, p) in plan.placements.iter().enumerate() {
        let patch = bank.get(p.component_id).ok_or(Error::DanglingComponent(p.component_id))?;
        let pasted = resample_patch(patch, &p.target);
        min_blend(&mut page.image, &pasted);
        let geometry = match (patch.kind, &pasted.outline) {
            (ComponentKind::SpeechBubble, Some(outline)) => Geometry::Polygon(outline.clone()),
            _ => Geometry::Box(p.target),
        };
        page.annotations.push(Instance { id: i as u32 + 1, category: p.category.category(), geometry });
        page.masks.push(pasted.mask);
    }
    page.provenance.plan_hash = Some(plan.hash());
    page.provenance.bank_version = Some(bank.version().to_owned());
    Ok(page)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestPage {
    pub file: String,
    pub id: String,
    pub provenance: Provenance,
    pub sha256: String,
}

/// Dataset-level record written next to the annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub generator: String,
    pub generator_version: String,
    pub method: String,
    pub page_count: usize,
    pub pages: Vec<ManifestPage>,
    pub seed: u64,
    pub settings: serde_json::Value,
}

/// Identifying fields shared by every page of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub method: String,
    pub seed: u64,
    pub settings: serde_json::Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Incremental dataset writer: pages are encoded in parallel batches and
/// the annotation and manifest files are written once at the end.
pub struct DatasetWriter {
    dir: std::path::PathBuf,
    records: Vec<PageRecord>,
    pages: Vec<ManifestPage>,
}

impl DatasetWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(DatasetWriter { dir: dir.to_path_buf(), records: Vec::new(), pages: Vec::new() })
    }

    pub fn write_batch(&mut self, batch: &[SynthPage]) -> Result<()> {
        let encoded: Vec<Vec<u8>> = batch.par_iter().map(|p| p.image.encode_png()).collect::<Result<_>>()?;
        for (page, bytes) in batch.iter().zip(encoded) {
            let file = page.file_name();
            let path = self.dir.join(&file);
            fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            self.records.push(PageRecord {
                file: file.clone(),
                height: page.image.height(),
                id: page.id.clone(),
                instances: page.annotations.iter().map(crate::corpus::InstanceRecord::from_instance).collect(),
                width: page.image.width(),
            });
            self.pages.push(ManifestPage {
                file,
                id: page.id.clone(),
                provenance: page.provenance.clone(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        Ok(())
    }

    pub fn finish(self, info: &DatasetInfo) -> Result<DatasetManifest> {
        let ann = AnnotationFile { pages: self.records };
        let path = self.dir.join(ANNOTATION_FILE);
        fs::write(&path, to_canonical_json(&ann)).map_err(|e| Error::io(&path, e))?;
        let manifest = DatasetManifest {
            generator: crate::GENERATOR.to_owned(),
            generator_version: crate::generator_version(),
            method: info.method.clone(),
            page_count: self.pages.len(),
            pages: self.pages,
            seed: info.seed,
            settings: info.settings.clone(),
        };
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, to_canonical_json(&manifest)).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// Writes `pages` as a dataset directory readable by `load_corpus`.
pub fn write_dataset(pages: &[SynthPage], out: &Path, info: &DatasetInfo) -> Result<DatasetManifest> {
    let mut w = DatasetWriter::create(out)?;
    w.write_batch(pages)?;
    w.finish(info)
}
