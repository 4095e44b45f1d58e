//! Annotated instruction corpora: loading, validation, statistics, and the
//! component bank cut from them.
//!
//! A corpus directory holds one `annotations.json` plus the page images it
//! references (8-bit grayscale PNG, paths relative to the directory).
//! Annotation files are written in a canonical form (sorted keys, integer
//! coordinates, two-space indentation, trailing newline) so a load/save
//! cycle reproduces the file byte for byte.

mod bank;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use bank::{
    extract_components, ComponentBank, ComponentKind, ComponentManifest, ComponentPatch, ManifestEntry, PatchSource,
    DEFAULT_INK_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::raster::GrayImage;

pub const ANNOTATION_FILE: &str = "annotations.json";

/// Instance categories. The first five are hand-annotated on real pages;
/// `stage_number` and `assembly_group` appear on synthesized pages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    SpeechBubble,
    Part,
    Tool,
    Symbol,
    Text,
    StageNumber,
    AssemblyGroup,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::SpeechBubble,
        Category::Part,
        Category::Tool,
        Category::Symbol,
        Category::Text,
        Category::StageNumber,
        Category::AssemblyGroup,
    ];

    /// Categories of the hand-annotated corpus, in table order.
    pub const ANNOTATED: [Category; 5] =
        [Category::SpeechBubble, Category::Part, Category::Tool, Category::Symbol, Category::Text];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::SpeechBubble => "speech_bubble",
            Category::Part => "part",
            Category::Tool => "tool",
            Category::Symbol => "symbol",
            Category::Text => "text",
            Category::StageNumber => "stage_number",
            Category::AssemblyGroup => "assembly_group",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Speech bubbles are segmented; everything else is a box.
    pub fn uses_polygon(self) -> bool {
        self == Category::SpeechBubble
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Category::SpeechBubble => "Speech bubble",
            Category::Part => "Part",
            Category::Tool => "Tool",
            Category::Symbol => "Symbol",
            Category::Text => "Text",
            Category::StageNumber => "Stage number",
            Category::AssemblyGroup => "Assembly group",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Geometry {
    Polygon(Polygon),
    Box(Rect),
}

impl Geometry {
    pub fn bbox(&self) -> Rect {
        match self {
            Geometry::Polygon(p) => p.bbox(),
            Geometry::Box(r) => *r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub id: u32,
    pub category: Category,
    pub geometry: Geometry,
}

impl Instance {
    /// Checks the category/geometry pairing and that the geometry is valid
    /// and inside a `width × height` page.
    pub fn check(&self, width: i64, height: i64) -> std::result::Result<(), String> {
        match (&self.geometry, self.category.uses_polygon()) {
            (Geometry::Polygon(_), false) => return Err(format!("{} instances must use a bbox", self.category)),
            (Geometry::Box(_), true) => return Err(format!("{} instances must use a polygon", self.category)),
            _ => {}
        }
        match &self.geometry {
            Geometry::Polygon(p) => {
                p.validate().map_err(|d| d.to_string())?;
                if !p.within_page(width, height) {
                    let [x, y] = *p
                        .points()
                        .iter()
                        .find(|&&[x, y]| x < 0 || y < 0 || x >= width || y >= height)
                        .expect("some vertex is out of bounds");
                    return Err(format!("polygon vertex ({x}, {y}) out of bounds for {width}x{height} page"));
                }
            }
            Geometry::Box(r) => {
                if r.w <= 0 || r.h <= 0 {
                    return Err(format!("bbox {:?} has non-positive size", <[i64; 4]>::from(*r)));
                }
                if !r.within_page(width, height) {
                    return Err(format!("bbox {:?} out of bounds for {width}x{height} page", <[i64; 4]>::from(*r)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedPage {
    pub id: String,
    /// Image path relative to the corpus directory.
    pub file: String,
    pub image: GrayImage,
    pub instances: Vec<Instance>,
}

impl AnnotatedPage {
    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub pages: Vec<AnnotatedPage>,
}

impl Corpus {
    pub fn page(&self, id: &str) -> Option<&AnnotatedPage> {
        self.pages.iter().find(|p| p.id == id)
    }

    pub fn instance_count(&self) -> usize {
        self.pages.iter().map(|p| p.instances.len()).sum()
    }
}

// On-disk records. Field order is alphabetical so serialization is canonical.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct AnnotationFile {
    pub pages: Vec<PageRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct PageRecord {
    pub file: String,
    pub height: u32,
    pub id: String,
    pub instances: Vec<InstanceRecord>,
    pub width: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct InstanceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<Rect>,
    pub category: String,
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Polygon>,
}

impl InstanceRecord {
    pub(crate) fn from_instance(inst: &Instance) -> Self {
        let (bbox, polygon) = match &inst.geometry {
            Geometry::Box(r) => (Some(*r), None),
            Geometry::Polygon(p) => (None, Some(p.clone())),
        };
        InstanceRecord { bbox, category: inst.category.as_str().to_owned(), id: inst.id, polygon }
    }

    pub(crate) fn to_instance(&self, page_id: &str) -> Result<Instance> {
        let err = |reason: String| Error::InvalidInstance { page_id: page_id.to_owned(), instance_id: self.id, reason };
        let category =
            Category::parse(&self.category).ok_or_else(|| err(format!("unknown category {:?}", self.category)))?;
        let geometry = match (&self.polygon, &self.bbox) {
            (Some(p), None) => Geometry::Polygon(p.clone()),
            (None, Some(b)) => Geometry::Box(*b),
            (Some(_), Some(_)) => return Err(err("record has both polygon and bbox".into())),
            (None, None) => return Err(err("record has neither polygon nor bbox".into())),
        };
        Ok(Instance { id: self.id, category, geometry })
    }
}

impl PageRecord {
    pub(crate) fn from_page(page: &AnnotatedPage) -> Self {
        PageRecord {
            file: page.file.clone(),
            height: page.height(),
            id: page.id.clone(),
            instances: page.instances.iter().map(InstanceRecord::from_instance).collect(),
            width: page.width(),
        }
    }
}

/// Canonical serialization of an annotation file.
pub(crate) fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("annotation records always serialize");
    s.push('\n');
    s
}

pub fn annotation_json(corpus: &Corpus) -> String {
    let file = AnnotationFile { pages: corpus.pages.iter().map(PageRecord::from_page).collect() };
    to_canonical_json(&file)
}

fn read_annotation_file(dir: &Path) -> Result<AnnotationFile> {
    let path = dir.join(ANNOTATION_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
}

/// Parses and validates one page record, pushing every problem found into
/// `problems`. Returns the page when it is usable.
fn load_page(dir: &Path, rec: &PageRecord, problems: &mut Vec<Error>) -> Option<AnnotatedPage> {
    let before = problems.len();
    let (w, h) = (rec.width as i64, rec.height as i64);
    if w == 0 || h == 0 {
        problems.push(Error::InvalidPage { page_id: rec.id.clone(), reason: "page has zero size".into() });
    }
    let mut seen = HashSet::new();
    let mut instances = Vec::with_capacity(rec.instances.len());
    for r in &rec.instances {
        if !seen.insert(r.id) {
            problems.push(Error::InvalidInstance {
                page_id: rec.id.clone(),
                instance_id: r.id,
                reason: "duplicate instance id".into(),
            });
            continue;
        }
        match r.to_instance(&rec.id) {
            Ok(inst) => match inst.check(w, h) {
                Ok(()) => instances.push(inst),
                Err(reason) => {
                    problems.push(Error::InvalidInstance { page_id: rec.id.clone(), instance_id: inst.id, reason })
                }
            },
            Err(e) => problems.push(e),
        }
    }

    let path: PathBuf = dir.join(&rec.file);
    let image = if !path.is_file() {
        problems.push(Error::MissingImage { page_id: rec.id.clone(), path });
        None
    } else {
        match GrayImage::read_png(&path) {
            Ok(img) if img.width() != rec.width || img.height() != rec.height => {
                problems.push(Error::InvalidPage {
                    page_id: rec.id.clone(),
                    reason: format!(
                        "image is {}x{} but record says {}x{}",
                        img.width(),
                        img.height(),
                        rec.width,
                        rec.height
                    ),
                });
                None
            }
            Ok(img) => Some(img),
            Err(e) => {
                problems.push(e);
                None
            }
        }
    };
    if problems.len() > before {
        return None;
    }
    Some(AnnotatedPage { id: rec.id.clone(), file: rec.file.clone(), image: image?, instances })
}

/// Runs every corpus check and returns all problems found (empty when the
/// corpus is valid).
pub fn validate_corpus(dir: &Path) -> Vec<Error> {
    let mut problems = Vec::new();
    match read_annotation_file(dir) {
        Ok(file) => {
            let mut ids = HashSet::new();
            for rec in &file.pages {
                if !ids.insert(rec.id.as_str()) {
                    problems.push(Error::InvalidPage { page_id: rec.id.clone(), reason: "duplicate page id".into() });
                }
                load_page(dir, rec, &mut problems);
            }
        }
        Err(e) => problems.push(e),
    }
    problems
}

/// Loads a corpus directory, failing on the first invalid record.
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    let file = read_annotation_file(dir)?;
    let mut pages = Vec::with_capacity(file.pages.len());
    let mut ids = HashSet::new();
    for rec in &file.pages {
        if !ids.insert(rec.id.clone()) {
            return Err(Error::InvalidPage { page_id: rec.id.clone(), reason: "duplicate page id".into() });
        }
        let mut problems = Vec::new();
        match load_page(dir, rec, &mut problems) {
            Some(page) => pages.push(page),
            None => return Err(problems.remove(0)),
        }
    }
    Ok(Corpus { pages })
}

/// Writes the annotation file and every page image under `dir`.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for page in &corpus.pages {
        let path = dir.join(&page.file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        page.image.write_png(&path)?;
    }
    let path = dir.join(ANNOTATION_FILE);
    fs::write(&path, annotation_json(corpus)).map_err(|e| Error::io(&path, e))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCount {
    pub instances: usize,
    pub images: usize,
}

/// Per-category instance and image counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub rows: BTreeMap<Category, CategoryCount>,
}

impl CorpusStats {
    pub fn get(&self, c: Category) -> CategoryCount {
        self.rows.get(&c).copied().unwrap_or_default()
    }

    /// Plain-text table: name, annotation type, instances, images.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<16} {:<10} {:>10} {:>8}\n", "Instance", "Annotation", "Instances", "Images");
        for (cat, n) in &self.rows {
            let kind = if cat.uses_polygon() { "Polygon" } else { "BBOX" };
            out.push_str(&format!("{:<16} {:<10} {:>10} {:>8}\n", cat.display_name(), kind, n.instances, n.images));
        }
        out
    }
}

/// Counts instances and the pages containing them, per category. The five
/// annotated categories always appear; others only when present.
pub fn stats(corpus: &Corpus) -> CorpusStats {
    let mut rows: BTreeMap<Category, CategoryCount> =
        Category::ANNOTATED.iter().map(|&c| (c, CategoryCount::default())).collect();
    for page in &corpus.pages {
        let mut on_page = HashSet::new();
        for inst in &page.instances {
            rows.entry(inst.category).or_default().instances += 1;
            on_page.insert(inst.category);
        }
        for c in on_page {
            rows.entry(c).or_default().images += 1;
        }
    }
    CorpusStats { rows }
}
