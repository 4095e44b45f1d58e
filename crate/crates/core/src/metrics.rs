//! Detection and segmentation scoring.
//!
//! Follows the COCO protocol: ten IoU thresholds `0.50:0.05:0.95`,
//! greedy score-ordered matching per page and category, 101-point
//! interpolated precision, and at most 100 detections per page and
//! category. Box pairs use continuous box IoU; any pair involving a
//! polygon is compared as masks rasterized at page resolution.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    to_canonical_json, AnnotatedPage, AnnotationFile, Category, Corpus, Geometry, Instance, ANNOTATION_FILE,
};
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::raster::{rasterize, Mask};

pub const MAX_DETECTIONS: usize = 100;
pub const RECALL_POINTS: usize = 101;

/// IoU thresholds 0.50, 0.55, …, 0.95.
pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| (50 + 5 * i) as f64 / 100.0)
}

/// Predicted geometry in (possibly fractional) page pixels.
#[derive(Debug, Clone, PartialEq)]
pub enum PredGeometry {
    /// `[x, y, w, h]`
    Box([f64; 4]),
    Polygon(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub page_id: String,
    pub category: Category,
    pub geometry: PredGeometry,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<[f64; 4]>,
    category: String,
    page_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygon: Option<Vec<[f64; 2]>>,
    score: f64,
}

impl Prediction {
    fn from_record(index: usize, r: PredictionRecord) -> Result<Self> {
        let bad = |reason: String| Error::InvalidPrediction { index, reason };
        let category = Category::parse(&r.category).ok_or_else(|| bad(format!("unknown category {:?}", r.category)))?;
        let geometry = match (r.bbox, r.polygon) {
            (Some(b), None) => PredGeometry::Box(b),
            (None, Some(p)) => PredGeometry::Polygon(p),
            _ => return Err(bad("exactly one of bbox and polygon is required".into())),
        };
        let p = Prediction { page_id: r.page_id, category, geometry, score: r.score };
        p.check().map_err(bad)?;
        Ok(p)
    }

    fn to_record(&self) -> PredictionRecord {
        let (bbox, polygon) = match &self.geometry {
            PredGeometry::Box(b) => (Some(*b), None),
            PredGeometry::Polygon(p) => (None, Some(p.clone())),
        };
        PredictionRecord {
            bbox,
            category: self.category.as_str().to_owned(),
            page_id: self.page_id.clone(),
            polygon,
            score: self.score,
        }
    }

    /// Score in `[0, 1]`, finite coordinates, non-negative box size, and
    /// at least three polygon vertices. Out-of-page geometry is allowed
    /// (clipped when scored).
    pub fn check(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(format!("score {} outside [0, 1]", self.score));
        }
        match &self.geometry {
            PredGeometry::Box(b) => {
                if b.iter().any(|v| !v.is_finite()) || b[2] < 0.0 || b[3] < 0.0 {
                    return Err(format!("invalid bbox {b:?}"));
                }
            }
            PredGeometry::Polygon(p) => {
                if p.len() < 3 || p.iter().flatten().any(|v| !v.is_finite()) {
                    return Err("polygon needs at least 3 finite vertices".into());
                }
            }
        }
        Ok(())
    }

    /// A prediction reproducing a ground-truth instance exactly.
    pub fn from_instance(page_id: &str, inst: &Instance, score: f64) -> Self {
        let geometry = match &inst.geometry {
            Geometry::Box(r) => PredGeometry::Box([r.x as f64, r.y as f64, r.w as f64, r.h as f64]),
            Geometry::Polygon(p) => PredGeometry::Polygon(p.to_f64()),
        };
        Prediction { page_id: page_id.to_owned(), category: inst.category, geometry, score }
    }
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<PredictionRecord> = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    records.into_iter().enumerate().map(|(i, r)| Prediction::from_record(i, r)).collect()
}

pub fn predictions_json(preds: &[Prediction]) -> String {
    let records: Vec<PredictionRecord> = preds.iter().map(Prediction::to_record).collect();
    to_canonical_json(&records)
}

/// Ground truth for one page.
#[derive(Debug, Clone, PartialEq)]
pub struct GtPage {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<Instance>,
}

impl From<&AnnotatedPage> for GtPage {
    fn from(p: &AnnotatedPage) -> Self {
        GtPage { id: p.id.clone(), width: p.width(), height: p.height(), instances: p.instances.clone() }
    }
}

pub fn ground_truth(corpus: &Corpus) -> Vec<GtPage> {
    corpus.pages.iter().map(GtPage::from).collect()
}

/// Reads and validates annotations only, without decoding page images.
/// `path` may be a corpus directory or an annotation file.
pub fn load_ground_truth(path: &Path) -> Result<Vec<GtPage>> {
    let file_path = if path.is_dir() { path.join(ANNOTATION_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file_path).map_err(|e| Error::io(&file_path, e))?;
    let file: AnnotationFile = serde_json::from_str(&text).map_err(|e| Error::json(&file_path, e))?;
    let mut pages = Vec::with_capacity(file.pages.len());
    for rec in file.pages {
        let mut instances = Vec::with_capacity(rec.instances.len());
        for r in &rec.instances {
            let inst = r.to_instance(&rec.id)?;
            inst.check(rec.width as i64, rec.height as i64).map_err(|reason| Error::InvalidInstance {
                page_id: rec.id.clone(),
                instance_id: inst.id,
                reason,
            })?;
            instances.push(inst);
        }
        pages.push(GtPage { id: rec.id, width: rec.width, height: rec.height, instances });
    }
    Ok(pages)
}

fn area(b: &[f64; 4]) -> f64 {
    b[2].max(0.0) * b[3].max(0.0)
}

/// Intersection over union of two `[x, y, w, h]` boxes; 0 when the union
/// is empty.
pub fn iou_box(a: [f64; 4], b: [f64; 4]) -> f64 {
    let iw = (a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0]);
    let ih = (a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1]);
    let inter = if iw > 0.0 && ih > 0.0 { iw * ih } else { 0.0 };
    let union = area(&a) + area(&b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1]).sum::<f64>() / 2.0
}

/// IoU of two polygons rasterized on a `width × height` page. Degenerate
/// (zero-area) polygons score 0 against anything.
pub fn iou_mask(a: &[[f64; 2]], b: &[[f64; 2]], width: u32, height: u32) -> f64 {
    if a.len() < 3 || b.len() < 3 || signed_area(a) == 0.0 || signed_area(b) == 0.0 {
        return 0.0;
    }
    let bounds = Rect::new(0, 0, width as i64, height as i64);
    rasterize(a, &bounds).iou(&rasterize(b, &bounds))
}

fn clip_box(b: [f64; 4], width: u32, height: u32) -> [f64; 4] {
    let x0 = b[0].clamp(0.0, width as f64);
    let y0 = b[1].clamp(0.0, height as f64);
    let x1 = (b[0] + b[2]).clamp(0.0, width as f64);
    let y1 = (b[1] + b[3]).clamp(0.0, height as f64);
    [x0, y0, x1 - x0, y1 - y0]
}

fn box_outline(b: &[f64; 4]) -> Vec<[f64; 2]> {
    vec![[b[0], b[1]], [b[0] + b[2], b[1]], [b[0] + b[2], b[1] + b[3]], [b[0], b[1] + b[3]]]
}

/// Geometry prepared for repeated IoU queries.
enum Shape {
    Box([f64; 4]),
    Mask(Mask),
}

impl Shape {
    fn of_instance(inst: &Instance, width: u32, height: u32) -> Shape {
        match &inst.geometry {
            Geometry::Box(r) => Shape::Box([r.x as f64, r.y as f64, r.w as f64, r.h as f64]),
            Geometry::Polygon(p) => Shape::Mask(polygon_mask(&p.to_f64(), width, height)),
        }
    }

    fn of_prediction(p: &Prediction, width: u32, height: u32) -> Shape {
        match &p.geometry {
            PredGeometry::Box(b) => Shape::Box(clip_box(*b, width, height)),
            PredGeometry::Polygon(pts) => Shape::Mask(polygon_mask(pts, width, height)),
        }
    }

    fn to_mask(&self, width: u32, height: u32) -> Mask {
        match self {
            Shape::Box(b) => polygon_mask(&box_outline(b), width, height),
            Shape::Mask(m) => m.clone(),
        }
    }
}

fn polygon_mask(pts: &[[f64; 2]], width: u32, height: u32) -> Mask {
    if pts.len() < 3 || signed_area(pts) == 0.0 {
        return Mask::empty(Rect::new(0, 0, 0, 0));
    }
    rasterize(pts, &Rect::new(0, 0, width as i64, height as i64))
}

fn shape_iou(a: &Shape, b: &Shape, width: u32, height: u32) -> f64 {
    match (a, b) {
        (Shape::Box(x), Shape::Box(y)) => iou_box(*x, *y),
        (Shape::Mask(x), Shape::Mask(y)) => x.iou(y),
        (Shape::Box(_), Shape::Mask(m)) => a.to_mask(width, height).iou(m),
        (Shape::Mask(m), Shape::Box(_)) => m.iou(&b.to_mask(width, height)),
    }
}

/// IoU between an annotation and a prediction on a page of the given size.
pub fn instance_iou(gt: &Instance, pred: &Prediction, width: u32, height: u32) -> f64 {
    shape_iou(&Shape::of_instance(gt, width, height), &Shape::of_prediction(pred, width, height), width, height)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiouMode {
    /// Mean over ground-truth instances of the best prediction IoU.
    #[default]
    Instance,
    /// Per-category pixel IoU of the union of ground-truth masks against
    /// the union of predictions scoring at least 0.5, averaged over categories.
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub max_detections: usize,
    pub miou: MiouMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { max_detections: MAX_DETECTIONS, miou: MiouMode::Instance }
    }
}

/// Interpolated precision at the 101 recall points for one IoU threshold,
/// averaged over categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub iou_threshold: f64,
    pub precision: Vec<f64>,
}

/// Evaluation summary. Metrics are `None` when there is no ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ar: Option<f64>,
    pub miou: Option<f64>,
    pub curves: Vec<PrCurve>,
    pub gt_count: usize,
    pub prediction_count: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Two-line table in the column order AP, AP50, AP75, AR, mIoU.
    pub fn to_table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.3}"));
        format!(
            "{:>6} {:>6} {:>6} {:>6} {:>6}\n{:>6} {:>6} {:>6} {:>6} {:>6}\n",
            "AP",
            "AP50",
            "AP75",
            "AR",
            "mIoU",
            cell(self.ap),
            cell(self.ap50),
            cell(self.ap75),
            cell(self.ar),
            cell(self.miou)
        )
    }
}

/// Matches score-ordered detections to ground truth at one threshold.
/// Each detection takes the unmatched ground truth with the highest IoU at
/// or above `threshold` (lowest index on ties). Returns, per detection,
/// the matched ground-truth index.
pub fn greedy_match(ious: &[Vec<f64>], gt_count: usize, threshold: f64) -> Vec<Option<usize>> {
    let mut taken = vec![false; gt_count];
    ious.iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (g, &iou) in row.iter().enumerate() {
                if taken[g] || iou < threshold {
                    continue;
                }
                if best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
            best.map(|(g, _)| {
                taken[g] = true;
                g
            })
        })
        .collect()
}

/// 101-point interpolated average precision from a ranked list of
/// true/false positive flags.
pub fn interpolated_precision(tp_flags: &[bool], gt_count: usize) -> Vec<f64> {
    let n = tp_flags.len();
    let mut recall = Vec::with_capacity(n);
    let mut precision = Vec::with_capacity(n);
    let mut tp = 0usize;
    for (i, &hit) in tp_flags.iter().enumerate() {
        tp += hit as usize;
        recall.push(tp as f64 / gt_count as f64);
        precision.push(tp as f64 / (i + 1) as f64);
    }
    for i in (0..n.saturating_sub(1)).rev() {
        if precision[i + 1] > precision[i] {
            precision[i] = precision[i + 1];
        }
    }
    (0..RECALL_POINTS)
        .map(|k| {
            let r = k as f64 / 100.0;
            let idx = recall.partition_point(|&v| v < r);
            precision.get(idx).copied().unwrap_or(0.0)
        })
        .collect()
}

struct Detection {
    order: usize,
    score: f64,
    hits: [bool; 10],
}

/// Scores `preds` against `gts` (see the module docs for the protocol).
pub fn evaluate(preds: &[Prediction], gts: &[GtPage], opts: &EvalOptions) -> Result<EvalReport> {
    let thresholds = iou_thresholds();
    let page_index: HashMap<&str, usize> = gts.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    for (i, p) in preds.iter().enumerate() {
        p.check().map_err(|reason| Error::InvalidPrediction { index: i, reason })?;
        if !page_index.contains_key(p.page_id.as_str()) {
            return Err(Error::InvalidPrediction { index: i, reason: format!("unknown page {:?}", p.page_id) });
        }
    }

    // (page, category) -> prediction indices in input order
    let mut by_key: HashMap<(usize, Category), Vec<usize>> = HashMap::new();
    for (i, p) in preds.iter().enumerate() {
        by_key.entry((page_index[p.page_id.as_str()], p.category)).or_default().push(i);
    }

    let mut categories: Vec<Category> = gts.iter().flat_map(|p| p.instances.iter().map(|i| i.category)).collect();
    categories.sort();
    categories.dedup();
    let gt_count: usize = gts.iter().map(|p| p.instances.len()).sum();

    let mut cat_ap = Vec::new(); // [category][threshold]
    let mut cat_recall = Vec::new();
    let mut cat_curves = Vec::new(); // [category][threshold][101]
    let mut best_ious: Vec<f64> = Vec::with_capacity(gt_count);
    let mut pixel_ious = Vec::new();

    for &cat in &categories {
        let mut dets: Vec<Detection> = Vec::new();
        let mut npig = 0usize;
        let mut pixel_inter = 0usize;
        let mut pixel_union = 0usize;
        for (pi, page) in gts.iter().enumerate() {
            let (w, h) = (page.width, page.height);
            let gt: Vec<Shape> =
                page.instances.iter().filter(|i| i.category == cat).map(|i| Shape::of_instance(i, w, h)).collect();
            npig += gt.len();
            let mut idx = by_key.get(&(pi, cat)).cloned().unwrap_or_default();
            idx.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));
            idx.truncate(opts.max_detections);
            let shapes: Vec<Shape> = idx.iter().map(|&i| Shape::of_prediction(&preds[i], w, h)).collect();
            let ious: Vec<Vec<f64>> =
                shapes.iter().map(|d| gt.iter().map(|g| shape_iou(g, d, w, h)).collect()).collect();
            let matches: Vec<Vec<Option<usize>>> =
                thresholds.iter().map(|&t| greedy_match(&ious, gt.len(), t)).collect();
            for (k, &i) in idx.iter().enumerate() {
                dets.push(Detection {
                    order: i,
                    score: preds[i].score,
                    hits: std::array::from_fn(|t| matches[t][k].is_some()),
                });
            }
            for g in 0..gt.len() {
                best_ious.push(ious.iter().map(|row| row[g]).fold(0.0, f64::max));
            }
            if opts.miou == MiouMode::Pixel && !gt.is_empty() {
                let bounds = Rect::new(0, 0, w as i64, h as i64);
                let mut gt_union = Mask::empty(bounds);
                for s in &gt {
                    for (x, y) in s.to_mask(w, h).iter_set() {
                        gt_union.set(x, y, true);
                    }
                }
                let mut pred_union = Mask::empty(bounds);
                for (k, s) in shapes.iter().enumerate() {
                    if preds[idx[k]].score >= 0.5 {
                        for (x, y) in s.to_mask(w, h).iter_set() {
                            pred_union.set(x, y, true);
                        }
                    }
                }
                let inter = gt_union.intersection_count(&pred_union);
                pixel_inter += inter;
                pixel_union += gt_union.count() + pred_union.count() - inter;
            }
        }
        dets.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.order.cmp(&b.order)));
        let mut aps = [0.0; 10];
        let mut recalls = [0.0; 10];
        let mut curves = Vec::with_capacity(10);
        for t in 0..thresholds.len() {
            let flags: Vec<bool> = dets.iter().map(|d| d.hits[t]).collect();
            let curve = interpolated_precision(&flags, npig);
            aps[t] = curve.iter().sum::<f64>() / RECALL_POINTS as f64;
            recalls[t] = flags.iter().filter(|&&f| f).count() as f64 / npig as f64;
            curves.push(curve);
        }
        cat_ap.push(aps);
        cat_recall.push(recalls);
        cat_curves.push(curves);
        if pixel_union > 0 {
            pixel_ious.push(pixel_inter as f64 / pixel_union as f64);
        } else {
            pixel_ious.push(0.0);
        }
    }

    if categories.is_empty() {
        return Ok(EvalReport {
            ap: None,
            ap50: None,
            ap75: None,
            ar: None,
            miou: None,
            curves: Vec::new(),
            gt_count: 0,
            prediction_count: preds.len(),
        });
    }

    let nc = categories.len() as f64;
    let mean_at = |t: usize| cat_ap.iter().map(|a| a[t]).sum::<f64>() / nc;
    let ap = cat_ap.iter().flatten().sum::<f64>() / (nc * 10.0);
    let ar = cat_recall.iter().flatten().sum::<f64>() / (nc * 10.0);
    let miou = match opts.miou {
        MiouMode::Instance => best_ious.iter().sum::<f64>() / best_ious.len() as f64,
        MiouMode::Pixel => pixel_ious.iter().sum::<f64>() / nc,
    };
    let curves = thresholds
        .iter()
        .enumerate()
        .map(|(t, &iou_threshold)| PrCurve {
            iou_threshold,
            precision: (0..RECALL_POINTS).map(|k| cat_curves.iter().map(|c| c[t][k]).sum::<f64>() / nc).collect(),
        })
        .collect();
    Ok(EvalReport {
        ap: Some(ap),
        ap50: Some(mean_at(0)),
        ap75: Some(mean_at(5)),
        ar: Some(ar),
        miou: Some(miou),
        curves,
        gt_count,
        prediction_count: preds.len(),
    })
}

/// Predictions that reproduce every ground-truth instance with score 1.
pub fn perfect_predictions(gts: &[GtPage]) -> Vec<Prediction> {
    gts.iter().flat_map(|p| p.instances.iter().map(move |i| Prediction::from_instance(&p.id, i, 1.0))).collect()
}

/// Rasterized mask of an annotation on its page.
pub fn instance_mask(inst: &Instance, width: u32, height: u32) -> Mask {
    match &inst.geometry {
        Geometry::Box(r) => Mask::from_rect(r, &Rect::new(0, 0, width as i64, height as i64)),
        Geometry::Polygon(p) => polygon_mask(&Polygon::to_f64(p), width, height),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt_page(instances: Vec<Instance>) -> GtPage {
        GtPage { id: "p".into(), width: 64, height: 64, instances }
    }

    fn tool(id: u32, r: Rect) -> Instance {
        Instance { id, category: Category::Tool, geometry: Geometry::Box(r) }
    }

    fn pred(b: [f64; 4], score: f64) -> Prediction {
        Prediction { page_id: "p".into(), category: Category::Tool, geometry: PredGeometry::Box(b), score }
    }

    #[test]
    fn box_iou_examples() {
        assert_eq!(iou_box([0.0, 0.0, 2.0, 2.0], [0.0, 0.0, 2.0, 2.0]), 1.0);
        assert_eq!(iou_box([0.0, 0.0, 2.0, 2.0], [5.0, 5.0, 2.0, 2.0]), 0.0);
        assert!((iou_box([0.0, 0.0, 2.0, 2.0], [1.0, 0.0, 2.0, 2.0]) - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(iou_box([0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn mask_iou_examples() {
        let sq = |x: f64| vec![[x, 0.0], [x + 2.0, 0.0], [x + 2.0, 2.0], [x, 2.0]];
        assert_eq!(iou_mask(&sq(0.0), &sq(0.0), 10, 10), 1.0);
        assert_eq!(iou_mask(&sq(0.0), &sq(5.0), 10, 10), 0.0);
        let box_iou = iou_box([0.0, 0.0, 2.0, 2.0], [1.0, 0.0, 2.0, 2.0]);
        assert!((iou_mask(&sq(0.0), &sq(1.0), 10, 10) - box_iou).abs() < 1e-12);
        let flat = vec![[0.0, 0.0], [3.0, 0.0], [6.0, 0.0]];
        assert_eq!(iou_mask(&flat, &flat, 10, 10), 0.0);
    }

    #[test]
    fn greedy_prefers_highest_iou() {
        let ious = vec![vec![0.6, 0.9], vec![0.8, 0.0]];
        assert_eq!(greedy_match(&ious, 2, 0.5), vec![Some(1), Some(0)]);
        assert_eq!(greedy_match(&ious, 2, 0.85), vec![Some(1), None]);
    }

    #[test]
    fn interpolation_envelope() {
        // TP, FP, TP with 2 GT: precision 1, 1/2, 2/3 -> envelope 1, 2/3, 2/3
        let curve = interpolated_precision(&[true, false, true], 2);
        assert_eq!(curve[0], 1.0);
        assert_eq!(curve[50], 1.0);
        assert!((curve[51] - 2.0 / 3.0).abs() < 1e-15);
        assert!((curve[100] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_detector_scores_one() {
        let gts = vec![gt_page(vec![tool(1, Rect::new(0, 0, 10, 10)), tool(2, Rect::new(20, 20, 5, 8))])];
        let r = evaluate(&perfect_predictions(&gts), &gts, &EvalOptions::default()).unwrap();
        for v in [r.ap, r.ap50, r.ap75, r.ar, r.miou] {
            assert_eq!(v, Some(1.0));
        }
    }

    #[test]
    fn no_predictions_scores_zero() {
        let gts = vec![gt_page(vec![tool(1, Rect::new(0, 0, 10, 10))])];
        let r = evaluate(&[], &gts, &EvalOptions::default()).unwrap();
        assert_eq!((r.ap, r.ar, r.miou), (Some(0.0), Some(0.0), Some(0.0)));
    }

    #[test]
    fn no_ground_truth_is_undefined() {
        let gts = vec![gt_page(vec![])];
        let r = evaluate(&[pred([0.0, 0.0, 3.0, 3.0], 0.5)], &gts, &EvalOptions::default()).unwrap();
        assert_eq!((r.ap, r.ap50, r.ar, r.miou), (None, None, None, None));
        assert!(r.to_table().contains("n/a"));
    }

    #[test]
    fn detection_cap_applies_per_page() {
        let gts = vec![gt_page(vec![tool(1, Rect::new(0, 0, 10, 10))])];
        let mut preds: Vec<Prediction> = (0..5).map(|i| pred([40.0, 40.0, 3.0, 3.0], 0.9 - i as f64 * 0.01)).collect();
        preds.push(pred([0.0, 0.0, 10.0, 10.0], 0.1));
        let capped = EvalOptions { max_detections: 5, ..Default::default() };
        assert_eq!(evaluate(&preds, &gts, &capped).unwrap().ar, Some(0.0));
        assert_eq!(evaluate(&preds, &gts, &EvalOptions::default()).unwrap().ar, Some(1.0));
    }

    #[test]
    fn bad_predictions_are_rejected() {
        let gts = vec![gt_page(vec![])];
        assert!(evaluate(&[pred([0.0, 0.0, 1.0, 1.0], 1.5)], &gts, &EvalOptions::default()).is_err());
        let mut p = pred([0.0, 0.0, 1.0, 1.0], 0.5);
        p.page_id = "nope".into();
        assert!(evaluate(&[p], &gts, &EvalOptions::default()).is_err());
    }

    #[test]
    fn pixel_miou_mode() {
        let gts = vec![gt_page(vec![tool(1, Rect::new(0, 0, 4, 4))])];
        let preds = vec![pred([0.0, 0.0, 4.0, 2.0], 0.9), pred([0.0, 2.0, 4.0, 2.0], 0.3)];
        let opts = EvalOptions { miou: MiouMode::Pixel, ..Default::default() };
        let r = evaluate(&preds, &gts, &opts).unwrap();
        assert_eq!(r.miou, Some(0.5));
    }

    #[test]
    fn prediction_file_round_trip() {
        let preds = vec![
            pred([1.5, 2.0, 3.0, 4.0], 0.25),
            Prediction {
                page_id: "q".into(),
                category: Category::SpeechBubble,
                geometry: PredGeometry::Polygon(vec![[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]]),
                score: 1.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        fs::write(&path, predictions_json(&preds)).unwrap();
        assert_eq!(load_predictions(&path).unwrap(), preds);
    }
}
