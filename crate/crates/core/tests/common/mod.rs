//! Shared helpers for integration tests: a brute-force metrics evaluator
//! written straight from the definitions, and random small fixtures.

#![allow(dead_code)]

use instruct_synth::corpus::{Category, Geometry, Instance};
use instruct_synth::geometry::{Polygon, Rect};
use instruct_synth::metrics::{GtPage, PredGeometry, Prediction};
use rand::Rng;

pub const THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ar: Option<f64>,
    pub miou: Option<f64>,
}

impl Summary {
    pub fn values(&self) -> [Option<f64>; 5] {
        [self.ap, self.ap50, self.ap75, self.ar, self.miou]
    }

    pub fn max_diff(&self, other: &Summary) -> f64 {
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| match (a, b) {
                (Some(x), Some(y)) => (x - y).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

pub fn summary(r: &instruct_synth::metrics::EvalReport) -> Summary {
    Summary { ap: r.ap, ap50: r.ap50, ap75: r.ap75, ar: r.ar, miou: r.miou }
}

/// Pixel `(px, py)` belongs to an outline when its center is inside by
/// ray casting to the right; a crossing exactly at the center does not count.
fn center_inside(pts: &[[f64; 2]], px: i64, py: i64) -> bool {
    let (cx, cy) = (px as f64 + 0.5, py as f64 + 0.5);
    let mut inside = false;
    for i in 0..pts.len() {
        let [ax, ay] = pts[i];
        let [bx, by] = pts[(i + 1) % pts.len()];
        if (ay > cy) != (by > cy) {
            let x = ax + (cy - ay) * (bx - ax) / (by - ay);
            if cx < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn shoelace(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1]).sum::<f64>() / 2.0
}

fn pixels(pts: &[[f64; 2]], w: u32, h: u32) -> Vec<bool> {
    let mut v = vec![false; (w * h) as usize];
    if pts.len() < 3 || shoelace(pts) == 0.0 {
        return v;
    }
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            v[(y * w as i64 + x) as usize] = center_inside(pts, x, y);
        }
    }
    v
}

enum Oracle {
    Box([f64; 4]),
    Pts(Vec<[f64; 2]>),
}

fn gt_shape(i: &Instance) -> Oracle {
    match &i.geometry {
        Geometry::Box(r) => Oracle::Box([r.x as f64, r.y as f64, r.w as f64, r.h as f64]),
        Geometry::Polygon(p) => Oracle::Pts(p.points().iter().map(|&[x, y]| [x as f64, y as f64]).collect()),
    }
}

fn pred_shape(p: &Prediction) -> Oracle {
    match &p.geometry {
        PredGeometry::Box(b) => Oracle::Box(*b),
        PredGeometry::Polygon(v) => Oracle::Pts(v.clone()),
    }
}

fn outline(b: &[f64; 4]) -> Vec<[f64; 2]> {
    vec![[b[0], b[1]], [b[0] + b[2], b[1]], [b[0] + b[2], b[1] + b[3]], [b[0], b[1] + b[3]]]
}

/// Boxes fully inside the page are compared continuously; anything else
/// by counting pixels.
fn oracle_iou(a: &Oracle, b: &Oracle, w: u32, h: u32) -> f64 {
    if let (Oracle::Box(x), Oracle::Box(y)) = (a, b) {
        let ix = ((x[0] + x[2]).min(y[0] + y[2]) - x[0].max(y[0])).max(0.0);
        let iy = ((x[1] + x[3]).min(y[1] + y[3]) - x[1].max(y[1])).max(0.0);
        let inter = ix * iy;
        let union = x[2] * x[3] + y[2] * y[3] - inter;
        return if union > 0.0 { inter / union } else { 0.0 };
    }
    let pa = match a {
        Oracle::Box(x) => pixels(&outline(x), w, h),
        Oracle::Pts(p) => pixels(p, w, h),
    };
    let pb = match b {
        Oracle::Box(x) => pixels(&outline(x), w, h),
        Oracle::Pts(p) => pixels(p, w, h),
    };
    let inter = pa.iter().zip(&pb).filter(|(x, y)| **x && **y).count();
    let union = pa.iter().zip(&pb).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Best assignment of ranked detections to ground truth: among all
/// partial one-to-one matchings with IoU at or above `t`, the one whose
/// per-detection sequence of `(iou, -gt index)` is lexicographically
/// largest, unmatched ranking lowest.
fn brute_match(ious: &[Vec<f64>], ngt: usize, t: f64) -> Vec<Option<usize>> {
    fn key(ious: &[Vec<f64>], m: &[Option<usize>]) -> Vec<(f64, i64)> {
        m.iter().enumerate().map(|(d, g)| g.map_or((-1.0, 0), |g| (ious[d][g], -(g as i64)))).collect()
    }
    fn rec(
        d: usize,
        ious: &[Vec<f64>],
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        best: &mut Option<Vec<Option<usize>>>,
        t: f64,
    ) {
        if d == ious.len() {
            let better = match best {
                None => true,
                Some(b) => key(ious, cur).partial_cmp(&key(ious, b)) == Some(std::cmp::Ordering::Greater),
            };
            if better {
                *best = Some(cur.clone());
            }
            return;
        }
        cur.push(None);
        rec(d + 1, ious, used, cur, best, t);
        cur.pop();
        for g in 0..used.len() {
            if !used[g] && ious[d][g] >= t {
                used[g] = true;
                cur.push(Some(g));
                rec(d + 1, ious, used, cur, best, t);
                cur.pop();
                used[g] = false;
            }
        }
    }
    let mut best = None;
    rec(0, ious, &mut vec![false; ngt], &mut Vec::new(), &mut best, t);
    best.unwrap()
}

/// Reference evaluator for small inputs (no detection cap).
pub fn brute_force(preds: &[Prediction], gts: &[GtPage]) -> Summary {
    let mut cats: Vec<Category> = gts.iter().flat_map(|p| p.instances.iter().map(|i| i.category)).collect();
    cats.sort();
    cats.dedup();
    if cats.is_empty() {
        return Summary { ap: None, ap50: None, ap75: None, ar: None, miou: None };
    }
    let mut ap = vec![[0.0; 10]; cats.len()];
    let mut rec = vec![[0.0; 10]; cats.len()];
    let mut best_ious = Vec::new();

    for (ci, &c) in cats.iter().enumerate() {
        // global rank: score descending, then input order
        let mut ranked: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].category == c).collect();
        ranked.sort_by(|&a, &b| preds[b].score.partial_cmp(&preds[a].score).unwrap().then(a.cmp(&b)));
        let npig: usize = gts.iter().map(|p| p.instances.iter().filter(|i| i.category == c).count()).sum();

        let mut hit = vec![[false; 10]; preds.len()];
        for page in gts {
            let gt: Vec<&Instance> = page.instances.iter().filter(|i| i.category == c).collect();
            let dets: Vec<usize> = ranked.iter().copied().filter(|&i| preds[i].page_id == page.id).collect();
            let ious: Vec<Vec<f64>> = dets
                .iter()
                .map(|&d| {
                    gt.iter()
                        .map(|g| oracle_iou(&gt_shape(g), &pred_shape(&preds[d]), page.width, page.height))
                        .collect()
                })
                .collect();
            for (ti, &t) in THRESHOLDS.iter().enumerate() {
                for (k, m) in brute_match(&ious, gt.len(), t).into_iter().enumerate() {
                    hit[dets[k]][ti] = m.is_some();
                }
            }
            for g in 0..gt.len() {
                best_ious.push(ious.iter().map(|row| row[g]).fold(0.0, f64::max));
            }
        }

        for ti in 0..10 {
            let mut tp = 0;
            let mut pr = Vec::new();
            for (k, &d) in ranked.iter().enumerate() {
                tp += hit[d][ti] as usize;
                pr.push((tp as f64 / (k + 1) as f64, tp as f64 / npig as f64));
            }
            let mut sum = 0.0;
            for r in 0..=100 {
                let level = r as f64 / 100.0;
                sum += pr.iter().filter(|(_, rc)| *rc >= level).map(|(p, _)| *p).fold(0.0, f64::max);
            }
            ap[ci][ti] = sum / 101.0;
            rec[ci][ti] = tp as f64 / npig as f64;
        }
    }

    let n = cats.len() as f64;
    Summary {
        ap: Some(ap.iter().flatten().sum::<f64>() / (n * 10.0)),
        ap50: Some(ap.iter().map(|a| a[0]).sum::<f64>() / n),
        ap75: Some(ap.iter().map(|a| a[5]).sum::<f64>() / n),
        ar: Some(rec.iter().flatten().sum::<f64>() / (n * 10.0)),
        miou: Some(best_ious.iter().sum::<f64>() / best_ious.len() as f64),
    }
}

pub const FIXTURE_SIZE: u32 = 24;

fn random_triangle<R: Rng>(rng: &mut R) -> Vec<[i64; 2]> {
    let s = FIXTURE_SIZE as i64;
    loop {
        let p: Vec<[i64; 2]> = (0..3).map(|_| [rng.gen_range(0..s), rng.gen_range(0..s)]).collect();
        if Polygon::new(p.clone()).validate().is_ok() {
            return p;
        }
    }
}

fn jitter<R: Rng>(rng: &mut R, v: f64) -> f64 {
    (v + rng.gen_range(-2.0..2.0)).clamp(0.0, FIXTURE_SIZE as f64 - 0.5)
}

/// A random small evaluation problem: up to two 24×24 pages, up to four
/// ground-truth instances and four predictions over two categories.
pub fn random_fixture<R: Rng>(rng: &mut R) -> (Vec<Prediction>, Vec<GtPage>) {
    let s = FIXTURE_SIZE as i64;
    let page_ids = ["a", "b"];
    let npages = rng.gen_range(1..=2);
    let mut gts: Vec<GtPage> = page_ids[..npages]
        .iter()
        .map(|id| GtPage { id: id.to_string(), width: FIXTURE_SIZE, height: FIXTURE_SIZE, instances: vec![] })
        .collect();
    for k in 0..rng.gen_range(0..=4) {
        let p = rng.gen_range(0..npages);
        let inst = if rng.gen_bool(0.5) {
            let (x, y) = (rng.gen_range(0..s - 1), rng.gen_range(0..s - 1));
            let r = Rect::new(x, y, rng.gen_range(1..=s - x), rng.gen_range(1..=s - y));
            Instance { id: k + 1, category: Category::Tool, geometry: Geometry::Box(r) }
        } else {
            Instance {
                id: k + 1,
                category: Category::SpeechBubble,
                geometry: Geometry::Polygon(Polygon::new(random_triangle(rng))),
            }
        };
        gts[p].instances.push(inst);
    }

    let all: Vec<(usize, Instance)> =
        gts.iter().enumerate().flat_map(|(p, g)| g.instances.iter().map(move |i| (p, i.clone()))).collect();
    let scores = [0.3, 0.6, 0.9];
    let mut preds = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let score = if rng.gen_bool(0.5) { scores[rng.gen_range(0..3)] } else { rng.gen_range(0.0..=1.0) };
        let (page, category, geometry) = if !all.is_empty() && rng.gen_bool(0.6) {
            // perturbed copy of a ground-truth instance
            let (p, inst) = &all[rng.gen_range(0..all.len())];
            let g = match &inst.geometry {
                Geometry::Box(r) if rng.gen_bool(0.8) => {
                    let x = jitter(rng, r.x as f64);
                    let y = jitter(rng, r.y as f64);
                    let w = (r.w as f64 + rng.gen_range(-2.0..2.0)).clamp(0.5, FIXTURE_SIZE as f64 - x);
                    let h = (r.h as f64 + rng.gen_range(-2.0..2.0)).clamp(0.5, FIXTURE_SIZE as f64 - y);
                    PredGeometry::Box([x, y, w, h])
                }
                Geometry::Box(r) => PredGeometry::Polygon(
                    r.corners().iter().map(|&[x, y]| [jitter(rng, x as f64), jitter(rng, y as f64)]).collect(),
                ),
                Geometry::Polygon(poly) if rng.gen_bool(0.8) => PredGeometry::Polygon(
                    poly.points().iter().map(|&[x, y]| [jitter(rng, x as f64), jitter(rng, y as f64)]).collect(),
                ),
                Geometry::Polygon(poly) => {
                    let b = poly.bbox();
                    PredGeometry::Box([b.x as f64, b.y as f64, b.w.max(1) as f64, b.h.max(1) as f64])
                }
            };
            (*p, inst.category, g)
        } else {
            let c = if rng.gen_bool(0.5) { Category::Tool } else { Category::SpeechBubble };
            let x = rng.gen_range(0.0..FIXTURE_SIZE as f64 - 1.0);
            let y = rng.gen_range(0.0..FIXTURE_SIZE as f64 - 1.0);
            let w = rng.gen_range(0.5..=FIXTURE_SIZE as f64 - x);
            let h = rng.gen_range(0.5..=FIXTURE_SIZE as f64 - y);
            (rng.gen_range(0..npages), c, PredGeometry::Box([x, y, w, h]))
        };
        preds.push(Prediction { page_id: page_ids[page].to_string(), category, geometry, score });
    }
    (preds, gts)
}
