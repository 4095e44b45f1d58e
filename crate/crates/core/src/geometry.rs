//! Integer page geometry: axis-aligned rectangles and simple polygons.
//!
//! All annotation geometry lives on the integer pixel lattice. A pixel
//! `(px, py)` is covered by a shape when its center `(px + 0.5, py + 0.5)`
//! lies inside it, so a rectangle `[x, y, w, h]` covers exactly `w × h`
//! pixels and rasterizes identically as a box or as a four-vertex polygon.

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in page pixels, serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 4]", into = "[i64; 4]")]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

impl From<[i64; 4]> for Rect {
    fn from(v: [i64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [i64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

impl Rect {
    pub const fn new(x: i64, y: i64, w: i64, h: i64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> i64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> i64 {
        self.y + self.h
    }

    pub fn area(&self) -> i64 {
        self.w.max(0) * self.h.max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.w <= 0 || self.h <= 0
    }

    /// True when `other` lies inside `self` (shared borders allowed).
    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }

    /// True when `other` lies inside `self` without touching any border.
    pub fn strictly_contains(&self, other: &Rect) -> bool {
        other.x > self.x && other.y > self.y && other.right() < self.right() && other.bottom() < self.bottom()
    }

    /// Intersection with positive area, if any.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.intersection(other).is_some()
    }

    /// True when the rectangle covers only pixels of a `width × height` page.
    pub fn within_page(&self, width: i64, height: i64) -> bool {
        !self.is_empty() && self.x >= 0 && self.y >= 0 && self.right() <= width && self.bottom() <= height
    }

    pub fn corners(&self) -> [[i64; 2]; 4] {
        [[self.x, self.y], [self.right(), self.y], [self.right(), self.bottom()], [self.x, self.bottom()]]
    }
}

/// Why a polygon failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolygonDefect {
    TooFewVertices(usize),
    RepeatedVertex(usize),
    ZeroArea,
    SelfIntersecting(usize, usize),
}

impl std::fmt::Display for PolygonDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolygonDefect::TooFewVertices(n) => write!(f, "polygon has {n} vertices, need at least 3"),
            PolygonDefect::RepeatedVertex(i) => write!(f, "polygon vertex {i} repeats its predecessor"),
            PolygonDefect::ZeroArea => write!(f, "polygon has zero area"),
            PolygonDefect::SelfIntersecting(i, j) => {
                write!(f, "polygon edges {i} and {j} intersect")
            }
        }
    }
}

/// Closed polygon with integer vertices, serialized as `[[x, y], ...]`.
///
/// The closing edge from the last vertex back to the first is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon(pub Vec<[i64; 2]>);

impl Polygon {
    pub fn new(points: Vec<[i64; 2]>) -> Self {
        Polygon(points)
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_rect(r: &Rect) -> Self {
        Polygon(r.corners().to_vec())
    }

    /// Twice the signed shoelace area.
    pub fn doubled_area(&self) -> i64 {
        doubled_area(&self.0)
    }

    pub fn area(&self) -> f64 {
        self.doubled_area().unsigned_abs() as f64 / 2.0
    }

    /// Bounding box of the vertices. Its pixel coverage contains every
    /// pixel the polygon covers.
    pub fn bbox(&self) -> Rect {
        let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for &[x, y] in &self.0 {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        if self.0.is_empty() {
            return Rect::new(0, 0, 0, 0);
        }
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Polygon {
        Polygon(self.0.iter().map(|&[x, y]| [x + dx, y + dy]).collect())
    }

    /// Every vertex satisfies `0 <= x < width` and `0 <= y < height`.
    pub fn within_page(&self, width: i64, height: i64) -> bool {
        self.0.iter().all(|&[x, y]| x >= 0 && x < width && y >= 0 && y < height)
    }

    /// Every vertex lies in the half-open window covered by `r`.
    pub fn within_rect(&self, r: &Rect) -> bool {
        self.0.iter().all(|&[x, y]| x >= r.x && x < r.right() && y >= r.y && y < r.bottom())
    }

    pub fn to_f64(&self) -> Vec<[f64; 2]> {
        self.0.iter().map(|&[x, y]| [x as f64, y as f64]).collect()
    }

    /// Checks the structural invariants: at least three distinct
    /// consecutive vertices, nonzero area, and no two edges meeting other
    /// than consecutive edges at their shared vertex.
    pub fn validate(&self) -> Result<(), PolygonDefect> {
        let pts = &self.0;
        let n = pts.len();
        if n < 3 {
            return Err(PolygonDefect::TooFewVertices(n));
        }
        for i in 0..n {
            if pts[i] == pts[(i + 1) % n] {
                return Err(PolygonDefect::RepeatedVertex((i + 1) % n));
            }
        }
        if doubled_area(pts) == 0 {
            return Err(PolygonDefect::ZeroArea);
        }
        match first_intersection(pts) {
            Some((i, j)) => Err(PolygonDefect::SelfIntersecting(i, j)),
            None => Ok(()),
        }
    }
}

fn doubled_area(pts: &[[i64; 2]]) -> i64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let [x0, y0] = pts[i];
            let [x1, y1] = pts[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum()
}

fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
    let abx = (b[0] - a[0]) as i128;
    let aby = (b[1] - a[1]) as i128;
    let acx = (c[0] - a[0]) as i128;
    let acy = (c[1] - a[1]) as i128;
    abx * acy - aby * acx
}

fn on_segment(a: [i64; 2], b: [i64; 2], p: [i64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test (touching counts).
fn segments_touch(a: [i64; 2], b: [i64; 2], c: [i64; 2], d: [i64; 2]) -> bool {
    let d1 = orient(c, d, a).signum();
    let d2 = orient(c, d, b).signum();
    let d3 = orient(a, b, c).signum();
    let d4 = orient(a, b, d).signum();
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(c, d, a))
        || (d2 == 0 && on_segment(c, d, b))
        || (d3 == 0 && on_segment(a, b, c))
        || (d4 == 0 && on_segment(a, b, d))
}

/// First pair of edges `(i, j)` that meet illegally. Edge `i` runs from
/// vertex `i` to vertex `i + 1`.
fn first_intersection(pts: &[[i64; 2]]) -> Option<(usize, usize)> {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let adjacent_next = j == i + 1;
            let adjacent_wrap = i == 0 && j == n - 1;
            if adjacent_next || adjacent_wrap {
                // Consecutive edges share one vertex; they are illegal only
                // when they fold back onto each other.
                let (shared, p, q) = if adjacent_next { (b, a, d) } else { (a, b, c) };
                if orient(shared, p, q) == 0 {
                    let dot = (p[0] - shared[0]) as i128 * (q[0] - shared[0]) as i128
                        + (p[1] - shared[1]) as i128 * (q[1] - shared[1]) as i128;
                    if dot > 0 {
                        return Some((i, j));
                    }
                }
                continue;
            }
            if segments_touch(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Rounds a real-valued outline onto the pixel lattice and repairs the
/// artefacts rounding can introduce, keeping every vertex inside `bounds`
/// (half-open, as for page bounds).
///
/// Repeated vertices and spikes are removed first; remaining
/// self-intersections are resolved by deleting a vertex of the offending
/// edge pair until the outline is simple. If fewer than three vertices
/// survive, the convex hull of the rounded points is used. Returns `None`
/// only when the points are collinear after rounding.
pub fn snap_polygon(points: &[[f64; 2]], bounds: &Rect) -> Option<Polygon> {
    let (xmax, ymax) = (bounds.right() - 1, bounds.bottom() - 1);
    let rounded: Vec<[i64; 2]> = points
        .iter()
        .map(|&[x, y]| [(x.round() as i64).clamp(bounds.x, xmax), (y.round() as i64).clamp(bounds.y, ymax)])
        .collect();

    let mut pts = rounded.clone();
    loop {
        let before = pts.len();
        dedup_cyclic(&mut pts);
        remove_spikes(&mut pts);
        if pts.len() == before {
            break;
        }
    }
    while pts.len() >= 3 {
        match first_intersection(&pts) {
            None => break,
            Some((_, j)) => {
                pts.remove((j + 1) % pts.len());
                dedup_cyclic(&mut pts);
                remove_spikes(&mut pts);
            }
        }
    }
    let poly = Polygon(pts);
    if poly.validate().is_ok() {
        return Some(poly);
    }
    let hull = Polygon(convex_hull(&rounded));
    hull.validate().is_ok().then_some(hull)
}

fn dedup_cyclic(pts: &mut Vec<[i64; 2]>) {
    pts.dedup();
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
}

/// Drops vertices where the outline doubles back on itself or continues
/// straight through (collinear middle vertex).
fn remove_spikes(pts: &mut Vec<[i64; 2]>) {
    let mut i = 0;
    while pts.len() >= 3 && i < pts.len() {
        let n = pts.len();
        let prev = pts[(i + n - 1) % n];
        let next = pts[(i + 1) % n];
        if orient(prev, pts[i], next) == 0 {
            pts.remove(i);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
}

/// Andrew's monotone chain; counter-clockwise in image coordinates, no
/// collinear points.
pub fn convex_hull(points: &[[i64; 2]]) -> Vec<[i64; 2]> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[i64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[i64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Scale-then-translate map between two rectangles' coordinate frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub sx: f64,
    pub sy: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Affine {
    /// Maps `from` onto `to`, stretching each axis independently.
    pub fn fit(from: &Rect, to: &Rect) -> Self {
        let sx = to.w as f64 / from.w as f64;
        let sy = to.h as f64 / from.h as f64;
        Affine { sx, sy, tx: to.x as f64 - from.x as f64 * sx, ty: to.y as f64 - from.y as f64 * sy }
    }

    pub fn apply(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        [x * self.sx + self.tx, y * self.sy + self.ty]
    }

    pub fn apply_polygon(&self, poly: &Polygon) -> Vec<[f64; 2]> {
        poly.to_f64().into_iter().map(|p| self.apply(p)).collect()
    }
}
