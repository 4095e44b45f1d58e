//! Small synthetic instruction corpus used by tests, examples and the
//! bundled `fixtures/` directory.
//!
//! Four 600×850 pages are drawn procedurally with line-art stand-ins for
//! the real content (seven-segment stage numbers, speech bubbles holding
//! screws, tools, filled symbols and an isometric assembly drawing). The
//! instance table below is the ground truth; counts per category are:
//!
//! | category      | instances | pages |
//! |---------------|-----------|-------|
//! | speech_bubble | 4         | 3     |
//! | part          | 6         | 4     |
//! | tool          | 4         | 3     |
//! | symbol        | 2         | 2     |
//! | text          | 6         | 4     |

use std::f64::consts::PI;

use crate::corpus::{
    AnnotatedPage, Category, ComponentKind, ComponentManifest, Corpus, Geometry, Instance, ManifestEntry,
};
use crate::geometry::{Polygon, Rect};
use crate::raster::{rasterize, rasterize_polygon, GrayImage, Mask};

pub const PAGE_W: u32 = 600;
pub const PAGE_H: u32 = 850;

const INK: u8 = 0;
const SHADE: u8 = 200;
const WHITE: u8 = 255;

struct Canvas {
    image: GrayImage,
    instances: Vec<Instance>,
}

impl Canvas {
    fn new() -> Self {
        Canvas { image: GrayImage::new(PAGE_W, PAGE_H, WHITE), instances: Vec::new() }
    }

    fn fill(&mut self, pts: &[[f64; 2]], v: u8) {
        let m = rasterize(pts, &self.image.bounds());
        self.image.fill_mask(&m, v);
    }

    fn fill_rect(&mut self, r: Rect, v: u8) {
        self.image.fill_mask(&Mask::from_rect(&r, &self.image.bounds()), v);
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], width: f64) {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = (dx * dx + dy * dy).sqrt();
        let (nx, ny) = (-dy / len * width / 2.0, dx / len * width / 2.0);
        self.fill(
            &[[a[0] + nx, a[1] + ny], [b[0] + nx, b[1] + ny], [b[0] - nx, b[1] - ny], [a[0] - nx, a[1] - ny]],
            INK,
        );
    }

    fn annotate(&mut self, category: Category, geometry: Geometry) {
        let id = self.instances.len() as u32 + 1;
        self.instances.push(Instance { id, category, geometry });
    }

    /// Seven-segment digits filling `r`; annotated as text.
    fn number(&mut self, r: Rect, digits: &str) {
        let n = digits.len() as i64;
        let gap = 6;
        let dw = (r.w - gap * (n - 1)) / n;
        for (i, ch) in digits.chars().enumerate() {
            let x = r.x + i as i64 * (dw + gap);
            self.digit(Rect::new(x, r.y, dw, r.h), ch.to_digit(10).expect("decimal digit"));
        }
        self.annotate(Category::Text, Geometry::Box(r));
    }

    fn digit(&mut self, r: Rect, d: u32) {
        const SEGMENTS: [u8; 10] = [0x3f, 0x06, 0x5b, 0x4f, 0x66, 0x6d, 0x7d, 0x07, 0x7f, 0x6f];
        let t = (r.w / 5).max(3);
        let half = r.h / 2;
        let segs = [
            Rect::new(r.x, r.y, r.w, t),
            Rect::new(r.right() - t, r.y, t, half),
            Rect::new(r.right() - t, r.y + half, t, r.h - half),
            Rect::new(r.x, r.bottom() - t, r.w, t),
            Rect::new(r.x, r.y + half, t, r.h - half),
            Rect::new(r.x, r.y, t, half),
            Rect::new(r.x, r.y + half - t / 2, r.w, t),
        ];
        for (i, s) in segs.iter().enumerate() {
            if SEGMENTS[d as usize] & (1 << i) != 0 {
                self.fill_rect(*s, INK);
            }
        }
    }

    /// Round callout with a tail pointing at `angle`; annotated as one
    /// polygon covering body and tail.
    fn bubble(&mut self, cx: f64, cy: f64, radius: f64, tail_angle: f64, tail_len: f64) -> Polygon {
        let n = 32;
        let k = ((tail_angle.rem_euclid(2.0 * PI)) / (2.0 * PI) * n as f64).floor() as usize % n;
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            if i == (k + 1) % n {
                let tip = [
                    (cx + (radius + tail_len) * (tail_angle).cos()).round() as i64,
                    (cy + (radius + tail_len) * (tail_angle).sin()).round() as i64,
                ];
                pts.push(tip);
                continue;
            }
            let a = 2.0 * PI * i as f64 / n as f64;
            pts.push([(cx + radius * a.cos()).round() as i64, (cy + radius * a.sin()).round() as i64]);
        }
        let poly = Polygon::new(pts);
        debug_assert!(poly.validate().is_ok());
        let outline = rasterize_polygon(&poly, &self.image.bounds());
        self.image.fill_mask(&outline, INK);
        let inner: Vec<[f64; 2]> = (0..48)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 48.0;
                [cx + (radius - 5.0) * a.cos(), cy + (radius - 5.0) * a.sin()]
            })
            .collect();
        self.fill(&inner, WHITE);
        self.annotate(Category::SpeechBubble, Geometry::Polygon(poly.clone()));
        poly
    }

    fn screw(&mut self, r: Rect) {
        let head_h = r.h / 5;
        self.fill_rect(Rect::new(r.x, r.y, r.w, head_h), INK);
        let shaft_w = (r.w / 3).max(2);
        let sx = r.x + (r.w - shaft_w) / 2;
        self.fill_rect(Rect::new(sx, r.y + head_h, shaft_w, r.h - head_h), SHADE);
        let mut y = r.y + head_h + 3;
        while y + 2 < r.bottom() {
            self.line([sx as f64 - 2.0, y as f64], [(sx + shaft_w) as f64 + 2.0, y as f64 + 2.0], 1.5);
            y += 6;
        }
        self.annotate(Category::Part, Geometry::Box(r));
    }

    fn hammer(&mut self, r: Rect) {
        let head = Rect::new(r.x, r.y, r.w, r.h / 4);
        self.fill_rect(head, INK);
        let hw = (r.w / 6).max(3);
        self.fill_rect(Rect::new(r.x + (r.w - hw) / 2, r.y + r.h / 4, hw, r.h - r.h / 4), SHADE);
        self.fill_rect(Rect::new(r.x + (r.w - hw) / 2, r.bottom() - r.h / 3, hw, r.h / 3), INK);
        self.annotate(Category::Tool, Geometry::Box(r));
    }

    fn screwdriver(&mut self, r: Rect) {
        let grip = Rect::new(r.x, r.y, r.w, r.h / 2);
        self.fill_rect(grip, SHADE);
        self.line([r.x as f64, r.y as f64 + 1.0], [r.right() as f64, r.y as f64 + 1.0], 2.0);
        let bw = (r.w / 4).max(2);
        self.fill_rect(Rect::new(r.x + (r.w - bw) / 2, r.y + r.h / 2, bw, r.h - r.h / 2), INK);
        self.annotate(Category::Tool, Geometry::Box(r));
    }

    /// Filled black arrow.
    fn symbol(&mut self, r: Rect) {
        let (x, y, w, h) = (r.x as f64, r.y as f64, r.w as f64, r.h as f64);
        self.fill(
            &[
                [x, y + h * 0.3],
                [x + w * 0.6, y + h * 0.3],
                [x + w * 0.6, y],
                [x + w, y + h * 0.5],
                [x + w * 0.6, y + h],
                [x + w * 0.6, y + h * 0.7],
                [x, y + h * 0.7],
            ],
            INK,
        );
        self.annotate(Category::Symbol, Geometry::Box(r));
    }

    /// Isometric panel drawing; not annotated (assembly groups are cut via
    /// the manifest only).
    fn assembly(&mut self, r: Rect) {
        let (x, y, w, h) = (r.x as f64, r.y as f64, r.w as f64, r.h as f64);
        let top = [[x + w * 0.3, y], [x + w, y], [x + w * 0.7, y + h * 0.3], [x, y + h * 0.3]];
        let front = [[x, y + h * 0.3], [x + w * 0.7, y + h * 0.3], [x + w * 0.7, y + h], [x, y + h]];
        let side = [[x + w * 0.7, y + h * 0.3], [x + w, y], [x + w, y + h * 0.7], [x + w * 0.7, y + h]];
        self.fill(&top, 235);
        self.fill(&side, SHADE);
        for face in [&top, &front, &side] {
            for i in 0..4 {
                let a = face[i];
                let b = face[(i + 1) % 4];
                self.line(a, b, 3.0);
            }
        }
        // dowel holes
        for i in 0..3 {
            let cx = x + w * (0.15 + 0.2 * i as f64);
            let cy = y + h * 0.6;
            let hole: Vec<[f64; 2]> =
                (0..16).map(|k| 2.0 * PI * k as f64 / 16.0).map(|a| [cx + 6.0 * a.cos(), cy + 6.0 * a.sin()]).collect();
            self.fill(&hole, INK);
        }
    }
}

fn pad(r: Rect, p: i64) -> Rect {
    Rect::new(r.x - p, r.y - p, r.w + 2 * p, r.h + 2 * p)
}

fn bubble_crop(poly: &Polygon) -> Rect {
    let b = poly.bbox();
    Rect::new(b.x - 2, b.y - 2, b.w + 5, b.h + 5)
}

/// The fixture corpus and the crop manifest that cuts a 12-patch bank
/// from it (4 stage numbers, 4 speech bubbles, 4 assembly groups).
pub fn fixture_corpus() -> (Corpus, ComponentManifest) {
    let mut pages = Vec::new();
    let mut manifest = Vec::new();
    let mut entry = |page: &str, rect: Rect, category: ComponentKind| {
        manifest.push(ManifestEntry { category, page_id: page.to_owned(), rect });
    };

    // page 1: stage "1", one bubble with two screws and a count label, a hammer
    {
        let mut c = Canvas::new();
        let stage = Rect::new(40, 40, 40, 70);
        c.number(stage, "1");
        let group = Rect::new(70, 420, 300, 240);
        c.assembly(group);
        let b = c.bubble(430.0, 220.0, 110.0, 2.3, 70.0);
        c.screw(Rect::new(380, 160, 30, 100));
        c.screw(Rect::new(440, 170, 24, 80));
        c.number(Rect::new(470, 270, 40, 36), "4");
        c.hammer(Rect::new(420, 600, 90, 150));
        entry("fx-001", pad(stage, 3), ComponentKind::StageNumber);
        entry("fx-001", pad(group, 4), ComponentKind::AssemblyGroup);
        entry("fx-001", bubble_crop(&b), ComponentKind::SpeechBubble);
        pages.push(("fx-001", c));
    }
    // page 2: two stages side by side, two bubbles, an arrow symbol
    {
        let mut c = Canvas::new();
        let stage = Rect::new(30, 40, 70, 60);
        c.number(stage, "23");
        let group = Rect::new(40, 500, 220, 200);
        c.assembly(group);
        let b1 = c.bubble(150.0, 270.0, 85.0, 1.8, 80.0);
        c.screw(Rect::new(135, 220, 28, 90));
        let b2 = c.bubble(450.0, 300.0, 95.0, 2.0, 90.0);
        c.screw(Rect::new(430, 250, 36, 100));
        c.symbol(Rect::new(330, 560, 120, 70));
        entry("fx-002", pad(stage, 3), ComponentKind::StageNumber);
        entry("fx-002", pad(group, 4), ComponentKind::AssemblyGroup);
        entry("fx-002", bubble_crop(&b1), ComponentKind::SpeechBubble);
        entry("fx-002", bubble_crop(&b2), ComponentKind::SpeechBubble);
        pages.push(("fx-002", c));
    }
    // page 3: no bubbles; loose screw, two tools, symbol
    {
        let mut c = Canvas::new();
        let stage = Rect::new(40, 50, 45, 80);
        c.number(stage, "7");
        let group = Rect::new(120, 250, 360, 300);
        c.assembly(group);
        c.screw(Rect::new(60, 620, 30, 110));
        c.hammer(Rect::new(250, 620, 80, 140));
        c.screwdriver(Rect::new(420, 600, 40, 170));
        c.symbol(Rect::new(380, 80, 100, 60));
        entry("fx-003", pad(stage, 3), ComponentKind::StageNumber);
        entry("fx-003", pad(group, 4), ComponentKind::AssemblyGroup);
        pages.push(("fx-003", c));
    }
    // page 4: one bubble with a screw, a screwdriver, two labels
    {
        let mut c = Canvas::new();
        let stage = Rect::new(50, 40, 90, 75);
        c.number(stage, "10");
        let group = Rect::new(60, 520, 280, 220);
        c.assembly(group);
        let b = c.bubble(400.0, 250.0, 120.0, 2.6, 60.0);
        c.screw(Rect::new(370, 190, 34, 110));
        c.number(Rect::new(420, 300, 60, 36), "20");
        c.screwdriver(Rect::new(470, 560, 44, 180));
        entry("fx-004", pad(stage, 3), ComponentKind::StageNumber);
        entry("fx-004", pad(group, 4), ComponentKind::AssemblyGroup);
        entry("fx-004", bubble_crop(&b), ComponentKind::SpeechBubble);
        pages.push(("fx-004", c));
    }

    let corpus = Corpus {
        pages: pages
            .into_iter()
            .map(|(id, c)| AnnotatedPage {
                id: id.to_owned(),
                file: format!("images/{id}.png"),
                image: c.image,
                instances: c.instances,
            })
            .collect(),
    };
    (corpus, ComponentManifest(manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_components, stats, DEFAULT_INK_THRESHOLD};

    #[test]
    fn fixture_instances_are_valid() {
        let (corpus, _) = fixture_corpus();
        for p in &corpus.pages {
            for i in &p.instances {
                i.check(PAGE_W as i64, PAGE_H as i64).unwrap_or_else(|e| panic!("{} #{}: {e}", p.id, i.id));
            }
        }
        assert_eq!(corpus.instance_count(), 22);
    }

    #[test]
    fn fixture_counts() {
        let (corpus, _) = fixture_corpus();
        let s = stats(&corpus);
        let row = |c| (s.get(c).instances, s.get(c).images);
        assert_eq!(row(Category::SpeechBubble), (4, 3));
        assert_eq!(row(Category::Part), (6, 4));
        assert_eq!(row(Category::Tool), (4, 3));
        assert_eq!(row(Category::Symbol), (2, 2));
        assert_eq!(row(Category::Text), (6, 4));
    }

    #[test]
    fn fixture_bank_extracts() {
        let (corpus, manifest) = fixture_corpus();
        let bank = extract_components(&corpus, &manifest, DEFAULT_INK_THRESHOLD).unwrap();
        assert_eq!(bank.len(), 12);
        for k in ComponentKind::ALL {
            assert_eq!(bank.count(k), 4);
        }
    }
}
