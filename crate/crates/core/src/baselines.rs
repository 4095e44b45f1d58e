//! Comparison augmentors: naive cut-paste and instance switching.

use geo::{Area, BooleanOps, Coord, LineString, MultiPolygon};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compositor::{min_blend, resample_patch, Pasted, SynthPage};
use crate::corpus::{AnnotatedPage, Category, ComponentBank, ComponentKind, Corpus, Geometry, Instance};
use crate::error::{Error, Result};
use crate::geometry::{snap_polygon, Affine, Polygon, Rect};
use crate::metrics::instance_mask;
use crate::raster::{rasterize_polygon, Mask};

/// Instances below this visible fraction are dropped after occlusion.
pub const MIN_VISIBLE_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaiveQuantities {
    pub n_key: u32,
    pub n_bubble: u32,
    pub n_number: u32,
    pub n_group: u32,
}

impl NaiveQuantities {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n_key = rng.gen_range(2..=8);
        let n_bubble = 4.min(n_key - 2);
        let rest = n_key - n_bubble;
        let n_number = rng.gen_range(0..=rest);
        NaiveQuantities { n_key, n_bubble, n_number, n_group: rest - n_number }
    }

    pub fn is_valid(&self) -> bool {
        (2..=8).contains(&self.n_key)
            && self.n_bubble == 4.min(self.n_key - 2)
            && self.n_number + self.n_group + self.n_bubble == self.n_key
    }
}

fn geo_polygon(points: &[[f64; 2]]) -> geo::Polygon<f64> {
    let ring: Vec<Coord<f64>> = points.iter().map(|&[x, y]| Coord { x, y }).collect();
    geo::Polygon::new(LineString::new(ring), vec![])
}

fn rect_points(r: &Rect) -> Vec<[f64; 2]> {
    r.corners().iter().map(|&[x, y]| [x as f64, y as f64]).collect()
}

/// Outline of `poly` minus `cuts`: the exterior of the largest remaining
/// piece (holes are filled), snapped into `bounds`.
fn clip_polygon(poly: &Polygon, cuts: &[Rect], bounds: &Rect) -> Option<Polygon> {
    let mut rest = MultiPolygon::new(vec![geo_polygon(&poly.to_f64())]);
    for c in cuts {
        rest = rest.difference(&geo_polygon(&rect_points(c)));
    }
    let largest = rest.0.iter().max_by(|a, b| a.unsigned_area().total_cmp(&b.unsigned_area()))?;
    let mut ring: Vec<[f64; 2]> = largest.exterior().coords().map(|c| [c.x, c.y]).collect();
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    snap_polygon(&ring, bounds)
}

/// Largest `w × h` not exceeding the page that keeps the aspect ratio.
fn fit_to_page(w: i64, h: i64, page_w: i64, page_h: i64) -> (i64, i64) {
    if w <= page_w && h <= page_h {
        return (w, h);
    }
    let s = (page_w as f64 / w as f64).min(page_h as f64 / h as f64);
    (((w as f64 * s).floor() as i64).max(1), ((h as f64 * s).floor() as i64).max(1))
}

struct Drawn {
    kind: ComponentKind,
    target: Rect,
    pasted: Pasted,
}

/// Pastes randomly chosen bank components, as whole rectangular patches,
/// at uniform positions on a white page. Later patches occlude earlier
/// ones; occluded annotations are clipped and instances with less than
/// [`MIN_VISIBLE_FRACTION`] of their mask visible are dropped.
pub fn naive_cut_paste<R: Rng + ?Sized>(
    rng: &mut R,
    bank: &ComponentBank,
    page_w: u32,
    page_h: u32,
) -> Result<SynthPage> {
    bank.require_all_kinds()?;
    let q = NaiveQuantities::sample(rng);
    let mut kinds: Vec<ComponentKind> = std::iter::repeat_n(ComponentKind::SpeechBubble, q.n_bubble as usize)
        .chain(std::iter::repeat_n(ComponentKind::StageNumber, q.n_number as usize))
        .chain(std::iter::repeat_n(ComponentKind::AssemblyGroup, q.n_group as usize))
        .collect();
    kinds.shuffle(rng);

    let (pw, ph) = (page_w as i64, page_h as i64);
    let mut page = SynthPage::blank(page_w, page_h);
    let mut drawn = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let patch = bank.nth_of_kind(kind, rng.gen_range(0..bank.count(kind)));
        let (w, h) = fit_to_page(patch.native_w(), patch.native_h(), pw, ph);
        let x = rng.gen_range(0..=pw - w);
        let y = rng.gen_range(0..=ph - h);
        let target = Rect::new(x, y, w, h);
        let pasted = resample_patch(patch, &target);
        for dy in 0..h {
            for dx in 0..w {
                let v = pasted.image.get(dx as u32, dy as u32);
                page.image.set((x + dx) as u32, (y + dy) as u32, v);
            }
        }
        drawn.push(Drawn { kind, target, pasted });
    }

    let bounds = page.image.bounds();
    for (i, d) in drawn.iter().enumerate() {
        let later: Vec<Rect> = drawn[i + 1..].iter().filter_map(|o| o.target.intersection(&d.target)).collect();
        let mut visible = d.pasted.mask.clone();
        for r in &later {
            visible.clear_rect(r);
        }
        let total = d.pasted.mask.count();
        if total == 0 || (visible.count() as f64) < MIN_VISIBLE_FRACTION * total as f64 {
            continue;
        }
        let geometry = match (d.kind, &d.pasted.outline) {
            (ComponentKind::SpeechBubble, Some(placed)) => {
                if later.is_empty() {
                    Geometry::Polygon(placed.clone())
                } else {
                    match clip_polygon(placed, &later, &bounds) {
                        Some(p) => Geometry::Polygon(p),
                        None => continue,
                    }
                }
            }
            _ => {
                let mut area = Mask::from_rect(&d.target, &bounds);
                for r in &later {
                    area.clear_rect(r);
                }
                match area.bbox() {
                    Some(b) => Geometry::Box(b),
                    None => continue,
                }
            }
        };
        let id = page.annotations.len() as u32 + 1;
        page.annotations.push(Instance { id, category: d.kind.category(), geometry });
        page.masks.push(visible);
    }
    Ok(page)
}

/// Affine map taking the donor outline's bounding box onto the
/// destination's, each axis scaled independently.
pub fn switch_affine(donor: &Polygon, dest: &Polygon) -> Affine {
    Affine::fit(&donor.bbox(), &dest.bbox())
}

struct Pick<'a> {
    page: &'a AnnotatedPage,
    bubble: usize,
}

impl Pick<'_> {
    fn polygon(&self) -> &Polygon {
        match &self.page.instances[self.bubble].geometry {
            Geometry::Polygon(p) => p,
            Geometry::Box(_) => unreachable!("speech bubbles carry polygons"),
        }
    }
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, page: &'a AnnotatedPage) -> Pick<'a> {
    let bubbles: Vec<usize> = page
        .instances
        .iter()
        .enumerate()
        .filter(|(_, i)| i.category == Category::SpeechBubble && matches!(i.geometry, Geometry::Polygon(_)))
        .map(|(k, _)| k)
        .collect();
    Pick { page, bubble: bubbles[rng.gen_range(0..bubbles.len())] }
}

/// Writes the donor bubble into the destination page.
fn transplant(dest: &Pick, donor: &Pick) -> SynthPage {
    let page = dest.page;
    let bounds = page.image.bounds();
    let dst_poly = dest.polygon();
    let src_poly = donor.polygon();
    let (src_box, dst_box) = (src_poly.bbox(), dst_poly.bbox());

    let mut image = page.image.clone();
    image.fill_mask(&rasterize_polygon(dst_poly, &bounds), 255);

    let snap_bounds =
        Rect::new(dst_box.x, dst_box.y, dst_box.w + 1, dst_box.h + 1).intersection(&bounds).unwrap_or(dst_box);
    let mapped = switch_affine(src_poly, dst_poly).apply_polygon(src_poly);
    let new_poly = snap_polygon(&mapped, &snap_bounds).unwrap_or_else(|| dst_poly.clone());
    let pasted = Pasted {
        target: dst_box,
        image: donor.page.image.crop(&src_box).resize_bilinear(dst_box.w as u32, dst_box.h as u32),
        mask: rasterize_polygon(&new_poly, &dst_box),
        outline: Some(new_poly.clone()),
    };
    min_blend(&mut image, &pasted);

    let mut out = SynthPage::blank(page.width(), page.height());
    out.id = page.id.clone();
    out.image = image;
    for (k, inst) in page.instances.iter().enumerate() {
        if k == dest.bubble {
            out.annotations.push(Instance { geometry: Geometry::Polygon(new_poly.clone()), ..inst.clone() });
            out.masks.push(pasted.mask.clone());
        } else {
            out.annotations.push(inst.clone());
            out.masks.push(instance_mask(inst, page.width(), page.height()));
        }
    }
    out
}

/// Swaps one speech bubble between two distinct corpus pages. Returns the
/// two modified pages in selection order, each carrying its source page id.
pub fn instance_switch<R: Rng + ?Sized>(rng: &mut R, corpus: &Corpus) -> Result<(SynthPage, SynthPage)> {
    let eligible: Vec<&AnnotatedPage> =
        corpus.pages.iter().filter(|p| p.instances.iter().any(|i| i.category == Category::SpeechBubble)).collect();
    if eligible.len() < 2 {
        return Err(Error::TooFewBubblePages(eligible.len()));
    }
    let pair: Vec<&&AnnotatedPage> = eligible.choose_multiple(rng, 2).collect();
    let a = pick(rng, pair[0]);
    let b = pick(rng, pair[1]);
    Ok((transplant(&a, &b), transplant(&b, &a)))
}
