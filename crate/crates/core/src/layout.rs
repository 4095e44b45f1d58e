//! Context-aware page layout.
//!
//! A page holds one or two effective areas, each the home of a single
//! assembly stage. Area count, arrangement and size ratios are drawn first;
//! then each area receives edge components (touching one or two of its
//! sides) and center components (touching none). The top-left corner of
//! every area always holds the stage number, and every area holds exactly
//! one assembly group.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{ComponentBank, ComponentKind};
use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Tunables for area positioning and component placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    /// Top/bottom margin for single-area layouts, as a fraction of page height.
    pub margin_frac: f64,
    /// Largest component size as a fraction of the area's width and height.
    pub scale_cap: f64,
    /// Rejection-sampling attempts per free-position component.
    pub placement_attempts: usize,
    /// Extra attempts for mandatory components, each after downscaling.
    pub mandatory_retries: usize,
    pub downscale_step: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            margin_frac: 0.02,
            scale_cap: 0.45,
            placement_attempts: 20,
            mandatory_retries: 4,
            downscale_step: 0.8,
        }
    }
}

impl LayoutConfig {
    pub fn check(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.margin_frac) {
            return Err(Error::Config(format!("margin_frac {} not in [0, 0.5)", self.margin_frac)));
        }
        if !(self.scale_cap > 0.0 && self.scale_cap < 0.5) {
            return Err(Error::Config(format!("scale_cap {} not in (0, 0.5)", self.scale_cap)));
        }
        if !(self.downscale_step > 0.0 && self.downscale_step < 1.0) {
            return Err(Error::Config(format!("downscale_step {} not in (0, 1)", self.downscale_step)));
        }
        if self.placement_attempts == 0 {
            return Err(Error::Config("placement_attempts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arrangement {
    Top,
    Middle,
    Bottom,
    HorizontalLeft,
    HorizontalRight,
    /// Stack position, counted from the top.
    Vertical(u32),
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arrangement::Top => f.write_str("top"),
            Arrangement::Middle => f.write_str("middle"),
            Arrangement::Bottom => f.write_str("bottom"),
            Arrangement::HorizontalLeft => f.write_str("horizontal_left"),
            Arrangement::HorizontalRight => f.write_str("horizontal_right"),
            Arrangement::Vertical(k) => write!(f, "vertical_{k}"),
        }
    }
}

impl TryFrom<String> for Arrangement {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Ok(match s.as_str() {
            "top" => Arrangement::Top,
            "middle" => Arrangement::Middle,
            "bottom" => Arrangement::Bottom,
            "horizontal_left" => Arrangement::HorizontalLeft,
            "horizontal_right" => Arrangement::HorizontalRight,
            other => other
                .strip_prefix("vertical_")
                .and_then(|k| k.parse().ok())
                .map(Arrangement::Vertical)
                .ok_or_else(|| format!("unknown arrangement {other:?}"))?,
        })
    }
}

impl From<Arrangement> for String {
    fn from(a: Arrangement) -> String {
        a.to_string()
    }
}

impl Serialize for Arrangement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Arrangement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Arrangement::try_from(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveArea {
    pub alpha: f64,
    pub arrangement: Arrangement,
    pub beta: f64,
    pub rect: Rect,
}

/// Area size from width/height ratios, rounded to whole pixels.
pub fn area_dims(alpha: f64, beta: f64, page_w: i64, page_h: i64) -> (i64, i64) {
    ((alpha * page_w as f64).round() as i64, (beta * page_h as f64).round() as i64)
}

/// Height ratios allowed for vertically stacked areas, in sixths.
const VERTICAL_BETA_SIXTHS: [u32; 3] = [2, 3, 4];

/// Draws the number, arrangement and size of the effective areas of one
/// page and positions them.
pub fn sample_effective_areas<R: Rng + ?Sized>(
    rng: &mut R,
    page_w: i64,
    page_h: i64,
    cfg: &LayoutConfig,
) -> Vec<EffectiveArea> {
    assert!(page_w > 0 && page_h > 0, "page dimensions must be positive");
    let margin = (cfg.margin_frac * page_h as f64).round() as i64;
    let area_count: u32 = rng.gen_range(1..=2);
    if area_count == 1 {
        let arrangement = *[Arrangement::Top, Arrangement::Middle, Arrangement::Bottom].choose(rng).expect("nonempty");
        let alpha = rng.gen_range(0.7..=0.9);
        let beta = match arrangement {
            Arrangement::Middle => rng.gen_range(0.6..=0.8),
            _ => rng.gen_range(0.4..=0.6),
        };
        let (w, h) = area_dims(alpha, beta, page_w, page_h);
        let x = (page_w - w) / 2;
        let y = match arrangement {
            Arrangement::Top => margin,
            Arrangement::Bottom => page_h - margin - h,
            _ => (page_h - h) / 2,
        };
        return vec![EffectiveArea { alpha, arrangement, beta, rect: Rect::new(x, y, w, h) }];
    }

    if rng.gen_bool(0.5) {
        // side by side, each centered in its half
        let left_half = page_w / 2;
        let right_half = page_w - left_half;
        let mut areas = Vec::with_capacity(2);
        for (arrangement, start, span) in
            [(Arrangement::HorizontalLeft, 0, left_half), (Arrangement::HorizontalRight, left_half, right_half)]
        {
            let alpha = 0.5;
            let beta = rng.gen_range(0.7..=0.9);
            let (w, h) = area_dims(alpha, beta, page_w, page_h);
            let x = (start + (span - w).max(0) / 2).min(page_w - w);
            let y = (page_h - h) / 2;
            areas.push(EffectiveArea { alpha, arrangement, beta, rect: Rect::new(x, y, w, h) });
        }
        areas
    } else {
        let alphas: [f64; 2] = [rng.gen_range(0.7..=0.9), rng.gen_range(0.7..=0.9)];
        let sixths = loop {
            let pair = [*VERTICAL_BETA_SIXTHS.choose(rng).unwrap(), *VERTICAL_BETA_SIXTHS.choose(rng).unwrap()];
            if pair[0] + pair[1] <= 6 {
                break pair;
            }
        };
        let dims: Vec<(i64, i64)> =
            (0..2).map(|i| area_dims(alphas[i], sixths[i] as f64 / 6.0, page_w, page_h)).collect();
        let slack = page_h - dims[0].1 - dims[1].1;
        let (y0, y1) = if slack >= 0 {
            let gap = slack / 3;
            (gap, gap + dims[0].1 + gap)
        } else {
            // rounding pushed the pair one pixel over the page height
            (0, page_h - dims[1].1)
        };
        [y0, y1]
            .into_iter()
            .enumerate()
            .map(|(i, y)| {
                let (w, h) = dims[i];
                EffectiveArea {
                    alpha: alphas[i],
                    arrangement: Arrangement::Vertical(i as u32),
                    beta: sixths[i] as f64 / 6.0,
                    rect: Rect::new((page_w - w) / 2, y, w, h),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

/// Set of area sides, serialized as a list in `left, right, top, bottom` order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Sides(u8);

impl Sides {
    pub const NONE: Sides = Sides(0);

    pub fn of(sides: &[Side]) -> Sides {
        Sides(sides.iter().fold(0, |acc, &s| acc | Self::bit(s)))
    }

    fn bit(s: Side) -> u8 {
        1 << (s as u8)
    }

    pub fn contains(&self, s: Side) -> bool {
        self.0 & Self::bit(s) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn to_vec(self) -> Vec<Side> {
        [Side::Left, Side::Right, Side::Top, Side::Bottom].into_iter().filter(|&s| self.contains(s)).collect()
    }

    /// Sides of `area` that `target` lies flush against.
    pub fn touched(target: &Rect, area: &Rect) -> Sides {
        let mut s = Vec::new();
        if target.x == area.x {
            s.push(Side::Left);
        }
        if target.right() == area.right() {
            s.push(Side::Right);
        }
        if target.y == area.y {
            s.push(Side::Top);
        }
        if target.bottom() == area.bottom() {
            s.push(Side::Bottom);
        }
        Sides::of(&s)
    }
}

impl Serialize for Sides {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sides {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Sides::of(&Vec::<Side>::deserialize(d)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Edge,
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub area_index: usize,
    pub category: ComponentKind,
    pub component_id: u32,
    pub role: Role,
    /// Ratio of target size to the patch's native size.
    pub scale: f64,
    pub target: Rect,
    pub touched_sides: Sides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPlan {
    pub areas: Vec<EffectiveArea>,
    pub page_h: i64,
    pub page_w: i64,
    pub placements: Vec<Placement>,
}

impl LayoutPlan {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical JSON form, hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Corner {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Corner {
    fn sides(self) -> [Side; 2] {
        match self {
            Corner::TopLeft => [Side::Top, Side::Left],
            Corner::TopRight => [Side::Top, Side::Right],
            Corner::BottomLeft => [Side::Bottom, Side::Left],
            Corner::BottomRight => [Side::Bottom, Side::Right],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Corner(Corner),
    Side(Side),
}

/// Chooses the edge slots for `edge_count` edge components; the first is
/// always the top-left corner.
fn edge_slots<R: Rng + ?Sized>(rng: &mut R, edge_count: usize) -> Vec<Slot> {
    use Corner::*;
    match edge_count {
        2 => vec![Slot::Corner(TopLeft), Slot::Corner(BottomRight)],
        3 => {
            let other = *[TopRight, BottomLeft, BottomRight].choose(rng).unwrap();
            let used: Vec<Side> = TopLeft.sides().into_iter().chain(other.sides()).collect();
            let mut free: Vec<Side> =
                [Side::Left, Side::Right, Side::Top, Side::Bottom].into_iter().filter(|s| !used.contains(s)).collect();
            if free.is_empty() {
                free = vec![Side::Left, Side::Right, Side::Top, Side::Bottom];
            }
            let side = *free.choose(rng).unwrap();
            vec![Slot::Corner(TopLeft), Slot::Corner(other), Slot::Side(side)]
        }
        4 => [TopLeft, TopRight, BottomLeft, BottomRight].into_iter().map(Slot::Corner).collect(),
        n => panic!("edge component count {n} outside 2..=4"),
    }
}

/// Target size for a patch in `area`: native when it fits inside the
/// scale cap, otherwise uniformly shrunk to fit, then multiplied by
/// `extra` (used for mandatory retries).
fn fit_size(native_w: i64, native_h: i64, area: &Rect, cfg: &LayoutConfig, extra: f64) -> (i64, i64, f64) {
    let limit_w = ((cfg.scale_cap * area.w as f64).floor() as i64).max(1);
    let limit_h = ((cfg.scale_cap * area.h as f64).floor() as i64).max(1);
    let base = if native_w <= limit_w && native_h <= limit_h {
        1.0
    } else {
        (limit_w as f64 / native_w as f64).min(limit_h as f64 / native_h as f64)
    };
    let scale = base * extra;
    if scale == 1.0 {
        return (native_w, native_h, 1.0);
    }
    let w = ((native_w as f64 * scale).round() as i64).clamp(1, limit_w);
    let h = ((native_h as f64 * scale).round() as i64).clamp(1, limit_h);
    (w, h, scale)
}

/// Candidate position for a `w × h` target in `slot`; `None` when the slot
/// cannot hold it.
fn slot_position<R: Rng + ?Sized>(rng: &mut R, slot: Slot, area: &Rect, w: i64, h: i64) -> Option<Rect> {
    let (ax, ay, ar, ab) = (area.x, area.y, area.right(), area.bottom());
    match slot {
        Slot::Corner(c) => {
            if w >= area.w || h >= area.h {
                return None;
            }
            let (x, y) = match c {
                Corner::TopLeft => (ax, ay),
                Corner::TopRight => (ar - w, ay),
                Corner::BottomLeft => (ax, ab - h),
                Corner::BottomRight => (ar - w, ab - h),
            };
            Some(Rect::new(x, y, w, h))
        }
        Slot::Side(side) => {
            // flush against `side`, clear of the two perpendicular sides
            if w + 2 > area.w || h + 2 > area.h {
                return None;
            }
            let r = match side {
                Side::Top => Rect::new(rng.gen_range(ax + 1..=ar - w - 1), ay, w, h),
                Side::Bottom => Rect::new(rng.gen_range(ax + 1..=ar - w - 1), ab - h, w, h),
                Side::Left => Rect::new(ax, rng.gen_range(ay + 1..=ab - h - 1), w, h),
                Side::Right => Rect::new(ar - w, rng.gen_range(ay + 1..=ab - h - 1), w, h),
            };
            Some(r)
        }
    }
}

fn center_position<R: Rng + ?Sized>(rng: &mut R, area: &Rect, w: i64, h: i64) -> Option<Rect> {
    if w + 2 > area.w || h + 2 > area.h {
        return None;
    }
    let x = rng.gen_range(area.x + 1..=area.right() - w - 1);
    let y = rng.gen_range(area.y + 1..=area.bottom() - h - 1);
    Some(Rect::new(x, y, w, h))
}

/// Draws the key components of one effective area and places them.
pub fn plan_components<R: Rng + ?Sized>(
    rng: &mut R,
    area_index: usize,
    area: &EffectiveArea,
    bank: &ComponentBank,
    cfg: &LayoutConfig,
) -> Result<Vec<Placement>> {
    bank.require_all_kinds()?;
    let rect = area.rect;
    let edge_count = rng.gen_range(2..=4usize);
    let slots = edge_slots(rng, edge_count);
    let group_slot = rng.gen_range(1..slots.len());
    let center_count = rng.gen_range(0..=2usize);

    // mandatory components go first so they always find room
    let mut order: Vec<(Slot, ComponentKind)> =
        vec![(slots[0], ComponentKind::StageNumber), (slots[group_slot], ComponentKind::AssemblyGroup)];
    for (i, &slot) in slots.iter().enumerate().skip(1) {
        if i != group_slot {
            order.push((slot, ComponentKind::SpeechBubble));
        }
    }

    let mut placed: Vec<Placement> = Vec::new();
    for (slot, kind) in order {
        let patch = bank.nth_of_kind(kind, rng.gen_range(0..bank.count(kind)));
        let mandatory = kind != ComponentKind::SpeechBubble;
        let rounds = if mandatory { cfg.mandatory_retries + 1 } else { 1 };
        let attempts = match slot {
            Slot::Corner(_) => 1,
            Slot::Side(_) => cfg.placement_attempts,
        };
        let mut extra = 1.0;
        let mut found = None;
        'rounds: for _ in 0..rounds {
            let (w, h, scale) = fit_size(patch.native_w(), patch.native_h(), &rect, cfg, extra);
            for _ in 0..attempts {
                let Some(target) = slot_position(rng, slot, &rect, w, h) else { break };
                if placed.iter().all(|p| !p.target.overlaps(&target)) {
                    found = Some((target, scale));
                    break 'rounds;
                }
            }
            extra *= cfg.downscale_step;
        }
        match found {
            Some((target, scale)) => placed.push(Placement {
                area_index,
                category: kind,
                component_id: patch.id,
                role: Role::Edge,
                scale,
                touched_sides: Sides::touched(&target, &rect),
                target,
            }),
            None if mandatory => return Err(Error::Unplaceable(kind, area_index)),
            None => {}
        }
    }

    for _ in 0..center_count {
        let kind = ComponentKind::SpeechBubble;
        let patch = bank.nth_of_kind(kind, rng.gen_range(0..bank.count(kind)));
        let (w, h, scale) = fit_size(patch.native_w(), patch.native_h(), &rect, cfg, 1.0);
        for _ in 0..cfg.placement_attempts {
            let Some(target) = center_position(rng, &rect, w, h) else { break };
            if placed.iter().all(|p| !p.target.overlaps(&target)) {
                placed.push(Placement {
                    area_index,
                    category: kind,
                    component_id: patch.id,
                    role: Role::Center,
                    scale,
                    touched_sides: Sides::NONE,
                    target,
                });
                break;
            }
        }
    }
    Ok(placed)
}

/// Full layout of one page.
pub fn plan_page<R: Rng + ?Sized>(
    rng: &mut R,
    page_w: i64,
    page_h: i64,
    bank: &ComponentBank,
    cfg: &LayoutConfig,
) -> Result<LayoutPlan> {
    bank.require_all_kinds()?;
    let areas = sample_effective_areas(rng, page_w, page_h, cfg);
    let mut placements = Vec::new();
    for (i, area) in areas.iter().enumerate() {
        placements.extend(plan_components(rng, i, area, bank, cfg)?);
    }
    Ok(LayoutPlan { areas, page_h, page_w, placements })
}

/// Checks every structural rule of a plan, re-deriving touched sides from
/// coordinates. Returns one message per violation.
pub fn validate_plan(plan: &LayoutPlan) -> Vec<String> {
    let mut v = Vec::new();
    let page = Rect::new(0, 0, plan.page_w, plan.page_h);
    if !(1..=2).contains(&plan.areas.len()) {
        v.push(format!("plan has {} areas", plan.areas.len()));
    }
    for (i, area) in plan.areas.iter().enumerate() {
        if !page.contains(&area.rect) || area.rect.is_empty() {
            v.push(format!("area {i} is not inside the page"));
        }
        let (w, h) = area_dims(area.alpha, area.beta, plan.page_w, plan.page_h);
        if (w, h) != (area.rect.w, area.rect.h) {
            v.push(format!("area {i} is {}x{}, ratios give {w}x{h}", area.rect.w, area.rect.h));
        }
        let own: Vec<&Placement> = plan.placements.iter().filter(|p| p.area_index == i).collect();
        let count = |k: ComponentKind| own.iter().filter(|p| p.category == k).count();
        if count(ComponentKind::StageNumber) != 1 {
            v.push(format!("area {i} has {} stage numbers", count(ComponentKind::StageNumber)));
        }
        if count(ComponentKind::AssemblyGroup) != 1 {
            v.push(format!("area {i} has {} assembly groups", count(ComponentKind::AssemblyGroup)));
        }
        let edges = own.iter().filter(|p| p.role == Role::Edge).count();
        if !(2..=4).contains(&edges) {
            v.push(format!("area {i} has {edges} edge components"));
        }
        let top_left = Sides::of(&[Side::Top, Side::Left]);
        match own.iter().find(|p| Sides::touched(&p.target, &area.rect) == top_left) {
            Some(p) if p.category == ComponentKind::StageNumber => {}
            Some(p) => v.push(format!("area {i} top-left corner holds {}", p.category)),
            None => v.push(format!("area {i} has no top-left corner component")),
        }
        for (a, p) in own.iter().enumerate() {
            for q in &own[a + 1..] {
                if p.target.overlaps(&q.target) {
                    v.push(format!("area {i}: components {} and {} overlap", p.component_id, q.component_id));
                }
            }
        }
    }
    for (j, p) in plan.placements.iter().enumerate() {
        let Some(area) = plan.areas.get(p.area_index) else {
            v.push(format!("placement {j} refers to missing area {}", p.area_index));
            continue;
        };
        let r = area.rect;
        if !r.contains(&p.target) || p.target.is_empty() {
            v.push(format!("placement {j} is not inside its area"));
        }
        let derived = Sides::touched(&p.target, &r);
        if derived != p.touched_sides {
            v.push(format!(
                "placement {j} records sides {:?}, touches {:?}",
                p.touched_sides.to_vec(),
                derived.to_vec()
            ));
        }
        match p.role {
            Role::Edge if !(1..=2).contains(&derived.len()) => {
                v.push(format!("edge placement {j} touches {} sides", derived.len()))
            }
            Role::Center if !r.strictly_contains(&p.target) => {
                v.push(format!("center placement {j} is not strictly inside its area"))
            }
            _ => {}
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ComponentPatch, PatchSource};
    use crate::raster::{GrayImage, Mask};
    use crate::seed::item_rng;

    pub(crate) fn toy_bank(kinds: &[ComponentKind]) -> ComponentBank {
        let patches = kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| ComponentPatch {
                id: i as u32,
                kind,
                image: GrayImage::new(40, 30, 0),
                mask: Mask::from_rect(&Rect::new(0, 0, 40, 30), &Rect::new(0, 0, 40, 30)),
                polygon: None,
                source: PatchSource { page_id: "p".into(), rect: Rect::new(0, 0, 40, 30) },
            })
            .collect();
        ComponentBank::new(patches)
    }

    fn full_bank() -> ComponentBank {
        toy_bank(&[ComponentKind::StageNumber, ComponentKind::SpeechBubble, ComponentKind::AssemblyGroup])
    }

    #[test]
    fn area_dims_examples() {
        assert_eq!(area_dims(0.8, 0.5, 2339, 1654), (1871, 827));
        assert_eq!(area_dims(1.0, 1.0, 1166, 1654), (1166, 1654));
        assert_eq!(area_dims(0.5, 1.0 / 3.0, 1166, 1654), (583, 551));
    }

    #[test]
    fn arrangement_tags_round_trip() {
        for a in [Arrangement::Top, Arrangement::HorizontalRight, Arrangement::Vertical(1)] {
            let s = serde_json::to_string(&a).unwrap();
            assert_eq!(serde_json::from_str::<Arrangement>(&s).unwrap(), a);
        }
        assert_eq!(Arrangement::Vertical(0).to_string(), "vertical_0");
    }

    #[test]
    fn two_edge_layout_uses_opposite_corners() {
        let bank = full_bank();
        let cfg = LayoutConfig::default();
        let area = EffectiveArea {
            alpha: 0.8,
            arrangement: Arrangement::Middle,
            beta: 0.7,
            rect: Rect::new(10, 10, 300, 400),
        };
        let mut seen = false;
        for s in 0..200 {
            let mut rng = item_rng(s, 0);
            let p = plan_components(&mut rng, 0, &area, &bank, &cfg).unwrap();
            let edges: Vec<_> = p.iter().filter(|p| p.role == Role::Edge).collect();
            if edges.len() == 2 {
                seen = true;
                assert_eq!(edges[0].touched_sides, Sides::of(&[Side::Top, Side::Left]));
                assert_eq!(edges[0].category, ComponentKind::StageNumber);
                assert_eq!(edges[1].touched_sides, Sides::of(&[Side::Bottom, Side::Right]));
                assert_eq!(edges[1].category, ComponentKind::AssemblyGroup);
            }
            if edges.len() == 4 {
                assert!(edges.iter().all(|e| e.touched_sides.len() == 2));
                let bubbles = edges.iter().filter(|e| e.category == ComponentKind::SpeechBubble).count();
                assert_eq!(bubbles, 2);
            }
        }
        assert!(seen);
    }

    #[test]
    fn missing_category_is_an_error() {
        let bank = toy_bank(&[ComponentKind::SpeechBubble, ComponentKind::AssemblyGroup]);
        let mut rng = item_rng(1, 0);
        let err = plan_page(&mut rng, 1166, 1654, &bank, &LayoutConfig::default()).unwrap_err();
        assert!(matches!(err, Error::MissingComponent(ComponentKind::StageNumber)));
    }

    #[test]
    fn large_patches_are_downscaled_to_cap() {
        let area = Rect::new(0, 0, 100, 100);
        let (w, h, s) = fit_size(400, 200, &area, &LayoutConfig::default(), 1.0);
        assert_eq!((w, h), (45, 23));
        assert!((s - 45.0 / 400.0).abs() < 1e-12);
        assert_eq!(fit_size(40, 20, &area, &LayoutConfig::default(), 1.0), (40, 20, 1.0));
    }

    #[test]
    fn plans_are_valid_and_deterministic() {
        let bank = full_bank();
        let cfg = LayoutConfig::default();
        for s in 0..300 {
            let a = plan_page(&mut item_rng(s, 0), 1166, 1654, &bank, &cfg).unwrap();
            let b = plan_page(&mut item_rng(s, 0), 1166, 1654, &bank, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(validate_plan(&a), Vec::<String>::new());
        }
    }

    #[test]
    fn validator_catches_moved_stage_number() {
        let bank = full_bank();
        let mut plan = plan_page(&mut item_rng(3, 0), 1166, 1654, &bank, &LayoutConfig::default()).unwrap();
        plan.placements[0].target.x += 1;
        let v = validate_plan(&plan);
        assert!(v.iter().any(|m| m.contains("top-left")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("records sides")), "{v:?}");
    }

    #[test]
    fn plan_json_round_trips() {
        let plan = plan_page(&mut item_rng(9, 2), 1166, 1654, &full_bank(), &LayoutConfig::default()).unwrap();
        let back: LayoutPlan = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.hash(), plan.hash());
    }
}
