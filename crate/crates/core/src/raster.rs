//! Grayscale images, binary masks, and scanline polygon fill.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};

/// Binary mask over a rectangular window of a larger pixel grid.
///
/// Pixels outside the window are unset; this keeps masks of small shapes
/// on large pages cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    window: Rect,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(window: Rect) -> Self {
        let window = if window.is_empty() { Rect::new(window.x, window.y, 0, 0) } else { window };
        Mask { bits: vec![false; window.area() as usize], window }
    }

    pub fn from_bits(window: Rect, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len() as i64, window.area(), "mask bits do not match window");
        Mask { window, bits }
    }

    /// Mask covering every pixel of `r` clipped to `bounds`.
    pub fn from_rect(r: &Rect, bounds: &Rect) -> Self {
        match r.intersection(bounds) {
            Some(w) => Mask { bits: vec![true; w.area() as usize], window: w },
            None => Mask::empty(Rect::new(0, 0, 0, 0)),
        }
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn get(&self, x: i64, y: i64) -> bool {
        let w = &self.window;
        if x < w.x || y < w.y || x >= w.right() || y >= w.bottom() {
            return false;
        }
        self.bits[((y - w.y) * w.w + (x - w.x)) as usize]
    }

    pub fn set(&mut self, x: i64, y: i64, v: bool) {
        let w = self.window;
        assert!(x >= w.x && y >= w.y && x < w.right() && y < w.bottom(), "pixel outside mask window");
        self.bits[((y - w.y) * w.w + (x - w.x)) as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Set pixels as absolute coordinates.
    pub fn iter_set(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let w = self.window;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (w.x + i as i64 % w.w, w.y + i as i64 / w.w))
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        let Some(common) = self.window.intersection(&other.window) else {
            return 0;
        };
        let mut n = 0;
        for y in common.y..common.bottom() {
            for x in common.x..common.right() {
                if self.get(x, y) && other.get(x, y) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Intersection over union; 0 when both masks are empty.
    pub fn iou(&self, other: &Mask) -> f64 {
        let inter = self.intersection_count(other);
        let union = self.count() + other.count() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Clears every pixel inside `r`.
    pub fn clear_rect(&mut self, r: &Rect) {
        if let Some(c) = self.window.intersection(r) {
            for y in c.y..c.bottom() {
                for x in c.x..c.right() {
                    self.set(x, y, false);
                }
            }
        }
    }

    /// Bounding box of the set pixels.
    pub fn bbox(&self) -> Option<Rect> {
        let mut it = self.iter_set();
        let (fx, fy) = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (fx, fy, fx, fy);
        for (x, y) in it {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        Some(Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }
}

/// Even-odd scanline fill of a closed outline, sampling pixel centers.
///
/// A pixel is set when `(px + 0.5, py + 0.5)` lies inside the outline;
/// a crossing at exactly the sample point counts on the half-open rule
/// (left edges inclusive, right edges exclusive). Only pixels inside
/// `bounds` are produced.
pub fn rasterize(points: &[[f64; 2]], bounds: &Rect) -> Mask {
    if points.len() < 3 {
        return Mask::empty(Rect::new(0, 0, 0, 0));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &[x, y] in points {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let outer = Rect::new(
        x0.floor() as i64,
        y0.floor() as i64,
        x1.ceil() as i64 - x0.floor() as i64 + 1,
        y1.ceil() as i64 - y0.floor() as i64 + 1,
    );
    let Some(window) = outer.intersection(bounds) else {
        return Mask::empty(Rect::new(0, 0, 0, 0));
    };
    let mut mask = Mask::empty(window);
    let n = points.len();
    let mut crossings: Vec<f64> = Vec::with_capacity(8);
    for py in window.y..window.bottom() {
        let yc = py as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let [ax, ay] = points[i];
            let [bx, by] = points[(i + 1) % n];
            if (ay > yc) != (by > yc) {
                crossings.push(ax + (yc - ay) * (bx - ax) / (by - ay));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            let start = ((pair[0] - 0.5).ceil() as i64).max(window.x);
            let end = ((pair[1] - 0.5).ceil() as i64).min(window.right());
            for px in start..end {
                mask.set(px, py, true);
            }
        }
    }
    mask
}

pub fn rasterize_polygon(poly: &Polygon, bounds: &Rect) -> Mask {
    rasterize(&poly.to_f64(), bounds)
}

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        GrayImage { width, height, data: vec![fill; width as usize * height as usize] }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Option<Self> {
        (data.len() == width as usize * height as usize).then_some(GrayImage { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width as i64, self.height as i64)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    /// Copies out the pixels of `r`, which must lie inside the image.
    pub fn crop(&self, r: &Rect) -> GrayImage {
        assert!(r.within_page(self.width as i64, self.height as i64), "crop outside image");
        let mut out = Vec::with_capacity(r.area() as usize);
        for y in r.y..r.bottom() {
            let row = y as usize * self.width as usize;
            out.extend_from_slice(&self.data[row + r.x as usize..row + r.right() as usize]);
        }
        GrayImage { width: r.w as u32, height: r.h as u32, data: out }
    }

    pub fn fill_mask(&mut self, mask: &Mask, v: u8) {
        for (x, y) in mask.iter_set() {
            if x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64 {
                self.set(x as u32, y as u32, v);
            }
        }
    }

    /// Bilinear resample to `w × h`, aligning pixel centers. Same-size
    /// resampling reproduces the input exactly.
    pub fn resize_bilinear(&self, w: u32, h: u32) -> GrayImage {
        if w == self.width && h == self.height {
            return self.clone();
        }
        let mut out = GrayImage::new(w, h, 0);
        let kx = self.width as f64 / w as f64;
        let ky = self.height as f64 / h as f64;
        let max_x = self.width as f64 - 1.0;
        let max_y = self.height as f64 - 1.0;
        for dy in 0..h {
            let sy = ((dy as f64 + 0.5) * ky - 0.5).clamp(0.0, max_y);
            let y0 = sy.floor() as u32;
            let y1 = (y0 + 1).min(self.height - 1);
            let fy = sy - y0 as f64;
            for dx in 0..w {
                let sx = ((dx as f64 + 0.5) * kx - 0.5).clamp(0.0, max_x);
                let x0 = sx.floor() as u32;
                let x1 = (x0 + 1).min(self.width - 1);
                let fx = sx - x0 as f64;
                let top = self.get(x0, y0) as f64 * (1.0 - fx) + self.get(x1, y0) as f64 * fx;
                let bot = self.get(x0, y1) as f64 * (1.0 - fx) + self.get(x1, y1) as f64 * fx;
                out.set(dx, dy, (top * (1.0 - fy) + bot * fy).round().clamp(0.0, 255.0) as u8);
            }
        }
        out
    }

    pub fn read_png(path: &Path) -> Result<GrayImage> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut decoder = png::Decoder::new(BufReader::new(file));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let png_err = |e: png::DecodingError| Error::Png { path: path.to_path_buf(), reason: e.to_string() };
        let mut reader = decoder.read_info().map_err(png_err)?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| Error::Png { path: path.to_path_buf(), reason: "image too large".into() })?;
        let mut buf = vec![0; size];
        let info = reader.next_frame(&mut buf).map_err(png_err)?;
        buf.truncate(info.buffer_size());
        let gray = match info.color_type {
            png::ColorType::Grayscale => buf,
            png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).map(|p| p[0]).collect(),
            other => {
                return Err(Error::Png {
                    path: path.to_path_buf(),
                    reason: format!("expected single-channel grayscale, found {other:?}"),
                })
            }
        };
        Ok(GrayImage { width: info.width, height: info.height, data: gray })
    }

    /// Encodes as an 8-bit grayscale PNG. Encoder settings are fixed so
    /// identical images give identical bytes.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, self.width, self.height);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_compression(png::Compression::Fast);
            let enc_err = |e: png::EncodingError| Error::PngEncode(e.to_string());
            let mut writer = enc.write_header().map_err(enc_err)?;
            writer.write_image_data(&self.data).map_err(enc_err)?;
            writer.finish().map_err(enc_err)?;
        }
        Ok(bytes)
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let bytes = self.encode_png()?;
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Nearest-neighbour resample of a full-window mask to `w × h`, placed at
/// `(x, y)`. Uses the same center alignment as [`GrayImage::resize_bilinear`].
pub fn resize_mask_nearest(mask: &Mask, x: i64, y: i64, w: i64, h: i64) -> Mask {
    let src = mask.window();
    let mut out = Mask::empty(Rect::new(x, y, w, h));
    let kx = src.w as f64 / w as f64;
    let ky = src.h as f64 / h as f64;
    for dy in 0..h {
        let sy = (((dy as f64 + 0.5) * ky).floor() as i64).min(src.h - 1);
        for dx in 0..w {
            let sx = (((dx as f64 + 0.5) * kx).floor() as i64).min(src.w - 1);
            if mask.get(src.x + sx, src.y + sy) {
                out.set(x + dx, y + dy, true);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent point-in-polygon test on doubled integer coordinates.
    fn center_inside(poly: &[[i64; 2]], px: i64, py: i64) -> bool {
        let (cx, cy) = (2 * px + 1, 2 * py + 1);
        let n = poly.len();
        let mut inside = false;
        for i in 0..n {
            let (xi, yi) = (2 * poly[i][0], 2 * poly[i][1]);
            let (xj, yj) = (2 * poly[(i + 1) % n][0], 2 * poly[(i + 1) % n][1]);
            if (yi > cy) != (yj > cy) {
                // cx < xi + (cy - yi)(xj - xi)/(yj - yi), cleared of the division
                let lhs = (cx - xi) * (yj - yi);
                let rhs = (cy - yi) * (xj - xi);
                let crosses = if yj - yi > 0 { lhs < rhs } else { lhs > rhs };
                if crosses {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn brute(poly: &[[i64; 2]], w: i64, h: i64) -> Vec<(i64, i64)> {
        let mut v = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if center_inside(poly, x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }

    #[test]
    fn rect_polygon_covers_exact_pixels() {
        let bounds = Rect::new(0, 0, 20, 20);
        let m = rasterize_polygon(&Polygon::from_rect(&Rect::new(2, 3, 5, 4)), &bounds);
        assert_eq!(m.count(), 20);
        assert_eq!(m.bbox(), Some(Rect::new(2, 3, 5, 4)));
    }

    #[test]
    fn triangle_matches_brute_force() {
        let tri = vec![[1, 1], [17, 4], [6, 15]];
        let m = rasterize_polygon(&Polygon::new(tri.clone()), &Rect::new(0, 0, 20, 20));
        let got: Vec<_> = {
            let mut v: Vec<_> = m.iter_set().collect();
            v.sort_by_key(|&(x, y)| (y, x));
            v
        };
        assert_eq!(got, brute(&tri, 20, 20));
    }

    #[test]
    fn clipping_to_bounds() {
        let m = rasterize_polygon(&Polygon::from_rect(&Rect::new(-5, -5, 10, 10)), &Rect::new(0, 0, 8, 8));
        assert_eq!(m.count(), 25);
    }

    #[test]
    fn mask_iou() {
        let b = Rect::new(0, 0, 10, 10);
        let a = Mask::from_rect(&Rect::new(0, 0, 2, 2), &b);
        let c = Mask::from_rect(&Rect::new(1, 0, 2, 2), &b);
        assert!((a.iou(&c) - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(Mask::empty(b).iou(&Mask::empty(b)), 0.0);
    }

    #[test]
    fn same_size_resample_is_identity() {
        let img = GrayImage::from_raw(3, 2, vec![0, 10, 20, 30, 40, 250]).unwrap();
        assert_eq!(img.resize_bilinear(3, 2), img);
        let m = Mask::from_bits(Rect::new(0, 0, 3, 2), vec![true, false, true, false, true, false]);
        let r = resize_mask_nearest(&m, 5, 7, 3, 2);
        assert_eq!(r.window(), Rect::new(5, 7, 3, 2));
        assert_eq!(r.bits(), m.bits());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_raw(4, 3, (0..12).map(|v| v * 20).collect()).unwrap();
        let p = dir.path().join("a.png");
        img.write_png(&p).unwrap();
        assert_eq!(GrayImage::read_png(&p).unwrap(), img);
        assert_eq!(img.encode_png().unwrap(), img.encode_png().unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scanline_equals_point_in_polygon(
                pts in proptest::collection::vec((0i64..24, 0i64..24), 3..7)
            ) {
                let poly: Vec<[i64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
                let m = rasterize(&poly.iter().map(|&[x, y]| [x as f64, y as f64]).collect::<Vec<_>>(), &Rect::new(0, 0, 24, 24));
                let mut got: Vec<_> = m.iter_set().collect();
                got.sort_by_key(|&(x, y)| (y, x));
                prop_assert_eq!(got, brute(&poly, 24, 24));
            }
        }
    }
}
