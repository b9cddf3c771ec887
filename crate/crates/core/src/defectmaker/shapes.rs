//! Defect shapes: Bézier blobs, scars and clumps, plus plain rectangles.
//!
//! Every generator draws a target pixel count from the configured area
//! range, builds a candidate and keeps it only if the rasterized count lands
//! in range and the shape fits the frame. A running gain corrects the
//! candidate scale between attempts.

use std::f64::consts::TAU;

use rand::Rng;

use super::bezier::{bezier_curve_points, bounds, polygon_area, Point};
use super::config::{DefectConfig, Range, ShapeKind};
use super::pixels::Mask;
use super::raster::{count_components, erode_until_split, fill_polygon, stroke_polyline};
use crate::error::{Error, Result};

/// Attempts per generation step before giving up.
pub const RETRY_BUDGET: usize = 64;

/// `(x, y, w, h)` of the tight box around the set cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeMask {
    mask: Mask,
    bbox: BBox,
}

impl ShapeMask {
    pub fn new(mask: Mask) -> Result<Self> {
        let mut it = mask.set_cells();
        let (y0, x0) = it
            .next()
            .ok_or_else(|| Error::Generation("shape mask has no set pixel".into()))?;
        let (mut lo, mut hi) = ((y0, x0), (y0, x0));
        for (y, x) in it {
            lo = (lo.0.min(y), lo.1.min(x));
            hi = (hi.0.max(y), hi.1.max(x));
        }
        let bbox = BBox {
            x: lo.1,
            y: lo.0,
            w: hi.1 - lo.1 + 1,
            h: hi.0 - lo.0 + 1,
        };
        Ok(Self { mask, bbox })
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn count(&self) -> usize {
        self.mask.count()
    }

    /// Set cells relative to the bounding-box corner.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let b = self.bbox;
        self.mask.set_cells().map(move |(y, x)| (y - b.y, x - b.x))
    }

    /// The bounding-box window as its own mask.
    pub fn cropped(&self) -> Mask {
        let b = self.bbox;
        let mut out = Mask::empty(b.h, b.w);
        for (y, x) in self.cells() {
            out.set(y, x, true);
        }
        out
    }
}

/// Pixel-count bounds `[min, max]` for an area-fraction range on a frame.
pub fn pixel_bounds(area: Range, frame: (usize, usize)) -> Result<(usize, usize)> {
    let total = (frame.0 * frame.1) as f64;
    let lo = ((area.lo * total - 1e-9).ceil() as usize).max(1);
    let hi = (area.hi * total + 1e-9).floor() as usize;
    if total == 0.0 || lo > hi {
        return Err(Error::Generation(format!(
            "area range {area} admits no pixel count on a {}x{} frame",
            frame.0, frame.1
        )));
    }
    Ok((lo, hi))
}

/// Rectangle sides `(long, short)` for a pixel area and aspect ratio:
/// `round(sqrt(area * aspect))` by `round(sqrt(area / aspect))`, each at least 1.
pub fn rect_dims(area: f64, aspect: f64) -> (usize, usize) {
    let long = ((area * aspect).sqrt().round() as usize).max(1);
    let short = ((area / aspect).sqrt().round() as usize).max(1);
    (long, short)
}

pub fn gen_shape<R: Rng + ?Sized>(
    kind: ShapeKind,
    cfg: &DefectConfig,
    frame: (usize, usize),
    rng: &mut R,
) -> Result<ShapeMask> {
    match kind {
        ShapeKind::BezierBlob => gen_bezier_blob(cfg, frame, rng),
        ShapeKind::BezierScar => gen_bezier_scar(cfg, frame, rng),
        ShapeKind::BezierClump => gen_bezier_clump(cfg, frame, rng),
        ShapeKind::Rect => gen_rect_shape(cfg, frame, rng, false),
        ShapeKind::RectScar => gen_rect_shape(cfg, frame, rng, true),
    }
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, r: Range) -> f64 {
    if r.lo == r.hi {
        r.lo
    } else {
        rng.random_range(r.lo..=r.hi)
    }
}

fn accept(mask: Mask, bounds: (usize, usize), frame: (usize, usize)) -> Option<ShapeMask> {
    let n = mask.count();
    if n < bounds.0 || n > bounds.1 {
        return None;
    }
    let shape = ShapeMask::new(mask).ok()?;
    let b = shape.bbox();
    (b.h <= frame.0 && b.w <= frame.1).then_some(shape)
}

fn exhausted(what: &str, area: Range, frame: (usize, usize)) -> Error {
    Error::Generation(format!(
        "{what}: no shape with area fraction in {area} fitting a {}x{} frame after {RETRY_BUDGET} attempts",
        frame.0, frame.1
    ))
}

fn update_gain(gain: &mut f64, target: f64, achieved: usize) {
    let ratio = if achieved == 0 { 4.0 } else { target / achieved as f64 };
    *gain *= ratio.clamp(0.25, 4.0);
}

fn draw_count<R: Rng + ?Sized>(rng: &mut R, bounds: (usize, usize)) -> f64 {
    rng.random_range(bounds.0..=bounds.1) as f64
}

/// Closed Bézier loop through polar-sorted random control points, filled.
pub fn gen_bezier_blob<R: Rng + ?Sized>(
    cfg: &DefectConfig,
    frame: (usize, usize),
    rng: &mut R,
) -> Result<ShapeMask> {
    let px = pixel_bounds(cfg.area, frame)?;
    let mut gain = 1.0;
    for _ in 0..RETRY_BUDGET {
        let n = rng.random_range(cfg.control_points.0..=cfg.control_points.1).max(3);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
        angles.sort_by(f64::total_cmp);
        let mut control: Vec<Point> = angles
            .iter()
            .map(|&a| {
                let r = rng.random_range(0.4..=1.0);
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        control.push(control[0]);
        let curve = bezier_curve_points(&control, cfg.curve_samples)?;
        let unit = polygon_area(&curve).abs();
        let target = draw_count(rng, px);
        if unit < 1e-6 {
            continue;
        }
        let scale = (target * gain / unit).sqrt();
        let (lo, hi) = bounds(&curve);
        let w = ((hi[0] - lo[0]) * scale).ceil() as usize + 1;
        let h = ((hi[1] - lo[1]) * scale).ceil() as usize + 1;
        if w > frame.1 + 2 || h > frame.0 + 2 {
            gain *= 0.5;
            continue;
        }
        let poly: Vec<Point> = curve
            .iter()
            .map(|p| [(p[0] - lo[0]) * scale + 0.5, (p[1] - lo[1]) * scale + 0.5])
            .collect();
        let mask = fill_polygon(&poly, h, w);
        let achieved = mask.count();
        if let Some(shape) = accept(mask, px, frame) {
            return Ok(shape);
        }
        update_gain(&mut gain, target, achieved);
    }
    Err(exhausted("bezier blob", cfg.area, frame))
}

/// Open Bézier stroke joining opposite corners of a long thin rectangle.
/// Both corner pixels are always covered, so the bounding box is the
/// rectangle itself and its aspect ratio is the drawn one.
pub fn gen_bezier_scar<R: Rng + ?Sized>(
    cfg: &DefectConfig,
    frame: (usize, usize),
    rng: &mut R,
) -> Result<ShapeMask> {
    let px = pixel_bounds(cfg.area, frame)?;
    let mut gain = 1.0;
    for _ in 0..RETRY_BUDGET {
        let thickness = uniform(rng, cfg.scar_thickness);
        let aspect = uniform(rng, cfg.scar_aspect);
        let target = draw_count(rng, px);
        let vertical = rng.random_bool(0.5);
        let descending = rng.random_bool(0.5);
        let long = ((target * gain / thickness).round() as usize).max(1);
        let short = ((long as f64 / aspect).round() as usize).max(1);
        if !cfg.scar_aspect.contains(long as f64 / short as f64) {
            continue;
        }
        let (fit_h, fit_w) = if vertical { (long, short) } else { (short, long) };
        if fit_h > frame.0 || fit_w > frame.1 {
            gain *= 0.5;
            continue;
        }
        let n = rng.random_range(cfg.control_points.0..=cfg.control_points.1);
        let (l, s) = (long as f64, short as f64);
        let mut inner: Vec<Point> = (0..n - 2)
            .map(|_| [rng.random_range(0.5..=l - 0.5), rng.random_range(0.5..=s - 0.5)])
            .collect();
        inner.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let (y0, y1) = if descending { (s - 0.5, 0.5) } else { (0.5, s - 0.5) };
        let mut control = Vec::with_capacity(n);
        control.push([0.5, y0]);
        control.extend(inner);
        control.push([l - 0.5, y1]);
        let curve = bezier_curve_points(&control, cfg.curve_samples)?;
        let radius = vec![thickness / 2.0; curve.len()];
        let mut mask = stroke_polyline(&curve, &radius, short, long);
        if vertical {
            mask = mask.transposed();
        }
        let achieved = mask.count();
        if let Some(shape) = accept(mask, px, frame) {
            return Ok(shape);
        }
        update_gain(&mut gain, target, achieved);
    }
    Err(exhausted("bezier scar", cfg.area, frame))
}

/// Thick Bézier stroke with a varying width, eroded with the 3x3 cross
/// until it breaks into at least two pieces.
pub fn gen_bezier_clump<R: Rng + ?Sized>(
    cfg: &DefectConfig,
    frame: (usize, usize),
    rng: &mut R,
) -> Result<ShapeMask> {
    let px = pixel_bounds(cfg.area, frame)?;
    let mut gain = 25.0;
    for _ in 0..RETRY_BUDGET {
        let target = draw_count(rng, px);
        let side = (target * gain).sqrt().max(8.0);
        let r_max = (0.12 * side).max(2.5);
        let r_min = 0.75;
        let margin = r_max + 0.5;
        let canvas = (side + 2.0 * margin).ceil() as usize;
        let n = rng.random_range(cfg.control_points.0..=cfg.control_points.1);
        let control: Vec<Point> = (0..n)
            .map(|_| {
                [
                    margin + rng.random::<f64>() * side,
                    margin + rng.random::<f64>() * side,
                ]
            })
            .collect();
        let curve = bezier_curve_points(&control, cfg.curve_samples)?;
        let freq = rng.random_range(1.5..=3.5);
        let phase = rng.random::<f64>();
        let last = (curve.len() - 1) as f64;
        let radius: Vec<f64> = (0..curve.len())
            .map(|i| {
                let s = i as f64 / last;
                r_min + (r_max - r_min) * (std::f64::consts::PI * (freq * s + phase)).sin().abs()
            })
            .collect();
        let stroke = stroke_polyline(&curve, &radius, canvas, canvas);
        let Some(mask) = erode_until_split(&stroke) else {
            gain *= 1.25;
            continue;
        };
        debug_assert!(count_components(&mask) >= 2);
        let achieved = mask.count();
        if let Some(shape) = accept(mask, px, frame) {
            return Ok(shape);
        }
        update_gain(&mut gain, target, achieved);
    }
    Err(exhausted("bezier clump", cfg.area, frame))
}

/// Axis-aligned rectangle sized by [`rect_dims`]; `scar` draws the aspect
/// from the scar range instead of the rectangle range.
pub fn gen_rect_shape<R: Rng + ?Sized>(
    cfg: &DefectConfig,
    frame: (usize, usize),
    rng: &mut R,
    scar: bool,
) -> Result<ShapeMask> {
    let px = pixel_bounds(cfg.area, frame)?;
    let aspect_range = if scar { cfg.scar_aspect } else { cfg.rect_aspect };
    for _ in 0..RETRY_BUDGET {
        let target = draw_count(rng, px);
        let aspect = uniform(rng, aspect_range);
        let (long, short) = rect_dims(target, aspect);
        let (h, w) = if rng.random_bool(0.5) { (long, short) } else { (short, long) };
        if h > frame.0 || w > frame.1 {
            continue;
        }
        if let Some(shape) = accept(Mask::filled(h, w, true), px, frame) {
            return Ok(shape);
        }
    }
    let what = if scar { "rect scar" } else { "rect" };
    Err(exhausted(what, cfg.area, frame))
}
