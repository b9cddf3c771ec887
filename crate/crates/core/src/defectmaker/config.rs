use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kv::KeyValues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    BezierBlob,
    BezierScar,
    BezierClump,
    Rect,
    RectScar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FillKind {
    Noise,
    CutPaste,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FuseMode {
    Paste,
    Blend,
}

macro_rules! named_enum {
    ($ty:ident { $($variant:ident => $name:literal $(| $alias:literal)*),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
                    $($name $(| $alias)* => Ok($ty::$variant),)+
                    other => Err(Error::Parameter(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"),
                        other
                    ))),
                }
            }
        }
    };
}

named_enum!(ShapeKind {
    BezierBlob => "bezier_blob" | "blob",
    BezierScar => "bezier_scar" | "scar",
    BezierClump => "bezier_clump" | "clump",
    Rect => "rect",
    RectScar => "rect_scar",
});

named_enum!(FillKind {
    Noise => "noise",
    CutPaste => "cutpaste" | "cut_paste",
});

named_enum!(FuseMode {
    Paste => "paste",
    Blend => "blend",
});

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    fn check(&self, name: &str, min: f64, max: f64) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::Parameter(format!(
                "{name} [{}, {}] is not a valid interval",
                self.lo, self.hi
            )));
        }
        if self.lo < min || self.hi > max {
            return Err(Error::Parameter(format!(
                "{name} [{}, {}] must lie within [{min}, {max}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Parameters of the synthetic-defect generator.
///
/// Labels: `0` is the unmodified normal class; otherwise
/// `1 + shape_position * fills.len() + fill_position`, positions taken in the
/// configured `shapes` and `fills` lists.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectConfig {
    pub shapes: Vec<ShapeKind>,
    pub fills: Vec<FillKind>,
    pub fuse_modes: Vec<FuseMode>,
    /// Defect pixel count as a fraction of the image area.
    pub area: Range,
    /// Long side over short side of scar bounding rectangles.
    pub scar_aspect: Range,
    pub rect_aspect: Range,
    /// Stroke width of scars, pixels.
    pub scar_thickness: Range,
    pub noise_mean: Range,
    pub noise_fluctuation: Range,
    pub blend_weight: Range,
    pub control_points: (usize, usize),
    pub curve_samples: usize,
    /// Probability that a sample is left unmodified (label 0).
    pub normal_fraction: f64,
    pub seed: u64,
}

impl Default for DefectConfig {
    fn default() -> Self {
        Self {
            shapes: vec![ShapeKind::BezierBlob, ShapeKind::BezierScar, ShapeKind::BezierClump],
            fills: vec![FillKind::Noise, FillKind::CutPaste],
            fuse_modes: vec![FuseMode::Paste, FuseMode::Blend],
            area: Range::new(0.005, 0.05),
            scar_aspect: Range::new(3.0, 10.0),
            rect_aspect: Range::new(1.0, 3.3),
            scar_thickness: Range::new(2.0, 4.0),
            noise_mean: Range::new(0.0, 255.0),
            noise_fluctuation: Range::new(0.0, 64.0),
            blend_weight: Range::new(0.3, 0.9),
            control_points: (4, 8),
            curve_samples: 128,
            normal_fraction: 1.0 / 7.0,
            seed: 0,
        }
    }
}

impl DefectConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("shapes", self.shapes.is_empty()),
            ("fills", self.fills.is_empty()),
            ("fuse", self.fuse_modes.is_empty()),
        ] {
            if empty {
                return Err(Error::Parameter(format!("{name} list is empty")));
            }
        }
        if has_duplicates(&self.shapes) || has_duplicates(&self.fills) || has_duplicates(&self.fuse_modes) {
            return Err(Error::Parameter("kind lists must not repeat entries".into()));
        }
        self.area.check("area", 0.0, 1.0)?;
        if self.area.hi <= 0.0 {
            return Err(Error::Parameter("area range must admit a positive fraction".into()));
        }
        self.scar_aspect.check("scar_aspect", 1.0, f64::MAX)?;
        self.rect_aspect.check("rect_aspect", 1.0, f64::MAX)?;
        self.scar_thickness.check("scar_thickness", f64::MIN_POSITIVE, f64::MAX)?;
        self.noise_mean.check("noise_mean", 0.0, 255.0)?;
        self.noise_fluctuation.check("noise_fluctuation", 0.0, 255.0)?;
        self.blend_weight.check("blend_weight", f64::MIN_POSITIVE, 1.0)?;
        let (lo, hi) = self.control_points;
        if lo < 2 || lo > hi {
            return Err(Error::Parameter(format!(
                "control_points [{lo}, {hi}] must satisfy 2 <= lo <= hi"
            )));
        }
        if self.curve_samples < 2 {
            return Err(Error::Parameter("curve_samples must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.normal_fraction) {
            return Err(Error::Parameter(format!(
                "normal_fraction {} must lie in [0, 1)",
                self.normal_fraction
            )));
        }
        Ok(())
    }

    /// Number of distinct labels, the normal class included.
    pub fn class_count(&self) -> u32 {
        1 + (self.shapes.len() * self.fills.len()) as u32
    }

    pub fn label(&self, shape: ShapeKind, fill: FillKind) -> Option<u32> {
        let s = self.shapes.iter().position(|&k| k == shape)?;
        let f = self.fills.iter().position(|&k| k == fill)?;
        Some(1 + (s * self.fills.len() + f) as u32)
    }

    /// Overrides defaults with keys from a flat config; unknown keys are errors.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        const KEYS: &[&str] = &[
            "shapes", "fills", "fuse", "area", "scar_aspect", "rect_aspect", "scar_thickness",
            "noise_mean", "noise_fluctuation", "blend_weight", "control_points", "curve_samples",
            "normal_fraction", "seed",
        ];
        if let Some(k) = kv.keys().find(|k| !KEYS.contains(k)) {
            return Err(Error::Parameter(format!("unknown defect config key {k:?}")));
        }
        let mut cfg = Self::default();
        if let Some(v) = kv.get_list("shapes")? {
            cfg.shapes = v;
        }
        if let Some(v) = kv.get_list("fills")? {
            cfg.fills = v;
        }
        if let Some(v) = kv.get_list("fuse")? {
            cfg.fuse_modes = v;
        }
        for (key, slot) in [
            ("area", &mut cfg.area),
            ("scar_aspect", &mut cfg.scar_aspect),
            ("rect_aspect", &mut cfg.rect_aspect),
            ("scar_thickness", &mut cfg.scar_thickness),
            ("noise_mean", &mut cfg.noise_mean),
            ("noise_fluctuation", &mut cfg.noise_fluctuation),
            ("blend_weight", &mut cfg.blend_weight),
        ] {
            if let Some(v) = kv.get_list::<f64>(key)? {
                *slot = pair(key, &v, Range::new)?;
            }
        }
        if let Some(v) = kv.get_list::<usize>("control_points")? {
            cfg.control_points = pair("control_points", &v, |a, b| (a, b))?;
        }
        if let Some(v) = kv.get("curve_samples")? {
            cfg.curve_samples = v;
        }
        if let Some(v) = kv.get("normal_fraction")? {
            cfg.normal_fraction = v;
        }
        if let Some(v) = kv.get("seed")? {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_key_values(&KeyValues::read_file(path)?)
    }

    /// Inverse of [`DefectConfig::from_key_values`].
    pub fn to_config_text(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        }
        let r = |r: Range| format!("{}, {}", r.lo, r.hi);
        format!(
            "shapes = {}\nfills = {}\nfuse = {}\narea = {}\nscar_aspect = {}\nrect_aspect = {}\n\
             scar_thickness = {}\nnoise_mean = {}\nnoise_fluctuation = {}\nblend_weight = {}\n\
             control_points = {}, {}\ncurve_samples = {}\nnormal_fraction = {}\nseed = {}\n",
            join(&self.shapes),
            join(&self.fills),
            join(&self.fuse_modes),
            r(self.area),
            r(self.scar_aspect),
            r(self.rect_aspect),
            r(self.scar_thickness),
            r(self.noise_mean),
            r(self.noise_fluctuation),
            r(self.blend_weight),
            self.control_points.0,
            self.control_points.1,
            self.curve_samples,
            self.normal_fraction,
            self.seed,
        )
    }
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[..i].contains(a))
}

/// One value means a degenerate interval.
fn pair<T: Copy, U>(key: &str, v: &[T], make: impl FnOnce(T, T) -> U) -> Result<U> {
    match *v {
        [a] => Ok(make(a, a)),
        [a, b] => Ok(make(a, b)),
        _ => Err(Error::Parameter(format!("{key} expects one or two values"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_taxonomy_has_seven_classes() {
        let cfg = DefectConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.class_count(), 7);
        assert_eq!(cfg.label(ShapeKind::BezierBlob, FillKind::Noise), Some(1));
        assert_eq!(cfg.label(ShapeKind::BezierBlob, FillKind::CutPaste), Some(2));
        assert_eq!(cfg.label(ShapeKind::BezierScar, FillKind::Noise), Some(3));
        assert_eq!(cfg.label(ShapeKind::BezierClump, FillKind::CutPaste), Some(6));
        assert_eq!(cfg.label(ShapeKind::Rect, FillKind::Noise), None);
    }

    #[test]
    fn parses_a_config_file_body() {
        let kv = KeyValues::parse(
            "shapes = rect, rect-scar\nfills = noise\narea = 0.01, 0.02\nblend_weight = 1\nseed = 42\n",
        )
        .unwrap();
        let cfg = DefectConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.shapes, vec![ShapeKind::Rect, ShapeKind::RectScar]);
        assert_eq!(cfg.fills, vec![FillKind::Noise]);
        assert_eq!(cfg.area, Range::new(0.01, 0.02));
        assert_eq!(cfg.blend_weight, Range::new(1.0, 1.0));
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.class_count(), 3);
    }

    #[test]
    fn text_roundtrip() {
        let cfg = DefectConfig {
            seed: 7,
            normal_fraction: 0.25,
            ..DefectConfig::default()
        };
        let back = DefectConfig::from_key_values(&KeyValues::parse(&cfg.to_config_text()).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_invalid_values() {
        for text in [
            "area = 0.2, 0.1",
            "area = 0, 1.5",
            "blend_weight = 0, 0.5",
            "noise_mean = 300",
            "control_points = 1, 4",
            "scar_aspect = 0.5, 2",
            "shapes = blob, blob",
            "shapes = hexagon",
            "normal_fraction = 1",
            "colour = red",
        ] {
            let kv = KeyValues::parse(text).unwrap();
            assert!(DefectConfig::from_key_values(&kv).is_err(), "{text}");
        }
    }
}
