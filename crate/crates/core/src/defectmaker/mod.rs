//! Synthetic defects: a shape, a fill and a fusing rule composed onto a
//! normal image, placed inside an optional saliency region.

pub mod bezier;
pub mod config;
pub mod fill;
pub mod fuse;
pub mod pixels;
pub mod raster;
pub mod shapes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use bezier::{bezier_curve_points, Point};
pub use config::{DefectConfig, FillKind, FuseMode, Range, ShapeKind};
pub use fill::{gen_cutpaste_fill, gen_noise_fill};
pub use fuse::{fuse_defect, place_defect, placed_mask, Offset};
pub use pixels::{Image, Mask};
pub use shapes::{
    gen_bezier_blob, gen_bezier_clump, gen_bezier_scar, gen_rect_shape, gen_shape, BBox, ShapeMask,
    RETRY_BUDGET,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSample {
    pub image: Image,
    pub mask: Mask,
    pub label: u32,
}

/// What [`make_sample`] drew, for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecipe {
    pub shape: ShapeKind,
    pub fill: FillKind,
    pub fuse: FuseMode,
    pub beta: f64,
    pub offset: Offset,
}

/// The RNG for sample `index` under `seed`: one ChaCha8 stream per sample,
/// so samples can be generated in any order or in parallel.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Composes shape, fill, placement and fusing. With probability
/// `cfg.normal_fraction` the image is returned unchanged with label 0.
/// `donor` feeds cut-paste fills; `None` cuts from `image` itself.
pub fn make_sample<R: Rng + ?Sized>(
    image: &Image,
    saliency: Option<&Mask>,
    donor: Option<&Image>,
    cfg: &DefectConfig,
    rng: &mut R,
) -> Result<SynthSample> {
    Ok(make_sample_with_recipe(image, saliency, donor, cfg, rng)?.0)
}

pub fn make_sample_with_recipe<R: Rng + ?Sized>(
    image: &Image,
    saliency: Option<&Mask>,
    donor: Option<&Image>,
    cfg: &DefectConfig,
    rng: &mut R,
) -> Result<(SynthSample, Option<SampleRecipe>)> {
    cfg.validate()?;
    let frame = (image.height(), image.width());
    if let Some(d) = donor {
        if d.channels() != image.channels() {
            return Err(Error::Dimension(format!(
                "donor has {} channels, image has {}",
                d.channels(),
                image.channels()
            )));
        }
    }
    if rng.random_bool(cfg.normal_fraction) {
        let sample = SynthSample {
            image: image.clone(),
            mask: Mask::empty(frame.0, frame.1),
            label: 0,
        };
        return Ok((sample, None));
    }
    let si = rng.random_range(0..cfg.shapes.len());
    let fi = rng.random_range(0..cfg.fills.len());
    let (shape_kind, fill_kind) = (cfg.shapes[si], cfg.fills[fi]);
    let fuse = cfg.fuse_modes[rng.random_range(0..cfg.fuse_modes.len())];
    let beta = match fuse {
        FuseMode::Paste => 1.0,
        FuseMode::Blend => shapes::uniform(rng, cfg.blend_weight),
    };
    let donor = donor.unwrap_or(image);

    let mut last_err = None;
    for _ in 0..RETRY_BUDGET {
        let shape = gen_shape(shape_kind, cfg, frame, rng)?;
        let offset = match place_defect(&shape, frame, saliency, rng) {
            Ok(o) => o,
            Err(e @ Error::Placement(_)) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let fill = match fill_kind {
            FillKind::Noise => {
                let mean = shapes::uniform(rng, cfg.noise_mean);
                let fluct = shapes::uniform(rng, cfg.noise_fluctuation);
                gen_noise_fill(&shape, image.channels(), mean, fluct, rng)?
            }
            FillKind::CutPaste => match gen_cutpaste_fill(&shape, donor, rng) {
                Ok(f) => f,
                Err(e @ Error::Size(_)) => {
                    last_err = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        let fused = fuse_defect(image, &fill, &shape, offset, fuse, beta)?;
        let mask = placed_mask(&shape, frame, offset)?;
        let label = 1 + (si * cfg.fills.len() + fi) as u32;
        let recipe = SampleRecipe {
            shape: shape_kind,
            fill: fill_kind,
            fuse,
            beta,
            offset,
        };
        return Ok((
            SynthSample {
                image: fused,
                mask,
                label,
            },
            Some(recipe),
        ));
    }
    Err(last_err.unwrap_or_else(|| Error::Placement("no placement found".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(h: usize, w: usize) -> Image {
        let data = (0..h * w * 3).map(|i| (i * 7 % 251) as u8).collect();
        Image::new(h, w, 3, data).unwrap()
    }

    #[test]
    fn normal_path_returns_the_input() {
        let img = gradient(32, 32);
        let cfg = DefectConfig {
            normal_fraction: 0.999_999,
            ..DefectConfig::default()
        };
        let mut rng = sample_rng(1, 0);
        let s = make_sample(&img, None, None, &cfg, &mut rng).unwrap();
        assert_eq!(s.label, 0);
        assert_eq!(s.image, img);
        assert!(s.mask.is_empty());
    }

    #[test]
    fn seeded_samples_are_byte_identical() {
        let img = gradient(48, 40);
        let cfg = DefectConfig::default();
        for i in 0..30 {
            let a = make_sample(&img, None, None, &cfg, &mut sample_rng(99, i)).unwrap();
            let b = make_sample(&img, None, None, &cfg, &mut sample_rng(99, i)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn labels_follow_the_taxonomy_and_masks_match() {
        let img = gradient(64, 64);
        let cfg = DefectConfig::default();
        let mut hist = [0usize; 7];
        for i in 0..700 {
            let (s, recipe) = make_sample_with_recipe(&img, None, None, &cfg, &mut sample_rng(5, i)).unwrap();
            hist[s.label as usize] += 1;
            assert_eq!(s.mask.is_empty(), s.label == 0);
            match recipe {
                None => assert_eq!(s.label, 0),
                Some(r) => {
                    assert_eq!(Some(s.label), cfg.label(r.shape, r.fill));
                    // pixels off the mask are untouched
                    for (i, &m) in s.mask.data().iter().enumerate() {
                        if !m {
                            assert_eq!(&s.image.data()[i * 3..i * 3 + 3], &img.data()[i * 3..i * 3 + 3]);
                        }
                    }
                }
            }
        }
        assert!(hist.iter().all(|&c| c > 0), "{hist:?}");
    }

    #[test]
    fn masks_stay_inside_saliency() {
        let img = gradient(40, 40);
        let mut sal = Mask::empty(40, 40);
        for y in 5..35 {
            for x in 10..40 {
                sal.set(y, x, true);
            }
        }
        let cfg = DefectConfig::default();
        for i in 0..200 {
            let s = make_sample(&img, Some(&sal), None, &cfg, &mut sample_rng(3, i)).unwrap();
            assert!(s.mask.is_subset_of(&sal));
        }
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let img = gradient(16, 16);
        let donor = Image::filled(16, 16, 1, 0).unwrap();
        let cfg = DefectConfig::default();
        assert!(make_sample(&img, None, Some(&donor), &cfg, &mut sample_rng(0, 0)).is_err());
    }
}
