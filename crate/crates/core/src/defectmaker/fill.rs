use rand::Rng;

use super::pixels::Image;
use super::shapes::ShapeMask;
use crate::error::{Error, Result};

/// Uniform noise in `[mean - fluctuation, mean + fluctuation]`, rounded and
/// clamped to `0..=255`, over the shape's bounding box.
pub fn gen_noise_fill<R: Rng + ?Sized>(
    shape: &ShapeMask,
    channels: usize,
    mean: f64,
    fluctuation: f64,
    rng: &mut R,
) -> Result<Image> {
    if !(0.0..=255.0).contains(&mean) {
        return Err(Error::Parameter(format!(
            "noise mean {mean} is outside the pixel range [0, 255]"
        )));
    }
    if !(fluctuation.is_finite() && fluctuation >= 0.0) {
        return Err(Error::Parameter(format!(
            "noise fluctuation must be non-negative, got {fluctuation}"
        )));
    }
    let b = shape.bbox();
    let data = (0..b.h * b.w * channels)
        .map(|_| {
            let v = if fluctuation == 0.0 {
                mean
            } else {
                mean + fluctuation * (2.0 * rng.random::<f64>() - 1.0)
            };
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::new(b.h, b.w, channels, data)
}

/// A crop of `donor` at a uniformly random position, sized to the shape's
/// bounding box. No resizing or rotation.
pub fn gen_cutpaste_fill<R: Rng + ?Sized>(
    shape: &ShapeMask,
    donor: &Image,
    rng: &mut R,
) -> Result<Image> {
    let b = shape.bbox();
    if b.h > donor.height() || b.w > donor.width() {
        return Err(Error::Size(format!(
            "donor {}x{} is smaller than the {}x{} shape box",
            donor.height(),
            donor.width(),
            b.h,
            b.w
        )));
    }
    let (y, x) = cutpaste_origin(b.h, b.w, donor, rng);
    donor.crop(y, x, b.h, b.w)
}

pub(crate) fn cutpaste_origin<R: Rng + ?Sized>(
    h: usize,
    w: usize,
    donor: &Image,
    rng: &mut R,
) -> (usize, usize) {
    (
        rng.random_range(0..=donor.height() - h),
        rng.random_range(0..=donor.width() - w),
    )
}
