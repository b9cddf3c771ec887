//! Patch feature sets and multi-hierarchy aggregation.

use crate::error::{Error, Result};
use crate::resample::{mean_pool, resize_bilinear};
use crate::tensor_io::{FeatureTensor, RawTensor};

/// Default local pooling window.
pub const DEFAULT_POOL_WINDOW: usize = 3;

/// A `height x width` grid of `dim`-wide patch vectors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchFeatureSet {
    height: usize,
    width: usize,
    dim: usize,
    data: Vec<f32>,
}

impl PatchFeatureSet {
    pub fn new(height: usize, width: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || dim == 0 {
            return Err(Error::Dimension(format!(
                "patch grid {height}x{width} with dim {dim} has a zero extent"
            )));
        }
        if data.len() != height * width * dim {
            return Err(Error::Length {
                expected: height * width * dim,
                actual: data.len(),
                unit: "patch values",
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite patch feature".into()));
        }
        Ok(Self {
            height,
            width,
            dim,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn vector(&self, h: usize, w: usize) -> &[f32] {
        let i = h * self.width + w;
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// Stored as a `(height, width, dim)` tensor.
    pub fn to_raw(&self) -> RawTensor {
        RawTensor::new(vec![self.height, self.width, self.dim], self.data.clone())
            .expect("patch set invariants imply a valid tensor")
    }

    pub fn from_raw(raw: RawTensor) -> Result<Self> {
        match *raw.dims() {
            [h, w, d] => Self::new(h, w, d, raw.into_parts().1),
            ref dims => Err(Error::Dimension(format!(
                "expected a (height, width, dim) patch tensor, found {dims:?}"
            ))),
        }
    }
}

/// Mean-pools both hierarchies, upsamples the deeper one to the shallower
/// one's grid, and concatenates channels per location.
pub fn aggregate_hierarchies(
    phi2: &FeatureTensor,
    phi3: &FeatureTensor,
    pool_window: usize,
) -> Result<PatchFeatureSet> {
    if pool_window == 0 || pool_window % 2 == 0 {
        return Err(Error::Parameter(format!(
            "pool window must be odd and positive, got {pool_window}"
        )));
    }
    if phi3.height() > phi2.height() || phi3.width() > phi2.width() {
        return Err(Error::Dimension(format!(
            "deeper hierarchy {}x{} is larger than shallower {}x{}",
            phi3.height(),
            phi3.width(),
            phi2.height(),
            phi2.width()
        )));
    }
    let (h, w) = (phi2.height(), phi2.width());
    let (c2, c3) = (phi2.channels(), phi3.channels());
    let dim = c2 + c3;

    let to_f64 = |p: &[f32]| p.iter().map(|&v| v as f64).collect::<Vec<_>>();
    let planes2: Vec<Vec<f64>> = (0..c2)
        .map(|c| mean_pool(&to_f64(phi2.plane(c)), h, w, pool_window))
        .collect();
    let planes3: Vec<Vec<f64>> = (0..c3)
        .map(|c| {
            let pooled = mean_pool(&to_f64(phi3.plane(c)), phi3.height(), phi3.width(), pool_window);
            resize_bilinear(&pooled, phi3.height(), phi3.width(), h, w)
        })
        .collect();

    let mut data = Vec::with_capacity(h * w * dim);
    for loc in 0..h * w {
        data.extend(planes2.iter().map(|p| p[loc] as f32));
        data.extend(planes3.iter().map(|p| p[loc] as f32));
    }
    PatchFeatureSet::new(h, w, dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_shape_follows_shallow_grid() {
        let phi2 = FeatureTensor::filled(128, 32, 32, 0.25).unwrap();
        let phi3 = FeatureTensor::filled(256, 16, 16, -1.0).unwrap();
        let set = aggregate_hierarchies(&phi2, &phi3, 3).unwrap();
        assert_eq!((set.height(), set.width(), set.dim()), (32, 32, 384));
        // constants pass through pooling and interpolation
        for v in set.vectors() {
            assert!(v[..128].iter().all(|&x| x == 0.25));
            assert!(v[128..].iter().all(|&x| x == -1.0));
        }
    }

    #[test]
    fn single_pixel_deep_map_broadcasts() {
        let phi2 = FeatureTensor::new(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let phi3 = FeatureTensor::new(1, 1, 1, vec![5.0]).unwrap();
        let set = aggregate_hierarchies(&phi2, &phi3, 1).unwrap();
        // scalar-loop oracle: row-major phi2 value paired with the lone phi3 value
        let mut expected = Vec::new();
        for h in 0..2 {
            for w in 0..2 {
                expected.push(vec![phi2.get(0, h, w), 5.0]);
            }
        }
        let got: Vec<Vec<f32>> = set.vectors().map(|v| v.to_vec()).collect();
        assert_eq!(got, expected);
        assert_eq!(got[0], vec![1.0, 5.0]);
        assert_eq!(got[3], vec![4.0, 5.0]);
    }

    #[test]
    fn deeper_map_larger_than_shallow_is_rejected() {
        let phi2 = FeatureTensor::filled(1, 4, 4, 0.0).unwrap();
        let phi3 = FeatureTensor::filled(1, 8, 2, 0.0).unwrap();
        assert!(matches!(
            aggregate_hierarchies(&phi2, &phi3, 3),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn even_window_is_rejected() {
        let t = FeatureTensor::filled(1, 2, 2, 0.0).unwrap();
        assert!(matches!(
            aggregate_hierarchies(&t, &t, 2),
            Err(Error::Parameter(_))
        ));
        assert!(aggregate_hierarchies(&t, &t, 0).is_err());
    }

    #[test]
    fn patch_set_tensor_roundtrip() {
        let set = PatchFeatureSet::new(2, 3, 2, (0..12).map(|v| v as f32).collect()).unwrap();
        let back = PatchFeatureSet::from_raw(set.to_raw()).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.vector(1, 2), &[10.0, 11.0]);
    }
}
