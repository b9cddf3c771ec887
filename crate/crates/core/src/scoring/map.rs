use crate::error::{Error, Result};
use crate::resample::{gaussian_blur, resize_bilinear};
use crate::tensor_io::RawTensor;

/// A `height x width` grid of finite scores, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ScoreMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!("empty score map {height}x{width}")));
        }
        if values.len() != height * width {
            return Err(Error::Length {
                expected: height * width,
                actual: values.len(),
                unit: "scores",
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite score".into()));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Stored as a 2-d `f32` tensor.
    pub fn to_raw(&self) -> Result<RawTensor> {
        RawTensor::new(
            vec![self.height, self.width],
            self.values.iter().map(|&v| v as f32).collect(),
        )
    }

    pub fn from_raw(raw: RawTensor) -> Result<Self> {
        match *raw.dims() {
            [h, w] => Self::new(h, w, raw.data().iter().map(|&v| v as f64).collect()),
            ref dims => Err(Error::Dimension(format!(
                "expected a 2-d score map, found {dims:?}"
            ))),
        }
    }
}

/// Bilinear upsampling (half-pixel centers) followed by an optional
/// Gaussian blur; `smoothing_sigma == 0` disables the blur.
pub fn upsample_map(
    grid: &ScoreMap,
    out_h: usize,
    out_w: usize,
    smoothing_sigma: f64,
) -> Result<ScoreMap> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Parameter(format!(
            "output map {out_h}x{out_w} has a zero dimension"
        )));
    }
    if out_h < grid.height || out_w < grid.width {
        return Err(Error::Parameter(format!(
            "output map {out_h}x{out_w} is smaller than the {}x{} grid",
            grid.height, grid.width
        )));
    }
    if !(smoothing_sigma.is_finite() && smoothing_sigma >= 0.0) {
        return Err(Error::Parameter(format!(
            "smoothing sigma must be non-negative, got {smoothing_sigma}"
        )));
    }
    let up = resize_bilinear(&grid.values, grid.height, grid.width, out_h, out_w);
    let values = gaussian_blur(&up, out_h, out_w, smoothing_sigma);
    ScoreMap::new(out_h, out_w, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_becomes_constant() {
        let g = ScoreMap::new(1, 1, vec![3.25]).unwrap();
        let m = upsample_map(&g, 5, 7, 0.0).unwrap();
        assert!(m.values().iter().all(|&v| v == 3.25));
    }

    #[test]
    fn constant_grid_stays_constant_under_blur() {
        let g = ScoreMap::new(3, 3, vec![-0.5; 9]).unwrap();
        for sigma in [0.0, 0.5, 2.0, 4.0] {
            let m = upsample_map(&g, 12, 9, sigma).unwrap();
            assert!(m.values().iter().all(|&v| (v + 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn checkerboard_matches_tent_weight_oracle() {
        let g = ScoreMap::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let m = upsample_map(&g, 4, 4, 0.0).unwrap();
        // oracle: clamp the half-pixel source coordinate, then weight every
        // source cell by the separable tent max(0, 1 - |s - i|)
        let src = |y: usize, x: usize| g.get(y, x);
        for oy in 0..4 {
            for ox in 0..4 {
                let sy = ((oy as f64 + 0.5) * 0.5 - 0.5).clamp(0.0, 1.0);
                let sx = ((ox as f64 + 0.5) * 0.5 - 0.5).clamp(0.0, 1.0);
                let mut v = 0.0;
                for iy in 0..2 {
                    for ix in 0..2 {
                        let w = (1.0 - (sy - iy as f64).abs()).max(0.0)
                            * (1.0 - (sx - ix as f64).abs()).max(0.0);
                        v += w * src(iy, ix);
                    }
                }
                assert!((m.get(oy, ox) - v).abs() < 1e-12, "({oy},{ox})");
            }
        }
        // spot values: corners copy the source, center cells mix to 0.5 +/- 0.125
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 3), 1.0);
        assert!((m.get(1, 1) - 0.375).abs() < 1e-12);
        assert!((m.get(1, 2) - 0.625).abs() < 1e-12);
    }

    #[test]
    fn bad_output_dims() {
        let g = ScoreMap::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(matches!(upsample_map(&g, 0, 4, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(upsample_map(&g, 1, 4, 0.0), Err(Error::Parameter(_))));
        assert!(upsample_map(&g, 4, 4, -1.0).is_err());
    }
}
