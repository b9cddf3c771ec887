//! Patch and image anomaly scoring against a memory bank.
//!
//! The local-density scorer (LDKNN) retrieves the single nearest bank entry
//! `m` of a patch feature `f` and reports `||f - m|| - alpha * d_m`, where
//! `d_m` is the entry's learned local density. Baseline scorers (KNN, Kth-NN,
//! LOF, LDOF) live in [`variants`]. The image score is the maximum patch score.

mod map;
mod variants;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use map::{upsample_map, ScoreMap};
pub use variants::{kthnn_score, knn_score, ldof_score, lof_score, LofModel, EPSILON};

use crate::bank::{LocalDensityBank, MemoryBank};
use crate::error::{Error, Result};
use crate::features::PatchFeatureSet;
use crate::neighbors;

/// Per-patch scores on the feature grid.
pub type PatchScoreGrid = ScoreMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ldknn,
    Knn,
    KthNn,
    Lof,
    Ldof,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ldknn,
        Method::Knn,
        Method::KthNn,
        Method::Lof,
        Method::Ldof,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ldknn => "ldknn",
            Method::Knn => "knn",
            Method::KthNn => "kth-nn",
            Method::Lof => "lof",
            Method::Ldof => "ldof",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ldknn" => Ok(Method::Ldknn),
            "knn" => Ok(Method::Knn),
            "kth-nn" | "kthnn" => Ok(Method::KthNn),
            "lof" => Ok(Method::Lof),
            "ldof" => Ok(Method::Ldof),
            _ => Err(Error::Parameter(format!(
                "unknown method {s:?} (expected ldknn, knn, kth-nn, lof or ldof)"
            ))),
        }
    }
}

/// Scorer selection. `alpha` only affects LDKNN; `k` is ignored by LDKNN,
/// whose neighborhood size is fixed when densities are learned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerConfig {
    pub method: Method,
    pub k: usize,
    pub alpha: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            method: Method::Ldknn,
            k: 9,
            alpha: 1.0,
        }
    }
}

impl ScorerConfig {
    pub fn ldknn(alpha: f64) -> Self {
        Self {
            method: Method::Ldknn,
            k: 1,
            alpha,
        }
    }

    pub fn with_method(method: Method, k: usize) -> Self {
        Self {
            method,
            k,
            alpha: 0.0,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Parameter(format!(
                "alpha must be a non-negative real, got {}",
                self.alpha
            )));
        }
        let k = self.k;
        let ok = match self.method {
            Method::Ldknn => true,
            Method::Knn | Method::KthNn => (1..=n).contains(&k),
            Method::Lof => k >= 1 && k < n,
            Method::Ldof => k >= 2 && k <= n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "K = {k} is out of range for {} on a bank of {n}",
                self.method
            )))
        }
    }
}

/// Result of a 1-NN lookup in a density bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
    pub density: f32,
}

/// Nearest bank entry to `f` with its distance and stored local density.
pub fn nearest_neighbor(f: &[f32], bank: &LocalDensityBank) -> Result<Neighbor> {
    bank.bank().check_query(f)?;
    let hit = neighbors::nearest(f, bank.bank().data(), bank.dim());
    Ok(Neighbor {
        index: hit.index,
        distance: hit.distance,
        density: bank.density(hit.index),
    })
}

#[inline]
fn ldknn_from(nn: Neighbor, alpha: f64) -> f64 {
    nn.distance - alpha * nn.density as f64
}

/// `||f - m|| - alpha * d_m` for the nearest entry `m`. May be negative.
pub fn ldknn_score_patch(f: &[f32], bank: &LocalDensityBank, alpha: f64) -> Result<f64> {
    Ok(ldknn_from(nearest_neighbor(f, bank)?, alpha))
}

/// Image-level outcome: patch grid, max-pooled image score, optional pixel map.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyResult {
    pub patch_scores: PatchScoreGrid,
    pub image_score: f64,
    pub pixel_map: Option<ScoreMap>,
}

impl AnomalyResult {
    pub fn from_grid(patch_scores: PatchScoreGrid) -> Self {
        let image_score = patch_scores.max();
        Self {
            patch_scores,
            image_score,
            pixel_map: None,
        }
    }

    /// Attaches an upsampled pixel map.
    pub fn with_pixel_map(mut self, out_h: usize, out_w: usize, sigma: f64) -> Result<Self> {
        self.pixel_map = Some(upsample_map(&self.patch_scores, out_h, out_w, sigma)?);
        Ok(self)
    }
}

/// A configured scorer bound to a bank. Holds no mutable state, so one
/// detector can score many images concurrently.
#[derive(Debug)]
pub struct Detector<'a> {
    bank: &'a MemoryBank,
    densities: Option<&'a [f32]>,
    cfg: ScorerConfig,
    lof: Option<LofModel>,
}

impl<'a> Detector<'a> {
    pub fn new(bank: &'a LocalDensityBank, cfg: ScorerConfig) -> Result<Self> {
        Self::build(bank.bank(), Some(bank.densities()), cfg)
    }

    /// A detector for methods that need no learned densities.
    pub fn for_memory_bank(bank: &'a MemoryBank, cfg: ScorerConfig) -> Result<Self> {
        if cfg.method == Method::Ldknn {
            return Err(Error::Parameter(
                "ldknn needs a bank with learned local densities".into(),
            ));
        }
        Self::build(bank, None, cfg)
    }

    fn build(bank: &'a MemoryBank, densities: Option<&'a [f32]>, cfg: ScorerConfig) -> Result<Self> {
        cfg.validate(bank.len())?;
        let lof = match cfg.method {
            Method::Lof => Some(LofModel::fit(bank, cfg.k)?),
            _ => None,
        };
        Ok(Self {
            bank,
            densities,
            cfg,
            lof,
        })
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &MemoryBank {
        self.bank
    }

    pub fn score_patch(&self, f: &[f32]) -> Result<f64> {
        self.bank.check_query(f)?;
        Ok(self.score_checked(f))
    }

    fn score_checked(&self, f: &[f32]) -> f64 {
        let k = self.cfg.k;
        match self.cfg.method {
            Method::Ldknn => {
                let hit = neighbors::nearest(f, self.bank.data(), self.bank.dim());
                let density = self.densities.expect("ldknn detector has densities")[hit.index];
                ldknn_from(
                    Neighbor {
                        index: hit.index,
                        distance: hit.distance,
                        density,
                    },
                    self.cfg.alpha,
                )
            }
            Method::Knn => variants::knn_unchecked(f, self.bank, k),
            Method::KthNn => variants::kthnn_unchecked(f, self.bank, k),
            Method::Lof => self.lof.as_ref().expect("lof model fitted").score_unchecked(f, self.bank),
            Method::Ldof => variants::ldof_unchecked(f, self.bank, k),
        }
    }

    /// Scores every patch and takes the maximum as the image score.
    pub fn score_image(&self, patches: &PatchFeatureSet) -> Result<AnomalyResult> {
        if patches.dim() != self.bank.dim() {
            return Err(Error::Dimension(format!(
                "patch dim {} does not match bank dim {}",
                patches.dim(),
                self.bank.dim()
            )));
        }
        let scores: Vec<f64> = patches
            .data()
            .par_chunks_exact(patches.dim())
            .map(|f| self.score_checked(f))
            .collect();
        let grid = ScoreMap::new(patches.height(), patches.width(), scores)?;
        Ok(AnomalyResult::from_grid(grid))
    }
}

/// One-shot image scoring; prefer [`Detector`] when scoring many images.
pub fn score_image(
    patches: &PatchFeatureSet,
    bank: &LocalDensityBank,
    cfg: ScorerConfig,
) -> Result<AnomalyResult> {
    Detector::new(bank, cfg)?.score_image(patches)
}
