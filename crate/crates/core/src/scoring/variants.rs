//! Baseline neighbor-based outlier scores.
//!
//! * KNN: mean distance to the `K` nearest entries.
//! * Kth-NN: distance to the `K`-th nearest entry.
//! * LOF (Breunig et al.): with `kdist(o)` the distance from bank entry `o`
//!   to its `K`-th nearest other entry and
//!   `reach(a, o) = max(kdist(o), ||a - o||)`, the local reachability density
//!   is `lrd(a) = 1 / mean_{o in N_K(a)} reach(a, o)`; the score is
//!   `mean_{o in N_K(f)} lrd(o) / lrd(f)`.
//! * LDOF (Zhang et al.): mean distance from `f` to its `K` neighbors divided
//!   by the mean pairwise distance among those neighbors.
//!
//! Neighborhoods hold exactly `K` entries, ties broken by lowest index.
//! Zero reachability means and zero LDOF denominators are floored at
//! [`EPSILON`].

use rayon::prelude::*;

use crate::bank::MemoryBank;
use crate::error::{Error, Result};
use crate::neighbors::{k_nearest, l2};

pub const EPSILON: f64 = 1e-12;

fn check_k(k: usize, lo: usize, hi: usize, what: &str) -> Result<()> {
    if k < lo || k > hi {
        return Err(Error::Parameter(format!(
            "{what} needs {lo} <= K <= {hi}, got {k}"
        )));
    }
    Ok(())
}

pub(crate) fn knn_unchecked(f: &[f32], bank: &MemoryBank, k: usize) -> f64 {
    let hits = k_nearest(f, bank.data(), bank.dim(), k, None);
    hits.iter().map(|h| h.distance).sum::<f64>() / k as f64
}

pub(crate) fn kthnn_unchecked(f: &[f32], bank: &MemoryBank, k: usize) -> f64 {
    k_nearest(f, bank.data(), bank.dim(), k, None)[k - 1].distance
}

pub(crate) fn ldof_unchecked(f: &[f32], bank: &MemoryBank, k: usize) -> f64 {
    let hits = k_nearest(f, bank.data(), bank.dim(), k, None);
    let inner = hits.iter().map(|h| h.distance).sum::<f64>() / k as f64;
    let mut pair_sum = 0.0;
    for (a, ha) in hits.iter().enumerate() {
        for hb in &hits[a + 1..] {
            pair_sum += l2(bank.row(ha.index), bank.row(hb.index));
        }
    }
    let pairs = (k * (k - 1) / 2) as f64;
    inner / (pair_sum / pairs).max(EPSILON)
}

/// Mean distance to the `k` nearest bank entries.
pub fn knn_score(f: &[f32], bank: &MemoryBank, k: usize) -> Result<f64> {
    bank.check_query(f)?;
    check_k(k, 1, bank.len(), "knn")?;
    Ok(knn_unchecked(f, bank, k))
}

/// Distance to the `k`-th nearest bank entry.
pub fn kthnn_score(f: &[f32], bank: &MemoryBank, k: usize) -> Result<f64> {
    bank.check_query(f)?;
    check_k(k, 1, bank.len(), "kth-nn")?;
    Ok(kthnn_unchecked(f, bank, k))
}

/// Local distance-based outlier factor; needs `k >= 2` for pairwise terms.
pub fn ldof_score(f: &[f32], bank: &MemoryBank, k: usize) -> Result<f64> {
    bank.check_query(f)?;
    check_k(k, 2, bank.len(), "ldof")?;
    Ok(ldof_unchecked(f, bank, k))
}

/// Local outlier factor of a query. Fits the bank statistics on every call;
/// use [`LofModel`] to score many queries.
pub fn lof_score(f: &[f32], bank: &MemoryBank, k: usize) -> Result<f64> {
    LofModel::fit(bank, k)?.score(f, bank)
}

/// Per-entry `k`-distances and reachability densities of a bank.
///
/// Scoring must use the same bank the model was fitted on.
#[derive(Debug, Clone)]
pub struct LofModel {
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofModel {
    pub fn fit(bank: &MemoryBank, k: usize) -> Result<Self> {
        let n = bank.len();
        check_k(k, 1, n.saturating_sub(1), "lof")?;
        let dim = bank.dim();
        let neigh: Vec<Vec<(usize, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                k_nearest(bank.row(i), bank.data(), dim, k, Some(i))
                    .into_iter()
                    .map(|h| (h.index, h.distance))
                    .collect()
            })
            .collect();
        let k_distance: Vec<f64> = neigh.iter().map(|nb| nb[k - 1].1).collect();
        let lrd = neigh
            .iter()
            .map(|nb| {
                let reach = nb
                    .iter()
                    .map(|&(o, d)| d.max(k_distance[o]))
                    .sum::<f64>()
                    / k as f64;
                1.0 / reach.max(EPSILON)
            })
            .collect();
        Ok(Self {
            k,
            k_distance,
            lrd,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k_distance(&self) -> &[f64] {
        &self.k_distance
    }

    pub fn lrd(&self) -> &[f64] {
        &self.lrd
    }

    pub fn score(&self, f: &[f32], bank: &MemoryBank) -> Result<f64> {
        if bank.len() != self.lrd.len() {
            return Err(Error::Consistency(format!(
                "LOF model fitted on {} entries, bank has {}",
                self.lrd.len(),
                bank.len()
            )));
        }
        bank.check_query(f)?;
        Ok(self.score_unchecked(f, bank))
    }

    pub(crate) fn score_unchecked(&self, f: &[f32], bank: &MemoryBank) -> f64 {
        let hits = k_nearest(f, bank.data(), bank.dim(), self.k, None);
        let k = self.k as f64;
        let reach = hits
            .iter()
            .map(|h| h.distance.max(self.k_distance[h.index]))
            .sum::<f64>()
            / k;
        let lrd_f = 1.0 / reach.max(EPSILON);
        let neigh_lrd = hits.iter().map(|h| self.lrd[h.index]).sum::<f64>() / k;
        neigh_lrd / lrd_f
    }
}
