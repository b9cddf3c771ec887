//! Greedy k-center (farthest-point) subsampling of a memory bank.

use rayon::prelude::*;

use crate::bank::MemoryBank;
use crate::error::{Error, Result};
use crate::neighbors::squared_l2;

/// Indices kept by [`greedy_kcenter`], sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetSelection {
    pub indices: Vec<usize>,
    pub proportion: f64,
    pub seed_index: usize,
}

/// `max(1, round(proportion * n))`.
pub fn target_size(proportion: f64, n: usize) -> usize {
    ((proportion * n as f64).round() as usize).clamp(1, n)
}

/// Selection order of farthest-point greedy: starts at `seed_index`, then
/// repeatedly adds the entry farthest from the selected set (ties to the
/// lowest index). Also returns the final cover radius.
pub fn farthest_point_order(
    bank: &MemoryBank,
    count: usize,
    seed_index: usize,
) -> Result<(Vec<usize>, f64)> {
    let n = bank.len();
    if n == 0 {
        return Err(Error::Empty("cannot subsample an empty bank".into()));
    }
    if seed_index >= n {
        return Err(Error::Parameter(format!(
            "seed index {seed_index} out of range for bank of {n}"
        )));
    }
    let count = count.clamp(1, n);
    let mut order = Vec::with_capacity(count);
    let mut min_sq = vec![f64::INFINITY; n];
    let mut selected = vec![false; n];
    let mut current = seed_index;
    loop {
        order.push(current);
        selected[current] = true;
        let center = bank.row(current);
        min_sq
            .par_iter_mut()
            .zip(bank.data().par_chunks_exact(bank.dim()))
            .for_each(|(m, row)| {
                let d = squared_l2(center, row);
                if d < *m {
                    *m = d;
                }
            });
        if order.len() == count {
            let radius = min_sq.iter().copied().fold(0.0, f64::max).sqrt();
            return Ok((order, radius));
        }
        // duplicates of selected entries sit at distance 0 but stay eligible
        current = min_sq
            .iter()
            .enumerate()
            .filter(|&(i, _)| !selected[i])
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            })
            .0;
    }
}

pub fn greedy_kcenter(
    bank: &MemoryBank,
    proportion: f64,
    seed_index: usize,
) -> Result<CoresetSelection> {
    if !(proportion > 0.0 && proportion <= 1.0) {
        return Err(Error::Parameter(format!(
            "proportion must lie in (0, 1], got {proportion}"
        )));
    }
    if bank.is_empty() {
        return Err(Error::Empty("cannot subsample an empty bank".into()));
    }
    let n = bank.len();
    let target = target_size(proportion, n);
    let mut indices = if target == n {
        if seed_index >= n {
            return Err(Error::Parameter(format!(
                "seed index {seed_index} out of range for bank of {n}"
            )));
        }
        (0..n).collect()
    } else {
        farthest_point_order(bank, target, seed_index)?.0
    };
    indices.sort_unstable();
    Ok(CoresetSelection {
        indices,
        proportion,
        seed_index,
    })
}

/// Largest distance from any bank entry to its nearest selected entry.
pub fn cover_radius(bank: &MemoryBank, selected: &[usize]) -> f64 {
    bank.rows()
        .map(|row| {
            selected
                .iter()
                .map(|&s| squared_l2(row, bank.row(s)))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// Applies a selection, keeping bank order.
pub fn apply(bank: &MemoryBank, sel: &CoresetSelection) -> Result<MemoryBank> {
    bank.select(&sel.indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bank1d(v: &[f32]) -> MemoryBank {
        MemoryBank::new(1, v.to_vec()).unwrap()
    }

    #[test]
    fn full_proportion_keeps_everything() {
        let b = bank1d(&[3.0, 1.0, 2.0, 9.0]);
        let s = greedy_kcenter(&b, 1.0, 0).unwrap();
        assert_eq!(s.indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn picks_the_far_end() {
        let b = bank1d(&[0.0, 1.0, 10.0]);
        let s = greedy_kcenter(&b, 2.0 / 3.0, 0).unwrap();
        assert_eq!(s.indices, vec![0, 2]);
        // exhaustive check: from seed 0 the farthest remaining point is index 2
        let far = (1..3)
            .max_by(|&a, &c| b.row(a)[0].abs().total_cmp(&b.row(c)[0].abs()))
            .unwrap();
        assert_eq!(far, 2);
    }

    #[test]
    fn single_target_is_the_seed() {
        let b = bank1d(&[0.0, 1.0, 10.0, 4.0]);
        let s = greedy_kcenter(&b, 0.01, 3).unwrap();
        assert_eq!(s.indices, vec![3]);
        assert_eq!(target_size(0.01, 4), 1);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let b = bank1d(&[0.0, -5.0, 5.0]);
        let (order, r) = farthest_point_order(&b, 2, 0).unwrap();
        assert_eq!(order, vec![0, 1]);
        assert_eq!(r, 5.0);
    }

    #[test]
    fn invalid_inputs() {
        let b = bank1d(&[0.0, 1.0]);
        assert!(greedy_kcenter(&b, 0.0, 0).is_err());
        assert!(greedy_kcenter(&b, 1.5, 0).is_err());
        assert!(greedy_kcenter(&b, 0.5, 2).is_err());
        assert!(greedy_kcenter(&b, 1.0, 2).is_err());
    }

    #[test]
    fn apply_keeps_bank_order() {
        let b = bank1d(&[0.0, 1.0, 10.0]);
        let s = greedy_kcenter(&b, 2.0 / 3.0, 0).unwrap();
        assert_eq!(apply(&b, &s).unwrap().data(), &[0.0, 10.0]);
    }

    proptest! {
        #[test]
        fn cover_radius_shrinks_as_proportion_grows(
            pts in proptest::collection::vec((-100i32..100, -100i32..100), 4..30),
            seed in 0usize..8,
        ) {
            let data: Vec<f32> = pts.iter().flat_map(|&(x, y)| [x as f32, y as f32]).collect();
            let b = MemoryBank::new(2, data).unwrap();
            let mut prev = f64::INFINITY;
            for p in [0.1, 0.25, 0.5, 0.75, 1.0] {
                let s = greedy_kcenter(&b, p, seed % b.len()).unwrap();
                let r = cover_radius(&b, &s.indices);
                prop_assert!(r <= prev);
                prev = r;
            }
        }

        #[test]
        fn selection_is_deterministic_and_sorted(
            v in proptest::collection::vec(-100i32..100, 4..40),
            p in 0.05f64..1.0,
        ) {
            let b = MemoryBank::new(1, v.iter().map(|&x| x as f32).collect()).unwrap();
            let a = greedy_kcenter(&b, p, 0).unwrap();
            let c = greedy_kcenter(&b, p, 0).unwrap();
            prop_assert_eq!(&a, &c);
            prop_assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(a.indices.len(), target_size(p, b.len()));
        }
    }
}
