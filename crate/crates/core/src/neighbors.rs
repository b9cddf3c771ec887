//! Exact nearest-neighbor search over row-major `f32` matrices.
//!
//! Distances accumulate in `f64`. Results are ordered by `(distance, index)`,
//! so equal distances resolve to the lowest row index.

/// Squared Euclidean distance with `f64` accumulation.
#[inline]
pub fn squared_l2(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            let d = x[l] as f64 - y[l] as f64;
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        let d = *x as f64 - *y as f64;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn l2(a: &[f32], b: &[f32]) -> f64 {
    squared_l2(a, b).sqrt()
}

/// One search result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub index: usize,
    pub distance: f64,
}

/// Bounded sorted buffer keeping the `k` smallest `(sq_dist, index)` pairs.
struct TopK {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    /// Candidates must arrive in increasing index order.
    #[inline]
    fn offer(&mut self, sq: f64, index: usize) {
        if self.items.len() == self.k && sq >= self.worst() {
            return;
        }
        let pos = self.items.partition_point(|&(d, _)| d <= sq);
        self.items.insert(pos, (sq, index));
        self.items.truncate(self.k);
    }

    fn into_hits(self) -> Vec<Hit> {
        self.items
            .into_iter()
            .map(|(sq, index)| Hit {
                index,
                distance: sq.sqrt(),
            })
            .collect()
    }
}

/// The `k` nearest rows of `rows` (each `dim` wide) to `query`, optionally
/// skipping one row. Returns fewer than `k` hits only when the matrix is
/// too small.
pub fn k_nearest(
    query: &[f32],
    rows: &[f32],
    dim: usize,
    k: usize,
    exclude: Option<usize>,
) -> Vec<Hit> {
    assert!(dim > 0 && query.len() == dim);
    if k == 0 {
        return Vec::new();
    }
    let mut top = TopK::new(k);
    for (i, row) in rows.chunks_exact(dim).enumerate() {
        if Some(i) == exclude {
            continue;
        }
        top.offer(squared_l2(query, row), i);
    }
    top.into_hits()
}

/// The single nearest row; `rows` must be non-empty.
pub fn nearest(query: &[f32], rows: &[f32], dim: usize) -> Hit {
    assert!(dim > 0 && query.len() == dim && rows.len() >= dim);
    let mut best = (f64::INFINITY, 0usize);
    for (i, row) in rows.chunks_exact(dim).enumerate() {
        let sq = squared_l2(query, row);
        if sq < best.0 {
            best = (sq, i);
        }
    }
    Hit {
        index: best.1,
        distance: best.0.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_resolve_to_lowest_index() {
        // 1-D rows {1, 3, 1, 3}; query 2 is equidistant from all
        let rows = [1.0f32, 3.0, 1.0, 3.0];
        let hits = k_nearest(&[2.0], &rows, 1, 3, None);
        let idx: Vec<usize> = hits.iter().map(|h| h.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        assert_eq!(nearest(&[2.0], &rows, 1).index, 0);
    }

    #[test]
    fn exclusion_skips_only_that_row() {
        let rows = [0.0f32, 0.0, 5.0];
        let hits = k_nearest(&[0.0], &rows, 1, 2, Some(0));
        assert_eq!(hits[0].index, 1);
        assert_eq!(hits[0].distance, 0.0);
        assert_eq!(hits[1].index, 2);
    }

    #[test]
    fn squared_l2_matches_scalar_sum() {
        let a: Vec<f32> = (0..13).map(|i| i as f32 * 0.5).collect();
        let b: Vec<f32> = (0..13).map(|i| (i * i) as f32 * 0.1).collect();
        let naive: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
            .sum();
        assert!((squared_l2(&a, &b) - naive).abs() < 1e-9);
    }

    #[test]
    fn short_matrix_returns_what_exists() {
        let rows = [0.0f32, 1.0];
        assert_eq!(k_nearest(&[0.0], &rows, 1, 5, None).len(), 2);
    }
}
