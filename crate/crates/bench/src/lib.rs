//! Seeded random fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reb_core::{MemoryBank, PatchFeatureSet};

/// `n` vectors of dimension `dim`, entries uniform in `[0, 1)`.
pub fn random_bank(n: usize, dim: usize, seed: u64) -> MemoryBank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.random::<f32>()).collect();
    MemoryBank::new(dim, data).expect("valid random bank")
}

/// An `h x w` patch grid with uniform entries.
pub fn random_patches(h: usize, w: usize, dim: usize, seed: u64) -> PatchFeatureSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..h * w * dim).map(|_| rng.random::<f32>()).collect();
    PatchFeatureSet::new(h, w, dim, data).expect("valid random patches")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_seeded() {
        assert_eq!(random_bank(10, 4, 1), random_bank(10, 4, 1));
        assert_ne!(random_bank(10, 4, 1), random_bank(10, 4, 2));
        let p = random_patches(3, 2, 5, 0);
        assert_eq!((p.height(), p.width(), p.dim()), (3, 2, 5));
    }
}
