//! Seeded randomness and deterministic work splitting.
//!
//! Every sampled routine draws from ChaCha8 seeded with `seed_from_u64(seed)`.
//! Work split across chunks gives chunk `w` its own ChaCha stream number `w`
//! on the same key, so results depend only on `(seed, count)` and never on the
//! number of worker threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::set::{low_mask, ItemSet, LargeSet};

/// Exact enumeration or a seeded sample of `count` draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

impl Mode {
    pub fn sampled(count: usize, seed: u64) -> Self {
        Mode::Sampled { count, seed }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Exact)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Chunk count used for sampled loops; fixed so results are thread-independent.
pub(crate) const SAMPLE_CHUNKS: usize = 64;

/// Sizes of the `SAMPLE_CHUNKS` chunks that `count` draws are split into.
pub(crate) fn chunk_sizes(count: usize) -> Vec<usize> {
    let base = count / SAMPLE_CHUNKS;
    let extra = count % SAMPLE_CHUNKS;
    (0..SAMPLE_CHUNKS).map(|w| base + usize::from(w < extra)).collect()
}

pub fn random_mask(rng: &mut impl Rng, n: usize) -> ItemSet {
    ItemSet::from_raw(rng.gen::<u64>() & low_mask(n), n)
}

pub fn random_large(rng: &mut impl Rng, n: usize) -> LargeSet {
    LargeSet::from_fn(n, |_| rng.gen::<bool>())
}

pub fn random_of_size(rng: &mut impl Rng, n: usize, size: usize) -> LargeSet {
    LargeSet::from_items(n, index::sample(rng, n, size).into_iter().collect::<Vec<_>>())
}

/// Runs `f(chunk_index)` for `0..chunks`, in parallel when enabled, returning
/// results in chunk order.
pub(crate) fn map_chunks<T, F>(chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, 3).gen();
        let b: u64 = stream_rng(7, 3).gen();
        let c: u64 = stream_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn chunk_sizes_cover_count() {
        assert_eq!(chunk_sizes(1000).iter().sum::<usize>(), 1000);
        assert_eq!(chunk_sizes(3).iter().sum::<usize>(), 3);
    }

    #[test]
    fn random_of_size_has_requested_size() {
        let mut r = rng(1);
        for size in [0, 1, 17, 64] {
            assert_eq!(random_of_size(&mut r, 64, size).len(), size);
        }
    }
}
