//! Reproducible random streams.
//!
//! Every replicate draws from its own ChaCha8 stream whose 64-bit seed is
//! derived from the master seed and a path of indices (replicate, inner
//! replicate, ...) by SplitMix64 mixing. Results therefore depend only on
//! `(seed, path)`, never on which worker thread ran the replicate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Reserved path components for auxiliary streams.
pub const BOOTSTRAP_TAG: u64 = 0xB007_57A9;
pub const SEARCH_TAG: u64 = 0x5EA7_C4ED;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A master seed from which independent child streams are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// Child seed for path component `index`.
    pub fn child(self, index: u64) -> Seed {
        Seed(splitmix64(
            self.0 ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)),
        ))
    }

    /// Child seed for a whole path.
    pub fn path(self, indices: &[u64]) -> Seed {
        indices.iter().fold(self, |s, &i| s.child(i))
    }

    pub fn stream(self) -> Stream {
        Stream::seed_from_u64(self.0)
    }

    /// Stream for replicate `index`.
    pub fn replicate(self, index: u64) -> Stream {
        self.child(index).stream()
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Run `f` for replicates `0..reps` in parallel on the current rayon pool.
/// Output order is the replicate order.
pub fn replicate<T, F>(seed: Seed, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut Stream) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.replicate(i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Like [`replicate`] but for fallible replicate bodies; the first error in
/// replicate order is returned.
pub fn try_replicate<T, E, F>(seed: Seed, reps: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut Stream) -> Result<T, E> + Sync + Send,
{
    replicate(seed, reps, f).into_iter().collect()
}

/// Run `op` inside a dedicated pool with `threads` workers (0 = all cores).
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool");
    pool.install(op)
}
