//! Change-of-basis genetic algorithms over `Z2^n`.
//!
//! The crate provides bit-packed GF(2) linear algebra, words of elementary
//! matrices with an alignment crossover, Davidor's epistasis measure, a
//! generational GA that can search in transformed coordinates, a GA that
//! searches for good bases, and an experiment harness.

pub mod elemword;
pub mod epistasis;
pub mod error;
pub mod ga;
pub mod gf2;
pub mod harness;
pub mod problems;
pub mod search;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every seeded stream in the crate.
pub type Rng64 = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(0..n).map(f)` in index order, spread over the rayon pool when the
/// `parallel` feature is on.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
