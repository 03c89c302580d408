//! Trial-level parallelism with a sequential fallback.
//!
//! Every randomized trial draws from its own ChaCha stream keyed by
//! `(master seed, trial index)`, so results never depend on scheduling and the
//! sequential and parallel paths produce identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is disabled.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Independent generator for trial `stream` under `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `f(0), f(1), ..., f(count - 1)` in index order.
pub fn map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
        _ => (0..count).map(f).collect(),
    }
}

/// The lowest index in `range` for which `f` returns `Some`, with its value.
///
/// The parallel path may evaluate indices past the winner but always reports
/// the lowest one, matching the sequential path.
pub fn find_first<T, F>(exec: Execution, range: std::ops::Range<usize>, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => range
            .into_par_iter()
            .find_map_first(|i| f(i).map(|v| (i, v))),
        _ => range.into_iter().find_map(|i| f(i).map(|v| (i, v))),
    }
}
