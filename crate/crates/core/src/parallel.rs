//! Stream-split Monte Carlo execution.
//!
//! A run of `samples` draws is cut into a fixed number of streams. Stream
//! `i` owns a ChaCha8 generator seeded with the root seed and switched to
//! stream id `i` (`ChaCha8Rng::seed_from_u64(seed)` then `set_stream(i)`),
//! and draws `samples / streams` samples, the first `samples % streams`
//! streams taking one extra. Partial results are merged in stream order, so
//! the outcome depends only on `(seed, streams)` and not on the thread count
//! or on whether the `parallel` feature is enabled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default number of independent streams per Monte Carlo run.
pub const DEFAULT_STREAMS: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Streams run on the rayon pool (sequential when the `parallel`
    /// feature is off).
    #[default]
    Parallel,
    Sequential,
}

pub fn stream_rng(seed: u64, stream: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Samples assigned to `stream` out of `total` split over `streams`.
pub fn stream_quota(total: usize, streams: usize, stream: usize) -> usize {
    total / streams + usize::from(stream < total % streams)
}

/// `f(0), ..., f(streams - 1)` in order.
pub fn map_streams<T, F>(streams: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..streams).into_par_iter().map(f).collect()
        }
        _ => (0..streams).map(f).collect(),
    }
}
