//! Mapping many reads at once.
//!
//! With the `parallel` feature (default) reads are spread over a rayon pool;
//! without it everything runs on the calling thread. Either way results come
//! back in input order, so output does not depend on the worker count.

use crate::mapper::{Mapper, MappingResult};
use crate::seq::Read;

pub fn map_batch(reads: &[Read], mapper: &Mapper<'_>) -> Vec<MappingResult> {
    #[cfg(feature = "parallel")]
    {
        map_batch_parallel(reads, mapper)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_batch_sequential(reads, mapper)
    }
}

pub fn map_batch_sequential(reads: &[Read], mapper: &Mapper<'_>) -> Vec<MappingResult> {
    reads.iter().map(|r| mapper.map(r)).collect()
}

#[cfg(feature = "parallel")]
pub fn map_batch_parallel(reads: &[Read], mapper: &Mapper<'_>) -> Vec<MappingResult> {
    use rayon::prelude::*;
    reads.par_iter().with_min_len(64).map(|r| mapper.map(r)).collect()
}

/// Runs `f` with `threads` workers available to [`map_batch`]. Zero means the
/// rayon default. Without the `parallel` feature `f` simply runs inline.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> crate::Result<R> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}
