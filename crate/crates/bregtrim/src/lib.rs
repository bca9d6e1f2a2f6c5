//! File formats, experiments and the `bregtrim` command line on top of
//! [`bregtrim_core`].
//!
//! - [`io`]: dataset CSV (`x1,...,xd[,label]`), label columns, matrix files,
//!   atomic writes.
//! - [`report`]: the JSON file written by `bregtrim fit`.
//! - [`curves`]: cost-curve CSV and SVG export.
//! - [`experiments`]: divergence comparison by NMI, selection on a preset,
//!   and the two-atom breakdown sweep.

pub mod cli;
pub mod curves;
mod error;
pub mod experiments;
pub mod io;
pub mod report;

pub use bregtrim_core as core;
pub use error::{Error, Result};

/// Environment variable giving the default worker thread count.
pub const THREADS_ENV: &str = "BREGTRIM_THREADS";

/// Sizes the global rayon pool from `threads`, falling back to
/// `BREGTRIM_THREADS` and then to rayon's own default. Results do not depend
/// on the thread count.
pub fn init_threads(threads: Option<usize>) -> Result<()> {
    let from_env = || -> Result<Option<usize>> {
        match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
            _ => Ok(None),
        }
    };
    let count = match threads {
        Some(t) => Some(t),
        None => from_env()?,
    };
    if let Some(t) = count {
        if t == 0 {
            return Err(Error::Usage("thread count must be positive".into()));
        }
        // a pool that already exists (tests, repeated calls) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}
