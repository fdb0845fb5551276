//! Restart scheduling over a rayon pool.

use fermivqe_core::vqe::{run_restart, summarize, RunSummary, RunTrace, VqeConfig, VqeProblem};
use rayon::prelude::*;

use crate::{Error, Result};

/// Runs every restart of `config` on the current rayon pool. Traces come back
/// in restart order, so the result does not depend on the thread count.
pub fn run_restarts(problem: &VqeProblem, config: &VqeConfig) -> Result<(RunSummary, Vec<RunTrace>)> {
    config.validate()?;
    let traces = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, config, r))
        .collect::<fermivqe_core::Result<Vec<_>>>()?;
    let summary = summarize(&traces, config, problem.num_params(), problem.ground_energy())?;
    Ok((summary, traces))
}

/// Runs `f` inside a dedicated pool of `threads` workers, or on the global
/// pool when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
