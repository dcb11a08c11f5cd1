//! Batch runs over many parameter sets or initial conditions.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it the same entry points run sequentially. Results always come
//! back in input order.

use serde::Serialize;

use crate::hybridsim::{simulate, SimConfig, SimError, Trajectory};
use crate::sysmodel::{State, SystemParams};

/// One independent simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchJob {
    pub params: SystemParams,
    pub initial: State,
    pub config: SimConfig,
}

impl BatchJob {
    pub fn new(params: SystemParams, initial: State, config: SimConfig) -> Self {
        Self {
            params,
            initial,
            config,
        }
    }

    pub fn run(&self) -> Result<Trajectory, SimError> {
        simulate(&self.params, self.initial, &self.config)
    }
}

/// Maps `f` over `items`, in parallel when the feature is enabled.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn simulate_batch_sequential(jobs: &[BatchJob]) -> Vec<Result<Trajectory, SimError>> {
    jobs.iter().map(BatchJob::run).collect()
}

#[cfg(feature = "parallel")]
pub fn simulate_batch_parallel(jobs: &[BatchJob]) -> Vec<Result<Trajectory, SimError>> {
    use rayon::prelude::*;
    jobs.par_iter().map(BatchJob::run).collect()
}

/// Runs every job; parallel when the feature is enabled.
pub fn simulate_batch(jobs: &[BatchJob]) -> Vec<Result<Trajectory, SimError>> {
    par_map(jobs, BatchJob::run)
}
