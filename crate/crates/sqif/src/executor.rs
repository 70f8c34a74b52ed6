//! Thread-pool chunk executor.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use sqif_core::ising::{ChunkExecutor, EnergySample, Sequential};

use crate::CliError;

/// Runs brute-force chunks on a dedicated rayon pool.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    /// `workers = 0` lets rayon pick the thread count.
    pub fn new(workers: usize) -> Result<Self, CliError> {
        let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl ChunkExecutor for RayonExecutor {
    fn map_chunks(&self, count: usize, task: &(dyn Fn(usize) -> Vec<EnergySample> + Sync)) -> Vec<Vec<EnergySample>> {
        self.pool.install(|| (0..count).into_par_iter().map(task).collect())
    }
}

/// One worker means the calling thread; anything else gets a pool.
pub fn executor_for(workers: Option<usize>) -> Result<Box<dyn ChunkExecutor>, CliError> {
    match workers {
        Some(1) => Ok(Box::new(Sequential)),
        Some(w) => Ok(Box::new(RayonExecutor::new(w)?)),
        None => Ok(Box::new(RayonExecutor::new(0)?)),
    }
}
