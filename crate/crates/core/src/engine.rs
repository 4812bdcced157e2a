//! Pieces shared by the three maintenance engines.

use crate::error::Result;
use crate::graph::{batch_partition, ChangeBatch, Edge, Graph};

/// `ceil(log2 n / max(1, log2 log2 n))`, at least 1.
pub fn default_k(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let l = (n as f64).log2();
    let ll = l.log2().max(1.0);
    ((l / ll).ceil() as usize).max(1)
}

/// `ceil((log2 n)^2)`, at least 1.
pub fn default_epoch_len(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let l = (n as f64).log2();
    ((l * l).ceil() as usize).max(1)
}

/// What one batch did to an engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    /// Primes (or evaluation pairs) invalidated by this batch.
    pub invalidated: usize,
    /// Valid primes (or pairs) after the batch.
    pub valid: usize,
    /// Whether a rebuild happened while processing the batch.
    pub rebuilt: bool,
}

/// A dynamic graph query structure driven by change batches.
pub trait Engine {
    fn name(&self) -> &'static str;

    fn graph(&self) -> &Graph;

    /// Largest number of sources (and of targets) one batch may touch.
    fn k(&self) -> usize;

    fn apply_batch(&mut self, batch: &ChangeBatch) -> Result<StepStats>;

    fn reachable(&self, s: usize, t: usize) -> Result<bool>;

    fn distance(&self, s: usize, t: usize) -> Result<Option<usize>>;

    fn rebuild(&mut self) -> Result<()>;

    fn valid_count(&self) -> usize;

    /// Splits a change into admissible batches and applies them in order.
    fn apply_change(&mut self, inserts: &[Edge], deletes: &[Edge]) -> Result<Vec<StepStats>> {
        let whole = ChangeBatch::new(inserts.to_vec(), deletes.to_vec())?;
        whole.check_against(self.graph())?;
        batch_partition(&whole.inserts, &whole.deletes, self.k())
            .iter()
            .map(|b| self.apply_batch(b))
            .collect()
    }
}
