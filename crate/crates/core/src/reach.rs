//! Reachability via `(nI - A_G)^{-1}` kept modulo a pool of primes.
//!
//! `s` reaches `t` exactly when entry `(s, t)` of the inverse is nonzero over
//! the rationals, which is detected as nonzero modulo some valid prime once the
//! product of valid primes exceeds `2^{n^2 + 1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{default_epoch_len, default_k, Engine, StepStats};
use crate::error::{Error, Result};
use crate::graph::{ChangeBatch, Graph, UbvDecomposition};
use crate::modmath::{gen_primes, random_primes, Modulus, PrimePool};
use crate::smalldet::{adjugate_inverse, determinant, gauss_jordan_inverse, DetMethod, ModMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeMode {
    /// `count` random 62-bit primes drawn from a ChaCha8 stream.
    Random { count: usize, seed: u64 },
    /// Smallest primes, enough that the survivors of one epoch still exceed
    /// the entry bound.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachConfig {
    pub k: usize,
    pub epoch_len: usize,
    /// Rebuild once fewer primes than this remain valid. `None` means half
    /// the pool.
    pub rebuild_threshold: Option<usize>,
    pub prime_mode: PrimeMode,
    pub det_method: DetMethod,
}

impl ReachConfig {
    pub fn for_n(n: usize) -> Self {
        ReachConfig {
            k: default_k(n),
            epoch_len: default_epoch_len(n),
            rebuild_threshold: None,
            prime_mode: PrimeMode::Random { count: 8, seed: 0 },
            det_method: DetMethod::Elimination,
        }
    }
}

/// Pool for `n` nodes under the configured mode.
pub fn reach_pool(n: usize, config: &ReachConfig) -> PrimePool {
    match config.prime_mode {
        PrimeMode::Random { count, seed } => {
            random_primes(count, 62, &mut ChaCha8Rng::seed_from_u64(seed))
        }
        PrimeMode::Deterministic => {
            // s primes already exceed 2^{n^2+1}; each step can kill at most n^2
            let need = (n * n + 1) as u64;
            let mut bits = 0u64;
            let mut s = 0;
            let mut p = 1u64;
            while bits <= need {
                p += 1;
                if crate::modmath::is_prime(p) {
                    bits += crate::modmath::floor_log2(p);
                    s += 1;
                }
            }
            gen_primes(s + (config.epoch_len + 1) * n * n, 2)
        }
    }
}

/// `nI - A_G` modulo `p`.
pub fn shifted_matrix(g: &Graph, p: u64) -> ModMatrix {
    let n = g.n();
    let md = Modulus::new(p);
    let mut m = ModMatrix::zeros(n, n, p);
    for i in 0..n {
        m.set(i, i, md.reduce(n as u64));
    }
    for (u, v) in g.edges() {
        m.set(u, v, md.sub(m.get(u, v), 1));
    }
    m
}

/// `inv <- inv - inv U E^{-1} B V inv` with `E = I + B V inv U`, where `U B V`
/// is the change of the maintained matrix. Returns `false`, leaving `inv`
/// untouched, when `E` is singular modulo the prime.
pub fn smw_update(inv: &mut ModMatrix, d: &UbvDecomposition, method: DetMethod) -> bool {
    let (rows, cols) = (d.rows(), d.cols());
    let (r, n) = (d.r(), inv.rows());
    let p = inv.modulus();
    let md = Modulus::new(p);
    // E = I + B V inv U
    let mut e = ModMatrix::identity(r, p);
    for i in 0..r {
        for j in 0..r {
            let mut acc = e.get(i, j);
            for (l, &col) in cols.iter().enumerate() {
                let b = d.core(i, l);
                if b != 0 {
                    acc = md.add(acc, md.mul(md.reduce_i64(b), inv.get(col, rows[j])));
                }
            }
            e.set(i, j, acc);
        }
    }
    if determinant(&e, method).expect("square").is_zero() {
        return false;
    }
    let einv = adjugate_inverse(&e, method).expect("nonsingular");
    // W = E^{-1} B V inv, r x n
    let mut bv = vec![0u64; r * n];
    for j in 0..r {
        for (l, &col) in cols.iter().enumerate() {
            let b = d.core(j, l);
            if b != 0 {
                let b = md.reduce_i64(b);
                for (t, x) in inv.row(col).iter().enumerate() {
                    bv[j * n + t] = md.mul_add(bv[j * n + t], b, *x);
                }
            }
        }
    }
    let mut w = vec![0u64; r * n];
    for i in 0..r {
        for j in 0..r {
            let c = einv.get(i, j);
            if c != 0 {
                for t in 0..n {
                    w[i * n + t] = md.mul_add(w[i * n + t], c, bv[j * n + t]);
                }
            }
        }
    }
    // inv -= (inv U) W
    let iu: Vec<u64> = (0..n)
        .flat_map(|s| rows.iter().map(move |&row| (s, row)))
        .map(|(s, row)| inv.get(s, row))
        .collect();
    let ent = inv.entries_mut();
    for s in 0..n {
        for i in 0..r {
            let c = iu[s * r + i];
            if c != 0 {
                let nc = md.neg(c);
                for t in 0..n {
                    ent[s * n + t] = md.mul_add(ent[s * n + t], nc, w[i * n + t]);
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachState {
    graph: Graph,
    pool: PrimePool,
    inv: Vec<Option<ModMatrix>>,
    step_count: usize,
    config: ReachConfig,
}

pub fn init_reach(graph: &Graph, pool: PrimePool, config: ReachConfig) -> Result<ReachState> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if let Some(u) = graph.has_self_loop() {
        return Err(Error::SelfLoop(u + 1));
    }
    let mut state = ReachState {
        graph: graph.clone(),
        pool,
        inv: Vec::new(),
        step_count: 0,
        config,
    };
    state.recompute();
    Ok(state)
}

impl ReachState {
    pub fn new(graph: &Graph, config: ReachConfig) -> Result<Self> {
        let pool = reach_pool(graph.n(), &config);
        init_reach(graph, pool, config)
    }

    fn recompute(&mut self) {
        self.pool.reset();
        let g = &self.graph;
        self.inv = self
            .pool
            .primes()
            .par_iter()
            .map(|&p| gauss_jordan_inverse(&shifted_matrix(g, p)).ok())
            .collect();
        for (idx, m) in self.inv.iter().enumerate() {
            if m.is_none() {
                self.pool.invalidate(idx);
            }
        }
        self.step_count = 0;
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn pool(&self) -> &PrimePool {
        &self.pool
    }

    pub fn config(&self) -> &ReachConfig {
        &self.config
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// The maintained inverse for pool index `idx`, if that prime is valid.
    pub fn inverse(&self, idx: usize) -> Option<&ModMatrix> {
        self.inv[idx].as_ref().filter(|_| self.pool.is_valid(idx))
    }

    pub fn rebuild_threshold(&self) -> usize {
        self.config
            .rebuild_threshold
            .unwrap_or(self.pool.len().div_ceil(2))
            .max(1)
    }

    /// One Sherman-Morrison-Woodbury update. Returns how many primes it
    /// invalidated.
    pub fn smw_step(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        batch.check_width(self.config.k)?;
        batch.check_against(&self.graph)?;
        if let Some(&(u, _)) = batch.inserts.iter().find(|(u, v)| u == v) {
            return Err(Error::SelfLoop(u + 1));
        }
        let mut stats = StepStats::default();
        if batch.is_empty() {
            stats.valid = self.pool.valid_count();
            return Ok(stats);
        }
        if self.step_count >= self.config.epoch_len {
            self.recompute();
            stats.rebuilt = true;
        }
        let d = batch.decompose(self.n(), self.config.k)?;
        let method = self.config.det_method;
        let primes = self.pool.primes();
        let valid: Vec<bool> = (0..primes.len()).map(|i| self.pool.is_valid(i)).collect();
        let dead: Vec<usize> = self
            .inv
            .par_iter_mut()
            .enumerate()
            .filter_map(|(idx, slot)| {
                if !valid[idx] {
                    return None;
                }
                let inv = slot.as_mut().expect("valid primes carry an inverse");
                if smw_update(inv, &d, method) {
                    None
                } else {
                    *slot = None;
                    Some(idx)
                }
            })
            .collect();
        for &idx in &dead {
            self.pool.invalidate(idx);
        }
        self.graph.apply(batch)?;
        self.step_count += 1;
        stats.invalidated = dead.len();
        if self.pool.valid_count() < self.rebuild_threshold() {
            self.recompute();
            stats.rebuilt = true;
        }
        stats.valid = self.pool.valid_count();
        Ok(stats)
    }

    pub fn reachable(&self, s: usize, t: usize) -> Result<bool> {
        self.graph.check_node(s)?;
        self.graph.check_node(t)?;
        let mut any = false;
        for idx in self.pool.valid_indices() {
            any = true;
            if self.inv[idx].as_ref().expect("valid").get(s, t) != 0 {
                return Ok(true);
            }
        }
        if any {
            Ok(false)
        } else {
            Err(Error::InsufficientData)
        }
    }

    /// Recomputes every inverse on the current graph with all primes valid
    /// again.
    pub fn rebuild(&mut self) {
        self.recompute();
    }

    /// Checks `inv * (nI - A_G) = I` for the first `sample` valid primes.
    pub fn check_inverses(&self, sample: usize) -> bool {
        self.pool.valid_indices().take(sample).all(|idx| {
            let a = shifted_matrix(&self.graph, self.pool.prime(idx));
            self.inv[idx]
                .as_ref()
                .and_then(|inv| inv.mul(&a).ok())
                .is_some_and(|m| m.is_identity())
        })
    }
}

impl Engine for ReachState {
    fn name(&self) -> &'static str {
        "reach"
    }

    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn k(&self) -> usize {
        self.config.k
    }

    fn apply_batch(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        self.smw_step(batch)
    }

    fn reachable(&self, s: usize, t: usize) -> Result<bool> {
        ReachState::reachable(self, s, t)
    }

    fn distance(&self, _s: usize, _t: usize) -> Result<Option<usize>> {
        Err(Error::Unsupported(
            "the reach engine answers reachability only".into(),
        ))
    }

    fn rebuild(&mut self) -> Result<()> {
        self.recompute();
        Ok(())
    }

    fn valid_count(&self) -> usize {
        self.pool.valid_count()
    }
}
