//! Distances via the degree-`n` truncation of `(I - x A_G)^{-1}`.
//!
//! Coefficient `i` of entry `(s, t)` counts walks of length `i`, so the
//! distance is the index of the first nonzero coefficient. Counts are kept
//! modulo a handful of word-size primes whose product exceeds `2 n^n`.

use rayon::prelude::*;

use crate::engine::{default_epoch_len, default_k, Engine, StepStats};
use crate::error::{Error, Result};
use crate::graph::{ChangeBatch, Graph, UbvDecomposition};
use crate::modmath::{gen_primes, Modulus, PrimePool, Residue};
use crate::series::{mul_sub, polymat_inverse_normalized, polymat_mul, SeriesMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistConfig {
    pub k: usize,
    pub epoch_len: usize,
}

impl DistConfig {
    pub fn for_n(n: usize) -> Self {
        DistConfig {
            k: default_k(n),
            epoch_len: default_epoch_len(n),
        }
    }
}

/// Bits needed so that every walk count of length at most `n` survives:
/// `log2(2 n^n)` rounded up.
pub fn walk_count_bits(n: usize) -> u64 {
    if n < 2 {
        return 1;
    }
    1 + (n as f64 * (n as f64).log2()).ceil() as u64
}

/// The `ceil(n log2 n / 61) + 1` smallest primes above `2^61`.
pub fn dist_pool(n: usize) -> PrimePool {
    let nl = if n < 2 {
        0.0
    } else {
        n as f64 * (n as f64).log2()
    };
    let count = (nl / 61.0).ceil() as usize + 1;
    gen_primes(count, 1 << 61)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistState {
    graph: Graph,
    pool: PrimePool,
    c: Vec<SeriesMatrix>,
    config: DistConfig,
    step_count: usize,
}

pub fn init_dist(graph: &Graph, pool: PrimePool, config: DistConfig) -> Result<DistState> {
    let need = walk_count_bits(graph.n());
    if pool.total_bits() < need {
        return Err(Error::UndersizedPool {
            have_bits: pool.total_bits(),
            need_bits: need,
        });
    }
    let mut state = DistState {
        graph: graph.clone(),
        pool,
        c: Vec::new(),
        config,
        step_count: 0,
    };
    state.recompute();
    Ok(state)
}

/// `sum_{i<=n} (x A_G)^i` modulo `p` by the truncated Horner scheme
/// `C <- I + x A_G C`.
pub fn walk_series(g: &Graph, p: u64) -> SeriesMatrix {
    let n = g.n();
    let md = Modulus::new(p);
    let adj = g.out_neighbors();
    let mut c = SeriesMatrix::identity(n, n, p);
    for _ in 0..n {
        let mut next = SeriesMatrix::identity(n, n, p);
        for (s, outs) in adj.iter().enumerate() {
            for &v in outs {
                for t in 0..n {
                    let src = c.entry(v, t);
                    let dst = next.entry_mut(s, t);
                    for i in 0..n {
                        dst[i + 1] = md.add(dst[i + 1], src[i]);
                    }
                }
            }
        }
        c = next;
    }
    c
}

/// `C <- C - C U E^{-1} B V C` with `B = x B*` and `E = I + B V C U`,
/// truncated at the degree bound of `C`.
pub fn series_smw_update(c: &mut SeriesMatrix, d: &UbvDecomposition) -> Result<()> {
    let (rows, cols) = (d.rows(), d.cols());
    let (r, n, m, p) = (d.r(), c.rows(), c.degree_bound(), c.modulus());
    let md = Modulus::new(p);
    // B V C, r x n, carrying the factor x
    let mut bvc = SeriesMatrix::zeros(r, n, m, p);
    for j in 0..r {
        for (l, &col) in cols.iter().enumerate() {
            let b = d.core(j, l);
            if b == 0 {
                continue;
            }
            let b = md.reduce_i64(b);
            for t in 0..n {
                let src = c.entry(col, t)[..m].to_vec();
                let dst = bvc.entry_mut(j, t);
                for (i, s) in src.into_iter().enumerate() {
                    dst[i + 1] = md.mul_add(dst[i + 1], b, s);
                }
            }
        }
    }
    let mut e = SeriesMatrix::identity(r, m, p);
    for i in 0..r {
        for (j, &row) in rows.iter().enumerate() {
            let src = bvc.entry(i, row).to_vec();
            let dst = e.entry_mut(i, j);
            for (x, y) in dst.iter_mut().zip(src) {
                *x = md.add(*x, y);
            }
        }
    }
    let w = polymat_mul(&polymat_inverse_normalized(&e)?, &bvc)?;
    for s in 0..n {
        let cu: Vec<Vec<u64>> = rows.iter().map(|&row| c.entry(s, row).to_vec()).collect();
        for t in 0..n {
            for (i, f) in cu.iter().enumerate() {
                mul_sub(&md, c.entry_mut(s, t), f, w.entry(i, t));
            }
        }
    }
    Ok(())
}

impl DistState {
    pub fn new(graph: &Graph, config: DistConfig) -> Result<Self> {
        init_dist(graph, dist_pool(graph.n()), config)
    }

    fn recompute(&mut self) {
        let g = &self.graph;
        self.c = self
            .pool
            .primes()
            .par_iter()
            .map(|&p| walk_series(g, p))
            .collect();
        self.step_count = 0;
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn pool(&self) -> &PrimePool {
        &self.pool
    }

    pub fn config(&self) -> &DistConfig {
        &self.config
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// The maintained truncation for pool index `idx`.
    pub fn matrix(&self, idx: usize) -> &SeriesMatrix {
        &self.c[idx]
    }

    pub fn dist_smw_step(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        batch.check_width(self.config.k)?;
        batch.check_against(&self.graph)?;
        let mut stats = StepStats {
            valid: self.pool.len(),
            ..StepStats::default()
        };
        if batch.is_empty() {
            return Ok(stats);
        }
        if self.step_count >= self.config.epoch_len {
            self.recompute();
            stats.rebuilt = true;
        }
        let d = batch.decompose(self.n(), self.config.k)?;
        self.c
            .par_iter_mut()
            .try_for_each(|c| series_smw_update(c, &d))?;
        self.graph.apply(batch)?;
        self.step_count += 1;
        Ok(stats)
    }

    pub fn distance(&self, s: usize, t: usize) -> Result<Option<usize>> {
        self.graph.check_node(s)?;
        self.graph.check_node(t)?;
        Ok(self
            .c
            .iter()
            .filter_map(|c| c.entry(s, t).iter().position(|&x| x != 0))
            .min())
    }

    /// Coefficient `i` of entry `(s, t)` modulo pool prime `p`.
    pub fn walk_count_mod(&self, s: usize, t: usize, i: usize, p: u64) -> Result<Residue> {
        self.graph.check_node(s)?;
        self.graph.check_node(t)?;
        if i > self.n() {
            return Err(Error::DegreeExceeded {
                index: i,
                degree: self.n(),
            });
        }
        let idx = self.pool.index_of(p).ok_or(Error::UnknownPrime(p))?;
        Ok(Residue::new(self.c[idx].entry(s, t)[i], p))
    }

    pub fn rebuild(&mut self) {
        self.recompute();
    }
}

impl Engine for DistState {
    fn name(&self) -> &'static str {
        "dist"
    }

    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn k(&self) -> usize {
        self.config.k
    }

    fn apply_batch(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        self.dist_smw_step(batch)
    }

    fn reachable(&self, s: usize, t: usize) -> Result<bool> {
        Ok(self.distance(s, t)?.is_some())
    }

    fn distance(&self, s: usize, t: usize) -> Result<Option<usize>> {
        DistState::distance(self, s, t)
    }

    fn rebuild(&mut self) -> Result<()> {
        self.recompute();
        Ok(())
    }

    fn valid_count(&self) -> usize {
        self.pool.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{bfs_dist, walk_series_mod};
    use rand::{Rng, SeedableRng};

    fn path3() -> Graph {
        Graph::with_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn assert_matches_scratch(s: &DistState) {
        for (idx, &p) in s.pool().primes().iter().enumerate() {
            let want = walk_series_mod(s.graph(), s.n(), p);
            let c = s.matrix(idx);
            for u in 0..s.n() {
                for v in 0..s.n() {
                    assert_eq!(c.entry(u, v), &want[u][v][..]);
                }
            }
        }
    }

    #[test]
    fn pool_sizing() {
        assert_eq!(dist_pool(8).len(), 2);
        assert_eq!(dist_pool(16).len(), 3);
        for n in [2, 8, 16, 64] {
            assert!(dist_pool(n).total_bits() >= walk_count_bits(n));
        }
        let small = PrimePool::from_primes(vec![5]);
        assert!(matches!(
            init_dist(&Graph::new(8), small, DistConfig::for_n(8)),
            Err(Error::UndersizedPool { .. })
        ));
    }

    #[test]
    fn init_examples() {
        let s = DistState::new(&Graph::new(4), DistConfig::for_n(4)).unwrap();
        assert_eq!(
            s.matrix(0),
            &SeriesMatrix::identity(4, 4, s.pool().prime(0))
        );
        let s = DistState::new(&path3(), DistConfig::for_n(3)).unwrap();
        assert_eq!(s.matrix(0).entry(0, 2), &[0, 0, 1, 0]);
        for v in 0..3 {
            assert_eq!(s.matrix(0).entry(v, v)[0], 1);
        }
        assert_matches_scratch(&s);
    }

    #[test]
    fn distance_examples() {
        let s = DistState::new(&Graph::new(4), DistConfig::for_n(4)).unwrap();
        assert_eq!(s.distance(2, 2).unwrap(), Some(0));
        assert_eq!(s.distance(0, 1).unwrap(), None);
        let s = DistState::new(&path3(), DistConfig::for_n(3)).unwrap();
        assert_eq!(s.distance(0, 2).unwrap(), Some(2));
        assert!(s.distance(0, 3).is_err());
    }

    #[test]
    fn walk_count_examples() {
        let k3 = Graph::with_edges(3, [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]).unwrap();
        let s = DistState::new(&k3, DistConfig::for_n(3)).unwrap();
        let p = s.pool().prime(0);
        assert_eq!(s.walk_count_mod(0, 0, 0, p).unwrap().value(), 1);
        assert_eq!(s.walk_count_mod(0, 1, 0, p).unwrap().value(), 0);
        assert_eq!(s.walk_count_mod(0, 1, 1, p).unwrap().value(), 1);
        assert_eq!(s.walk_count_mod(0, 0, 2, p).unwrap().value(), 2);
        assert!(matches!(
            s.walk_count_mod(0, 0, 4, p),
            Err(Error::DegreeExceeded { .. })
        ));
        assert_eq!(s.walk_count_mod(0, 0, 1, 7), Err(Error::UnknownPrime(7)));
    }

    #[test]
    fn update_examples() {
        let mut s = DistState::new(&Graph::new(4), DistConfig::for_n(4)).unwrap();
        let before = s.clone();
        s.dist_smw_step(&ChangeBatch::default()).unwrap();
        assert_eq!(s, before);
        s.dist_smw_step(&ChangeBatch::new(vec![(1, 3)], vec![]).unwrap())
            .unwrap();
        assert_matches_scratch(&s);

        let mut s = DistState::new(&path3(), DistConfig::for_n(3)).unwrap();
        s.dist_smw_step(&ChangeBatch::new(vec![], vec![(1, 2)]).unwrap())
            .unwrap();
        assert!(s.matrix(0).entry(0, 2).iter().all(|&c| c == 0));
        assert_eq!(s.distance(0, 2).unwrap(), None);
    }

    #[test]
    fn self_loops_are_counted() {
        let g = Graph::with_edges(2, [(0, 0), (0, 1)]).unwrap();
        let mut s = DistState::new(&g, DistConfig::for_n(2)).unwrap();
        assert_eq!(s.matrix(0).entry(0, 1), &[0, 1, 1]);
        s.dist_smw_step(&ChangeBatch::new(vec![(1, 1)], vec![]).unwrap())
            .unwrap();
        assert_matches_scratch(&s);
        assert_eq!(s.distance(0, 1).unwrap(), Some(1));
    }

    #[test]
    fn random_steps_match_scratch_and_bfs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let n = 8;
        let config = DistConfig::for_n(n);
        let mut s = DistState::new(&Graph::new(n), config).unwrap();
        for _ in 0..40 {
            let mut ins = Vec::new();
            let mut del = Vec::new();
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let (u2, v2) = (rng.gen_range(0..n), rng.gen_range(0..n));
            for e in [(u, v), (u, v2), (u2, v), (u2, v2)] {
                if e.0 != e.1 && !ins.contains(&e) && !del.contains(&e) && rng.gen_bool(0.7) {
                    if s.graph().contains(e.0, e.1) {
                        del.push(e);
                    } else {
                        ins.push(e);
                    }
                }
            }
            s.dist_smw_step(&ChangeBatch::new(ins, del).unwrap())
                .unwrap();
            assert_matches_scratch(&s);
            for a in 0..n {
                let d = bfs_dist(s.graph(), a).unwrap();
                for b in 0..n {
                    assert_eq!(s.distance(a, b).unwrap(), d.get(&b).copied());
                }
            }
        }
    }

    #[test]
    fn rebuild_equals_init() {
        let g = Graph::with_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let mut s = DistState::new(&g, DistConfig::for_n(5)).unwrap();
        s.dist_smw_step(&ChangeBatch::new(vec![(2, 3)], vec![(0, 1)]).unwrap())
            .unwrap();
        let mut r = s.clone();
        r.rebuild();
        assert_eq!(r, DistState::new(s.graph(), DistConfig::for_n(5)).unwrap());
    }
}
