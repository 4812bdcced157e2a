//! Distances from a quotient approximation `g/h` of `(I - x A_G)^{-1}` that
//! is only ever stored through its values at integer points modulo primes.
//!
//! One update rewrites `C = G/h` (all entries share the denominator `h`) as
//!
//! ```text
//! E^ = h I + B* V G U x          F = E^ h^{r^2 - 1}        D = det F
//! N  = h^{r^2} adj F             K = x B* V G
//! G' = G h D - (G U) N K         h' = h^2 D
//! ```
//!
//! which is the fraction calculus of the update with `f` the product of the
//! `r^2` denominators of `E`. Every operation is a ring operation, so it is
//! carried out on the values `g(a) mod p`, `h(a) mod p` directly. A pair
//! `(a, p)` with `D(a) = 0 mod p` is dropped; a point without primes is
//! dropped too. Distances come back by interpolating the low coefficients of
//! the numerator.

use std::cell::OnceCell;

use rayon::prelude::*;

use crate::engine::{default_k, Engine, StepStats};
use crate::error::{Error, Result};
use crate::graph::{ChangeBatch, Graph, UbvDecomposition};
use crate::modmath::{floor_log2, gen_primes, Modulus, PrimePool};
use crate::smalldet::{adjugate, det_elimination, DetMethod, ModMatrix};

fn clog2(x: usize) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(usize::BITS - (x - 1).leading_zeros())
    }
}

/// Degree and coefficient size of a family of integer polynomials: degree at
/// most `degree`, every coefficient of absolute value below `2^bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyBound {
    pub degree: usize,
    pub bits: u64,
}

impl PolyBound {
    pub const ONE: PolyBound = PolyBound { degree: 0, bits: 1 };

    pub fn mul(self, o: PolyBound) -> PolyBound {
        if self == Self::ONE {
            return o;
        }
        if o == Self::ONE {
            return self;
        }
        PolyBound {
            degree: self.degree + o.degree,
            bits: self.bits + o.bits + clog2(self.degree.min(o.degree) + 1),
        }
    }

    pub fn pow(self, e: usize) -> PolyBound {
        (0..e).fold(Self::ONE, |acc, _| acc.mul(self))
    }

    /// Bound on a sum of `terms` polynomials, each within `self`.
    pub fn sum(self, terms: usize) -> PolyBound {
        PolyBound {
            degree: self.degree,
            bits: self.bits + clog2(terms),
        }
    }

    pub fn join(self, o: PolyBound) -> PolyBound {
        PolyBound {
            degree: self.degree.max(o.degree),
            bits: self.bits.max(o.bits),
        }
    }

    /// Multiplying by `x` and a coefficient in `{-1, 0, 1}`.
    pub fn times_x(self) -> PolyBound {
        PolyBound {
            degree: self.degree + 1,
            bits: self.bits,
        }
    }

    /// An `r x r` determinant of entries within `self`.
    pub fn det(self, r: usize) -> PolyBound {
        let terms = (1..=r).product::<usize>();
        self.pow(r).sum(terms)
    }
}

/// Bounds on the numerators `G` and the shared denominator `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientBounds {
    pub num: PolyBound,
    pub den: PolyBound,
}

impl QuotientBounds {
    /// Walk-count truncation at degree `n` over denominator 1.
    pub fn initial(n: usize) -> Self {
        let bits = if n < 2 {
            1
        } else {
            1 + (n as f64 * (n as f64).log2()).ceil() as u64
        };
        QuotientBounds {
            num: PolyBound { degree: n, bits },
            den: PolyBound::ONE,
        }
    }

    /// Bounds after one update whose core has `r` rows and `c` columns.
    pub fn after_step(&self, r: usize, c: usize) -> Self {
        if r == 0 {
            return *self;
        }
        let (g, h) = (self.num, self.den);
        let e = h.join(g.times_x()).sum(c + 1);
        let f = e.mul(h.pow(r * r - 1));
        let d = f.det(r);
        let minors = if r == 1 { PolyBound::ONE } else { f.det(r - 1) };
        let nn = h.pow(r * r).mul(minors);
        let k = g.times_x().sum(c);
        let nk = nn.mul(k).sum(r);
        let m = g.mul(nk).sum(r);
        let ghd = g.mul(h).mul(d);
        QuotientBounds {
            num: ghd.join(m).sum(2),
            den: h.mul(h).mul(d),
        }
    }

    pub fn deg_bound(&self) -> usize {
        self.num.degree.max(self.den.degree)
    }

    pub fn coeff_bits(&self) -> u64 {
        self.num.bits.max(self.den.bits)
    }

    pub fn join(self, o: QuotientBounds) -> QuotientBounds {
        QuotientBounds {
            num: self.num.join(o.num),
            den: self.den.join(o.den),
        }
    }
}

/// Worst-case bounds after `steps` updates with batches touching at most `k`
/// sources and `k` targets.
pub fn project_bounds(n: usize, k: usize, steps: usize) -> QuotientBounds {
    let mut b = QuotientBounds::initial(n);
    for _ in 0..steps {
        let mut next = b;
        for r in 1..=k {
            for c in 1..=k {
                next = next.join(b.after_step(r, c));
            }
        }
        b = next;
    }
    b
}

/// Points `1..=size` and a prime pool sized for one epoch: every bound of the
/// projection is met with some slack for invalidated pairs.
pub fn quotient_sizes(n: usize, k: usize, epoch_len: usize) -> (usize, usize) {
    let b = project_bounds(n, k, epoch_len);
    let need = b.deg_bound() + 1;
    let points = need + (need / 16).max(2);
    let primes = (b.coeff_bits() as usize).div_ceil(61) + 2;
    (points, primes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientConfig {
    pub k: usize,
    pub epoch_len: usize,
}

impl QuotientConfig {
    pub fn for_n(n: usize) -> Self {
        QuotientConfig {
            k: default_k(n),
            epoch_len: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Cell {
    g: Vec<u64>,
    h: u64,
}

/// Per qualifying prime, the low coefficients of the Lagrange basis.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PrimeBasis {
    prime_idx: usize,
    points: Vec<usize>,
    /// `basis[j][i]`: coefficient `i` of the basis polynomial of point `j`.
    basis: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct QuotientState {
    graph: Graph,
    points: Vec<u64>,
    point_valid: Vec<bool>,
    pool: PrimePool,
    cells: Vec<Option<Cell>>,
    bounds: QuotientBounds,
    config: QuotientConfig,
    step_count: usize,
    extractor: OnceCell<Result<Vec<PrimeBasis>>>,
}

impl PartialEq for QuotientState {
    fn eq(&self, o: &Self) -> bool {
        self.graph == o.graph
            && self.points == o.points
            && self.point_valid == o.point_valid
            && self.pool == o.pool
            && self.cells == o.cells
            && self.bounds == o.bounds
            && self.config == o.config
            && self.step_count == o.step_count
    }
}

/// Builds the state over points `1..=s_size`. Every prime must exceed
/// `s_size`, and both sizes must cover the bounds projected for one epoch.
pub fn init_quotient(
    graph: &Graph,
    s_size: usize,
    pool: PrimePool,
    config: QuotientConfig,
) -> Result<QuotientState> {
    let n = graph.n();
    let projected = project_bounds(n, config.k, config.epoch_len);
    if s_size < projected.deg_bound() + 1 {
        return Err(Error::UndersizedPoints {
            have: s_size,
            need: projected.deg_bound() + 1,
        });
    }
    if let Some(&p) = pool.primes().iter().find(|&&p| p <= s_size as u64) {
        return Err(Error::Unsupported(format!(
            "prime {p} does not exceed the largest evaluation point {s_size}"
        )));
    }
    if pool.total_bits() < projected.coeff_bits() {
        return Err(Error::UndersizedPool {
            have_bits: pool.total_bits(),
            need_bits: projected.coeff_bits(),
        });
    }
    let mut state = QuotientState {
        graph: graph.clone(),
        points: (1..=s_size as u64).collect(),
        point_valid: vec![true; s_size],
        pool,
        cells: Vec::new(),
        bounds: QuotientBounds::initial(n),
        config,
        step_count: 0,
        extractor: OnceCell::new(),
    };
    state.recompute();
    Ok(state)
}

/// `sum_{i<=n} (a A_G)^i` modulo `p` by `G <- I + a A_G G`.
fn init_cell(g: &Graph, a: u64, p: u64) -> Cell {
    let n = g.n();
    let md = Modulus::new(p);
    let a = md.reduce(a);
    let adj = g.out_neighbors();
    let identity: Vec<u64> = (0..n * n).map(|i| u64::from(i / n == i % n)).collect();
    let mut cur = identity.clone();
    for _ in 0..n {
        let mut next = identity.clone();
        for (s, outs) in adj.iter().enumerate() {
            for t in 0..n {
                let sum = outs.iter().fold(0, |acc, &v| md.add(acc, cur[v * n + t]));
                next[s * n + t] = md.mul_add(next[s * n + t], a, sum);
            }
        }
        cur = next;
    }
    Cell { g: cur, h: 1 }
}

/// One update on the values at `a` modulo `p`; `false` when `D(a) = 0`.
fn update_cell(cell: &mut Cell, d: &UbvDecomposition, n: usize, a: u64, p: u64) -> bool {
    let md = Modulus::new(p);
    let (rows, cols, r) = (d.rows(), d.cols(), d.r());
    let a = md.reduce(a);
    let (g, h) = (&cell.g, cell.h);
    let core = |i: usize, l: usize| md.reduce_i64(d.core(i, l));
    // K = a B* V G, r x n
    let mut k = vec![0u64; r * n];
    for j in 0..r {
        for (l, &col) in cols.iter().enumerate() {
            if d.core(j, l) != 0 {
                let b = md.mul(a, core(j, l));
                for t in 0..n {
                    k[j * n + t] = md.mul_add(k[j * n + t], b, g[col * n + t]);
                }
            }
        }
    }
    let hp = md.pow(h, (r * r - 1) as u64);
    let mut f = ModMatrix::zeros(r, r, p);
    for i in 0..r {
        for (j, &row) in rows.iter().enumerate() {
            let e = if i == j {
                md.add(h, k[i * n + row])
            } else {
                k[i * n + row]
            };
            f.set(i, j, md.mul(e, hp));
        }
    }
    let det = det_elimination(&f).expect("square").value();
    if det == 0 {
        return false;
    }
    let fprod = md.mul(hp, h);
    let adj = adjugate(&f, DetMethod::Elimination).expect("square");
    // N K, r x n
    let mut nk = vec![0u64; r * n];
    for i in 0..r {
        for j in 0..r {
            let c = md.mul(fprod, adj.get(i, j));
            if c != 0 {
                for t in 0..n {
                    nk[i * n + t] = md.mul_add(nk[i * n + t], c, k[j * n + t]);
                }
            }
        }
    }
    let hd = md.mul(h, det);
    let mut next = vec![0u64; n * n];
    for s in 0..n {
        for t in 0..n {
            let mut m = 0;
            for (i, &row) in rows.iter().enumerate() {
                m = md.mul_add(m, g[s * n + row], nk[i * n + t]);
            }
            next[s * n + t] = md.sub(md.mul(g[s * n + t], hd), m);
        }
    }
    cell.g = next;
    cell.h = md.mul(md.mul(h, h), det);
    true
}

/// Coefficients of `prod_m (x - a_m)` modulo `p`, lowest first.
fn vanishing_poly(md: &Modulus, pts: &[u64]) -> Vec<u64> {
    let mut poly = vec![1u64];
    for &a in pts {
        let na = md.neg(md.reduce(a));
        let mut next = vec![0u64; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = md.add(next[i + 1], c);
            next[i] = md.mul_add(next[i], c, na);
        }
        poly = next;
    }
    poly
}

fn lagrange_weights(md: &Modulus, pts: &[u64]) -> Result<Vec<u64>> {
    pts.iter()
        .enumerate()
        .map(|(j, &aj)| {
            let prod = pts
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .fold(1, |acc, (_, &am)| {
                    md.mul(acc, md.sub(md.reduce(aj), md.reduce(am)))
                });
            md.inv(prod)
        })
        .collect()
}

/// The unique polynomial of degree below `pts.len()` through the given values
/// modulo `p`, lowest coefficient first. Points must be distinct mod `p`.
pub fn interpolate(pts: &[u64], values: &[u64], p: u64) -> Result<Vec<u64>> {
    if pts.len() != values.len() {
        return Err(Error::Dimension(
            "points and values differ in length".into(),
        ));
    }
    let md = Modulus::new(p);
    let big = vanishing_poly(&md, pts);
    let w = lagrange_weights(&md, pts)?;
    let len = pts.len();
    let mut out = vec![0u64; len];
    let mut q = vec![0u64; len];
    for (j, &aj) in pts.iter().enumerate() {
        let scale = md.mul(md.reduce(values[j]), w[j]);
        if scale == 0 {
            continue;
        }
        // synthetic division of the vanishing polynomial by (x - a_j)
        let aj = md.reduce(aj);
        q[len - 1] = big[len];
        for i in (1..len).rev() {
            q[i - 1] = md.mul_add(big[i], aj, q[i]);
        }
        for (o, &c) in out.iter_mut().zip(&q) {
            *o = md.mul_add(*o, scale, c);
        }
    }
    Ok(out)
}

/// Coefficients `0..=n` of every Lagrange basis polynomial over `pts`.
fn low_basis(md: &Modulus, pts: &[u64], n: usize) -> Result<Vec<Vec<u64>>> {
    let big = vanishing_poly(md, pts);
    let w = lagrange_weights(md, pts)?;
    let len = (n + 1).min(pts.len());
    pts.iter()
        .zip(w)
        .map(|(&aj, wj)| {
            // (x - a_j) Q = P solved from the bottom: a_j is nonzero mod p
            let ainv = md.inv(md.reduce(aj))?;
            let mut q = vec![0u64; len];
            let mut prev = 0;
            for (i, slot) in q.iter_mut().enumerate() {
                let qi = md.mul(md.sub(prev, big[i]), ainv);
                *slot = md.mul(qi, wj);
                prev = qi;
            }
            Ok(q)
        })
        .collect()
}

impl QuotientState {
    /// Sizes the points and a pool of primes above `2^61` from the bound
    /// projection for one epoch.
    pub fn new(graph: &Graph, config: QuotientConfig) -> Result<Self> {
        let (points, primes) = quotient_sizes(graph.n(), config.k, config.epoch_len);
        init_quotient(graph, points, gen_primes(primes, 1 << 61), config)
    }

    /// Like [`QuotientState::new`] with an explicit number of points.
    pub fn with_points(graph: &Graph, points: usize, config: QuotientConfig) -> Result<Self> {
        let (_, primes) = quotient_sizes(graph.n(), config.k, config.epoch_len);
        init_quotient(graph, points, gen_primes(primes, 1 << 61), config)
    }

    fn recompute(&mut self) {
        self.pool.reset();
        self.point_valid.iter_mut().for_each(|v| *v = true);
        let (g, pts, primes) = (&self.graph, &self.points, self.pool.primes());
        let np = primes.len();
        self.cells = (0..pts.len() * np)
            .into_par_iter()
            .map(|idx| Some(init_cell(g, pts[idx / np], primes[idx % np])))
            .collect();
        self.bounds = QuotientBounds::initial(g.n());
        self.step_count = 0;
        self.extractor = OnceCell::new();
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn primes(&self) -> &[u64] {
        self.pool.primes()
    }

    pub fn config(&self) -> &QuotientConfig {
        &self.config
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn bounds(&self) -> QuotientBounds {
        self.bounds
    }

    pub fn deg_bound(&self) -> usize {
        self.bounds.deg_bound()
    }

    pub fn coeff_bits(&self) -> u64 {
        self.bounds.coeff_bits()
    }

    pub fn is_point_valid(&self, a_idx: usize) -> bool {
        self.point_valid[a_idx]
    }

    pub fn is_pair_valid(&self, a_idx: usize, p_idx: usize) -> bool {
        self.point_valid[a_idx] && self.cells[a_idx * self.pool.len() + p_idx].is_some()
    }

    pub fn valid_pairs(&self) -> usize {
        (0..self.points.len())
            .map(|a| {
                (0..self.pool.len())
                    .filter(|&p| self.is_pair_valid(a, p))
                    .count()
            })
            .sum()
    }

    pub fn valid_points(&self) -> usize {
        self.point_valid.iter().filter(|v| **v).count()
    }

    fn cell(&self, a_idx: usize, p_idx: usize) -> Option<&Cell> {
        if !self.point_valid[a_idx] {
            return None;
        }
        self.cells[a_idx * self.pool.len() + p_idx].as_ref()
    }

    /// `g_st(a) mod p` for a valid pair.
    pub fn numerator(&self, s: usize, t: usize, a_idx: usize, p_idx: usize) -> Option<u64> {
        let n = self.n();
        self.cell(a_idx, p_idx).map(|c| c.g[s * n + t])
    }

    /// `h_st(a) mod p` for a valid pair; all entries share this value.
    pub fn denominator(&self, _s: usize, _t: usize, a_idx: usize, p_idx: usize) -> Option<u64> {
        self.cell(a_idx, p_idx).map(|c| c.h)
    }

    pub fn quotient_update(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        batch.check_width(self.config.k)?;
        batch.check_against(&self.graph)?;
        let mut stats = StepStats::default();
        if batch.is_empty() {
            stats.valid = self.valid_pairs();
            return Ok(stats);
        }
        if self.step_count >= self.config.epoch_len {
            self.recompute();
            stats.rebuilt = true;
        }
        let d = batch.decompose(self.n(), self.config.k)?;
        let n = self.n();
        let np = self.pool.len();
        let (pts, primes, point_valid) = (&self.points, self.pool.primes(), &self.point_valid);
        stats.invalidated = self
            .cells
            .par_iter_mut()
            .enumerate()
            .map(|(idx, slot)| {
                let (a_idx, p_idx) = (idx / np, idx % np);
                match slot {
                    Some(cell) if point_valid[a_idx] => {
                        if update_cell(cell, &d, n, pts[a_idx], primes[p_idx]) {
                            0
                        } else {
                            *slot = None;
                            1
                        }
                    }
                    _ => 0,
                }
            })
            .sum();
        for a_idx in 0..self.points.len() {
            if self.point_valid[a_idx] && (0..np).all(|p| self.cells[a_idx * np + p].is_none()) {
                self.point_valid[a_idx] = false;
            }
        }
        self.bounds = self.bounds.after_step(d.r(), d.c());
        self.graph.apply(batch)?;
        self.step_count += 1;
        self.extractor = OnceCell::new();
        if !self.extraction_ready() {
            self.recompute();
            stats.rebuilt = true;
        }
        stats.valid = self.valid_pairs();
        Ok(stats)
    }

    /// Valid points for prime `p_idx`, in increasing order.
    pub fn points_for_prime(&self, p_idx: usize) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&a| self.is_pair_valid(a, p_idx))
            .collect()
    }

    /// Primes with at least `deg_bound + 1` valid points.
    pub fn qualifying_primes(&self) -> Vec<usize> {
        let need = self.deg_bound() + 1;
        (0..self.pool.len())
            .filter(|&p| self.points_for_prime(p).len() >= need)
            .collect()
    }

    pub fn extraction_ready(&self) -> bool {
        let bits: u64 = self
            .qualifying_primes()
            .iter()
            .map(|&p| floor_log2(self.pool.prime(p)))
            .sum();
        bits >= self.coeff_bits()
    }

    fn build_extractor(&self) -> Result<Vec<PrimeBasis>> {
        if !self.extraction_ready() {
            return Err(Error::InsufficientData);
        }
        let need = self.deg_bound() + 1;
        self.qualifying_primes()
            .into_iter()
            .map(|p_idx| {
                let md = Modulus::new(self.pool.prime(p_idx));
                let mut points = self.points_for_prime(p_idx);
                points.truncate(need);
                let pts: Vec<u64> = points.iter().map(|&a| self.points[a]).collect();
                let basis = low_basis(&md, &pts, self.n())?;
                Ok(PrimeBasis {
                    prime_idx: p_idx,
                    points,
                    basis,
                })
            })
            .collect()
    }

    /// Smallest `i <= n` whose numerator coefficient is nonzero.
    pub fn extract_distance(&self, s: usize, t: usize) -> Result<Option<usize>> {
        self.graph.check_node(s)?;
        self.graph.check_node(t)?;
        let bases = self
            .extractor
            .get_or_init(|| self.build_extractor())
            .as_ref()
            .map_err(Clone::clone)?;
        let n = self.n();
        for i in 0..=n {
            for pb in bases {
                let md = Modulus::new(self.pool.prime(pb.prime_idx));
                let c = pb.points.iter().zip(&pb.basis).fold(0, |acc, (&a, b)| {
                    let y = self.numerator(s, t, a, pb.prime_idx).expect("valid pair");
                    md.mul_add(acc, y, b[i])
                });
                if c != 0 {
                    return Ok(Some(i));
                }
            }
        }
        Ok(None)
    }

    /// The numerator of entry `(s, t)` modulo prime `p_idx`, interpolated
    /// through every valid point of that prime.
    pub fn interpolate_numerator(&self, s: usize, t: usize, p_idx: usize) -> Result<Vec<u64>> {
        let points = self.points_for_prime(p_idx);
        if points.is_empty() {
            return Err(Error::InsufficientData);
        }
        let pts: Vec<u64> = points.iter().map(|&a| self.points[a]).collect();
        let vals: Vec<u64> = points
            .iter()
            .map(|&a| self.numerator(s, t, a, p_idx).expect("valid pair"))
            .collect();
        interpolate(&pts, &vals, self.pool.prime(p_idx))
    }

    pub fn rebuild(&mut self) {
        self.recompute();
    }
}

impl Engine for QuotientState {
    fn name(&self) -> &'static str {
        "quotient"
    }

    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn k(&self) -> usize {
        self.config.k
    }

    fn apply_batch(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        self.quotient_update(batch)
    }

    fn reachable(&self, s: usize, t: usize) -> Result<bool> {
        Ok(self.extract_distance(s, t)?.is_some())
    }

    fn distance(&self, s: usize, t: usize) -> Result<Option<usize>> {
        self.extract_distance(s, t)
    }

    fn rebuild(&mut self) -> Result<()> {
        self.recompute();
        Ok(())
    }

    fn valid_count(&self) -> usize {
        self.valid_pairs()
    }
}
