//! Brute-force references the engines are checked against.
//!
//! Nothing here is fast and nothing here shares code with the engines: graph
//! searches, walk-count dynamic programming, exact rational inversion, and a
//! symbolic run of the quotient update over `Z[x]`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{ChangeBatch, Graph};
use crate::modmath::Modulus;

/// Every node reachable from `s`, including `s` itself.
pub fn bfs_reach(g: &Graph, s: usize) -> Result<BTreeSet<usize>> {
    Ok(bfs_dist(g, s)?.into_keys().collect())
}

/// Shortest-path lengths from `s`; unreachable nodes are absent.
pub fn bfs_dist(g: &Graph, s: usize) -> Result<BTreeMap<usize, usize>> {
    g.check_node(s)?;
    let adj = g.out_neighbors();
    let mut dist = BTreeMap::new();
    dist.insert(s, 0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        for &v in &adj[u] {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                e.insert(du + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// All-pairs distance table, `table[s][t]`.
pub fn all_pairs_dist(g: &Graph) -> Vec<Vec<Option<usize>>> {
    (0..g.n())
        .map(|s| {
            let d = bfs_dist(g, s).expect("in range");
            (0..g.n()).map(|t| d.get(&t).copied()).collect()
        })
        .collect()
}

/// Reflexive transitive closure by repeated boolean squaring.
pub fn closure_by_squaring(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for (u, v) in g.edges() {
        r[u][v] = true;
    }
    let mut span = 1;
    while span < n {
        let mut next = r.clone();
        for i in 0..n {
            for l in 0..n {
                if r[i][l] {
                    for j in 0..n {
                        next[i][j] |= r[l][j];
                    }
                }
            }
        }
        r = next;
        span *= 2;
    }
    r
}

/// Walk counts from `s` for every length `0..=max_len`: `out[i][t]`.
pub fn walk_counts_from(g: &Graph, s: usize, max_len: usize) -> Vec<Vec<BigUint>> {
    let n = g.n();
    let adj = g.out_neighbors();
    let mut cur = vec![BigUint::zero(); n];
    cur[s] = BigUint::one();
    let mut out = vec![cur.clone()];
    for _ in 0..max_len {
        let mut next = vec![BigUint::zero(); n];
        for u in 0..n {
            if cur[u].is_zero() {
                continue;
            }
            for &v in &adj[u] {
                next[v] += &cur[u];
            }
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

/// Number of directed walks of length exactly `i` from `s` to `t`.
pub fn walk_count_dp(g: &Graph, s: usize, t: usize, i: usize) -> BigUint {
    walk_counts_from(g, s, i)[i][t].clone()
}

/// `sum_{i<=m} (x A_G)^i` with coefficients reduced modulo `p`, laid out as
/// `out[s][t][i]`.
pub fn walk_series_mod(g: &Graph, m: usize, p: u64) -> Vec<Vec<Vec<u64>>> {
    let n = g.n();
    (0..n)
        .map(|s| {
            let counts = walk_counts_from(g, s, m);
            (0..n)
                .map(|t| {
                    (0..=m)
                        .map(|i| {
                            (&counts[i][t] % p)
                                .to_u64_digits()
                                .first()
                                .copied()
                                .unwrap_or(0)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Exact inverse by fraction-free (Bareiss) forward elimination followed by
/// rational back substitution.
pub fn inverse_exact(m: &[Vec<BigInt>]) -> Result<Vec<Vec<BigRational>>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(
            "inverse_exact needs a square matrix".into(),
        ));
    }
    // augmented [M | I]
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }));
            r
        })
        .collect();
    let width = 2 * n;
    let mut prev = BigInt::one();
    for k in 0..n {
        let piv = (k..n)
            .find(|&r| !a[r][k].is_zero())
            .ok_or(Error::Singular(0))?;
        a.swap(k, piv);
        for i in k + 1..n {
            for j in k + 1..width {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![vec![BigRational::zero(); n]; n];
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = BigRational::from_integer(a[i][n + col].clone());
            for j in i + 1..n {
                acc -= BigRational::from_integer(a[i][j].clone()) * &x[j][col];
            }
            x[i][col] = acc / BigRational::from_integer(a[i][i].clone());
        }
    }
    Ok(x)
}

/// `c * I - A_G` as an integer matrix.
pub fn shifted_laplacian(g: &Graph, c: i64) -> Vec<Vec<BigInt>> {
    let n = g.n();
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::from(c);
    }
    for (u, v) in g.edges() {
        m[u][v] -= 1;
    }
    m
}

/// Dense polynomial over `Z`, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn zero() -> Self {
        IntPoly(Vec::new())
    }

    pub fn constant(c: i64) -> Self {
        IntPoly::new(vec![BigInt::from(c)])
    }

    /// `c * x`
    pub fn monomial_x(c: i64) -> Self {
        IntPoly::new(vec![BigInt::zero(), BigInt::from(c)])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    /// Bits of the largest coefficient magnitude.
    pub fn max_bits(&self) -> u64 {
        self.0.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let len = self.0.len().max(o.0.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        let len = self.0.len().max(o.0.len());
        IntPoly::new((0..len).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// `self / d` when `d` has constant term `+-1` and divides `self` exactly.
    pub fn exact_div(&self, d: &IntPoly) -> Option<IntPoly> {
        let d0 = d.coeff(0);
        if !(d0.is_one() || (-&d0).is_one()) {
            return None;
        }
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        if d.degree() > self.degree() {
            return None;
        }
        let qlen = self.degree() - d.degree() + 1;
        let mut rem = self.0.clone();
        let mut q = vec![BigInt::zero(); qlen];
        for i in 0..qlen {
            let c = &rem[i] * &d0;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    rem[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(IntPoly::new(q))
        } else {
            None
        }
    }

    pub fn eval_mod(&self, a: u64, p: u64) -> u64 {
        let m = Modulus::new(p);
        let a = a % p;
        self.0
            .iter()
            .rev()
            .fold(0, |acc, c| m.add(m.mul(acc, a), m.reduce_big(c)))
    }
}

/// Unreduced fraction of integer polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFrac {
    pub num: IntPoly,
    pub den: IntPoly,
}

impl PolyFrac {
    pub fn from_poly(num: IntPoly) -> Self {
        PolyFrac {
            num,
            den: IntPoly::constant(1),
        }
    }

    /// Sum with the fewest new factors: equal denominators add numerators; a
    /// denominator that divides the other is lifted to it; otherwise the
    /// denominators are multiplied. No common factors are ever cancelled.
    pub fn add(&self, o: &PolyFrac) -> PolyFrac {
        if self.den == o.den {
            return PolyFrac {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            };
        }
        if let Some(q) = o.den.exact_div(&self.den) {
            return PolyFrac {
                num: self.num.mul(&q).add(&o.num),
                den: o.den.clone(),
            };
        }
        if let Some(q) = self.den.exact_div(&o.den) {
            return PolyFrac {
                num: self.num.add(&o.num.mul(&q)),
                den: self.den.clone(),
            };
        }
        PolyFrac {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    pub fn neg(&self) -> PolyFrac {
        PolyFrac {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &PolyFrac) -> PolyFrac {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &PolyFrac) -> PolyFrac {
        PolyFrac {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
    }
}

fn leibniz_det(m: &[Vec<IntPoly>]) -> IntPoly {
    let k = m.len();
    if k == 0 {
        return IntPoly::constant(1);
    }
    fn perms(k: usize) -> Vec<(Vec<usize>, bool)> {
        if k == 0 {
            return vec![(vec![], true)];
        }
        let mut out = Vec::new();
        for (p, even) in perms(k - 1) {
            for pos in 0..k {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                // inserting the largest element at `pos` adds k-1-pos inversions
                let flips = (k - 1 - pos) % 2 == 1;
                out.push((q, even ^ flips));
            }
        }
        out
    }
    let mut acc = IntPoly::zero();
    for (perm, even) in perms(k) {
        let term = perm
            .iter()
            .enumerate()
            .fold(IntPoly::constant(1), |t, (i, &j)| t.mul(&m[i][j]));
        acc = if even { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

fn poly_minor(m: &[Vec<IntPoly>], row: usize, col: usize) -> Vec<Vec<IntPoly>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Symbolic quotient approximation of `(I - x A_G)^{-1}` over `Z[x]`, updated
/// literally step by step: `E = I + BVCU` as fractions, `f` the product of
/// the denominators of `E`, `(fE)^{-1}` by cofactors over determinants,
/// `E^{-1} = f (fE)^{-1}` and finally `C' = C - CU E^{-1} BVC`.
#[derive(Debug, Clone)]
pub struct SymbolicQuotient {
    n: usize,
    graph: Graph,
    entries: Vec<PolyFrac>,
}

impl SymbolicQuotient {
    /// Numerators are the degree-`n` walk-count truncations, denominators 1.
    pub fn new(graph: &Graph) -> Self {
        let n = graph.n();
        let mut entries = Vec::with_capacity(n * n);
        for s in 0..n {
            let counts = walk_counts_from(graph, s, n);
            for t in 0..n {
                let coeffs = (0..=n)
                    .map(|i| BigInt::from(counts[i][t].clone()))
                    .collect();
                entries.push(PolyFrac::from_poly(IntPoly::new(coeffs)));
            }
        }
        SymbolicQuotient {
            n,
            graph: graph.clone(),
            entries,
        }
    }

    pub fn entry(&self, s: usize, t: usize) -> &PolyFrac {
        &self.entries[s * self.n + t]
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn max_degree(&self) -> (usize, usize) {
        let num = self
            .entries
            .iter()
            .map(|e| e.num.degree())
            .max()
            .unwrap_or(0);
        let den = self
            .entries
            .iter()
            .map(|e| e.den.degree())
            .max()
            .unwrap_or(0);
        (num, den)
    }

    pub fn max_bits(&self) -> (u64, u64) {
        let num = self
            .entries
            .iter()
            .map(|e| e.num.max_bits())
            .max()
            .unwrap_or(0);
        let den = self
            .entries
            .iter()
            .map(|e| e.den.max_bits())
            .max()
            .unwrap_or(0);
        (num, den)
    }

    pub fn update(&mut self, batch: &ChangeBatch) -> Result<()> {
        self.graph.apply(batch)?;
        let n = self.n;
        let d = batch.decompose(n, usize::MAX)?;
        if d.is_empty() {
            return Ok(());
        }
        let (rows, cols) = (d.rows().to_vec(), d.cols().to_vec());
        let r = rows.len();
        let c = &self.entries;
        let at = |s: usize, t: usize| &c[s * n + t];
        let b = |i: usize, l: usize| PolyFrac::from_poly(IntPoly::monomial_x(d.core(i, l)));

        // E = I + B V C U
        let mut e = vec![vec![PolyFrac::from_poly(IntPoly::zero()); r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut acc = PolyFrac::from_poly(IntPoly::constant(i64::from(i == j)));
                for (l, &col) in cols.iter().enumerate() {
                    if d.core(i, l) != 0 {
                        acc = acc.add(&b(i, l).mul(at(col, rows[j])));
                    }
                }
                e[i][j] = acc;
            }
        }
        let f = e
            .iter()
            .flatten()
            .fold(IntPoly::constant(1), |acc, x| acc.mul(&x.den));
        let fe: Vec<Vec<IntPoly>> = e
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| f.mul(&x.num).exact_div(&x.den).expect("f is a multiple"))
                    .collect()
            })
            .collect();
        let det = leibniz_det(&fe);
        // E^{-1}_{ij} = f * (-1)^{i+j} det(fE_{ji}) / det(fE)
        let mut einv = vec![vec![PolyFrac::from_poly(IntPoly::zero()); r]; r];
        for (i, row) in einv.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let minor = if r == 1 {
                    IntPoly::constant(1)
                } else {
                    leibniz_det(&poly_minor(&fe, j, i))
                };
                let cof = if (i + j) % 2 == 0 { minor } else { minor.neg() };
                *slot = PolyFrac {
                    num: f.mul(&cof),
                    den: det.clone(),
                };
            }
        }
        // BVC, r x n
        let mut bvc = vec![vec![PolyFrac::from_poly(IntPoly::zero()); n]; r];
        for (j, row) in bvc.iter_mut().enumerate() {
            for (t, slot) in row.iter_mut().enumerate() {
                let mut acc = PolyFrac::from_poly(IntPoly::zero());
                for (l, &col) in cols.iter().enumerate() {
                    if d.core(j, l) != 0 {
                        acc = acc.add(&b(j, l).mul(at(col, t)));
                    }
                }
                *slot = acc;
            }
        }
        let mut next = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                let mut x: Option<PolyFrac> = None;
                for (i, &row) in rows.iter().enumerate() {
                    for j in 0..r {
                        let term = at(s, row).mul(&einv[i][j]).mul(&bvc[j][t]);
                        x = Some(match x {
                            None => term,
                            Some(acc) => acc.add(&term),
                        });
                    }
                }
                next.push(at(s, t).sub(&x.expect("r > 0")));
            }
        }
        self.entries = next;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(density) {
                    g.insert(u, v);
                }
            }
        }
        g
    }

    fn path3() -> Graph {
        Graph::with_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn bfs_examples() {
        let g = Graph::new(4);
        assert_eq!(bfs_reach(&g, 2).unwrap(), BTreeSet::from([2]));
        assert_eq!(bfs_reach(&path3(), 0).unwrap(), BTreeSet::from([0, 1, 2]));
        let d = bfs_dist(&path3(), 0).unwrap();
        assert_eq!(d[&0], 0);
        assert_eq!(d[&2], 2);
        assert!(bfs_dist(&path3(), 3).is_err());
    }

    #[test]
    fn walk_count_examples() {
        let g = path3();
        assert_eq!(walk_count_dp(&g, 1, 1, 0), BigUint::one());
        assert_eq!(walk_count_dp(&g, 0, 1, 0), BigUint::zero());
        assert_eq!(walk_count_dp(&g, 0, 1, 1), BigUint::one());
        assert_eq!(walk_count_dp(&g, 1, 0, 1), BigUint::zero());
        let k3 = Graph::with_edges(3, [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]).unwrap();
        assert_eq!(walk_count_dp(&k3, 0, 0, 2), BigUint::from(2u32));
    }

    #[test]
    fn bfs_matches_closure_and_walks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=8);
            let g = random_graph(&mut rng, n, 0.2);
            let closure = closure_by_squaring(&g);
            for s in 0..n {
                let reach = bfs_reach(&g, s).unwrap();
                let dist = bfs_dist(&g, s).unwrap();
                let counts = walk_counts_from(&g, s, n);
                for t in 0..n {
                    assert_eq!(reach.contains(&t), closure[s][t]);
                    assert_eq!(dist.contains_key(&t), reach.contains(&t));
                    let first = (0..=n).find(|&i| !counts[i][t].is_zero());
                    assert_eq!(first, dist.get(&t).copied());
                }
            }
        }
    }

    #[test]
    fn inverse_exact_examples() {
        let id: Vec<Vec<BigInt>> = (0..3)
            .map(|i| (0..3).map(|j| BigInt::from(i64::from(i == j))).collect())
            .collect();
        let inv = inverse_exact(&id).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    inv[i][j],
                    BigRational::from_integer(BigInt::from(i64::from(i == j)))
                );
            }
        }
        let four = shifted_laplacian(&Graph::new(4), 4);
        let inv = inverse_exact(&four).unwrap();
        assert_eq!(inv[2][2], BigRational::new(BigInt::one(), BigInt::from(4)));
        let sing = vec![
            vec![BigInt::one(), BigInt::one()],
            vec![BigInt::one(), BigInt::one()],
        ];
        assert!(inverse_exact(&sing).is_err());
    }

    #[test]
    fn inverse_support_is_reachability() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let g = random_graph(&mut rng, n, 0.25);
            let a = shifted_laplacian(&g, n as i64);
            let inv = inverse_exact(&a).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let dot: BigRational = (0..n)
                        .map(|l| BigRational::from_integer(a[i][l].clone()) * &inv[l][j])
                        .sum();
                    assert_eq!(
                        dot,
                        BigRational::from_integer(BigInt::from(i64::from(i == j)))
                    );
                }
                let reach = bfs_reach(&g, i).unwrap();
                for j in 0..n {
                    assert_eq!(!inv[i][j].is_zero(), reach.contains(&j));
                }
            }
        }
    }

    #[test]
    fn poly_exact_division() {
        let h = IntPoly::new(vec![BigInt::one(), BigInt::from(-3), BigInt::from(2)]);
        let q = IntPoly::new(vec![BigInt::from(5), BigInt::one()]);
        assert_eq!(h.mul(&q).exact_div(&h), Some(q));
        assert_eq!(IntPoly::constant(7).exact_div(&h), None);
    }

    #[test]
    fn symbolic_stays_a_quotient_approximation() {
        // g/h expanded as a series must match the walk series up to degree n
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 4;
        let mut g = random_graph(&mut rng, n, 0.3);
        let mut sym = SymbolicQuotient::new(&g);
        for _ in 0..2 {
            let (u, v) = loop {
                let e = (rng.gen_range(0..n), rng.gen_range(0..n));
                if e.0 != e.1 {
                    break e;
                }
            };
            let batch = if g.contains(u, v) {
                ChangeBatch::new(vec![], vec![(u, v)]).unwrap()
            } else {
                ChangeBatch::new(vec![(u, v)], vec![]).unwrap()
            };
            g.apply(&batch).unwrap();
            sym.update(&batch).unwrap();
            for s in 0..n {
                let counts = walk_counts_from(&g, s, n);
                for t in 0..n {
                    let e = sym.entry(s, t);
                    assert_eq!(e.den.coeff(0), BigInt::one());
                    // num = den * series (mod x^{n+1})
                    for i in 0..=n {
                        let conv: BigInt = (0..=i)
                            .map(|j| e.den.coeff(j) * BigInt::from(counts[i - j][t].clone()))
                            .sum();
                        assert_eq!(e.num.coeff(i), conv, "s={s} t={t} i={i}");
                    }
                }
            }
        }
    }
}
