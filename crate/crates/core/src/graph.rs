//! Directed graphs, change batches and the selector/core/selector factoring
//! of sparse change matrices.
//!
//! Nodes are `0..n` inside the library; the text formats in [`crate::script`]
//! are 1-indexed and convert on parse.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<Edge>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn with_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.check_node(u)?;
            g.check_node(v)?;
            g.edges.insert((u, v));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        self.edges.insert((u, v))
    }

    pub fn remove(&mut self, u: usize, v: usize) -> bool {
        self.edges.remove(&(u, v))
    }

    pub fn has_self_loop(&self) -> Option<usize> {
        self.edges.iter().find(|(u, v)| u == v).map(|e| e.0)
    }

    pub fn check_node(&self, u: usize) -> Result<()> {
        if u < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: u + 1,
                n: self.n,
            })
        }
    }

    pub fn out_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
        }
        adj
    }

    /// Dense 0/1 adjacency matrix, row-major.
    pub fn adjacency(&self) -> Vec<u8> {
        let mut a = vec![0u8; self.n * self.n];
        for &(u, v) in &self.edges {
            a[u * self.n + v] = 1;
        }
        a
    }

    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (self.n * (self.n - 1)) as f64
    }

    /// Applies a batch after checking it against the current edge set.
    pub fn apply(&mut self, batch: &ChangeBatch) -> Result<()> {
        batch.check_against(self)?;
        for &(u, v) in &batch.deletes {
            self.edges.remove(&(u, v));
        }
        for &(u, v) in &batch.inserts {
            self.edges.insert((u, v));
        }
        Ok(())
    }
}

/// Edge insertions and deletions applied together by one low-rank update.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChangeBatch {
    pub inserts: Vec<Edge>,
    pub deletes: Vec<Edge>,
}

impl ChangeBatch {
    pub fn new(mut inserts: Vec<Edge>, mut deletes: Vec<Edge>) -> Result<Self> {
        inserts.sort_unstable();
        inserts.dedup();
        deletes.sort_unstable();
        deletes.dedup();
        if let Some(&(u, v)) = inserts.iter().find(|e| deletes.binary_search(e).is_ok()) {
            return Err(Error::ConflictingChange(u + 1, v + 1));
        }
        Ok(ChangeBatch { inserts, deletes })
    }

    pub fn is_empty(&self) -> bool {
        self.inserts.is_empty() && self.deletes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.inserts.len() + self.deletes.len()
    }

    pub fn sources(&self) -> BTreeSet<usize> {
        self.inserts
            .iter()
            .chain(&self.deletes)
            .map(|e| e.0)
            .collect()
    }

    pub fn targets(&self) -> BTreeSet<usize> {
        self.inserts
            .iter()
            .chain(&self.deletes)
            .map(|e| e.1)
            .collect()
    }

    /// Nodes incident to a changed edge.
    pub fn affected_nodes(&self) -> BTreeSet<usize> {
        let mut s = self.sources();
        s.extend(self.targets());
        s
    }

    pub fn check_width(&self, k: usize) -> Result<()> {
        let (s, t) = (self.sources().len(), self.targets().len());
        if s > k || t > k {
            return Err(Error::BatchTooWide {
                sources: s,
                targets: t,
                k,
            });
        }
        Ok(())
    }

    pub fn check_against(&self, g: &Graph) -> Result<()> {
        for &(u, v) in self.inserts.iter().chain(&self.deletes) {
            g.check_node(u)?;
            g.check_node(v)?;
        }
        if let Some(&(u, v)) = self.inserts.iter().find(|&&(u, v)| g.contains(u, v)) {
            return Err(Error::EdgePresent(u + 1, v + 1));
        }
        if let Some(&(u, v)) = self.deletes.iter().find(|&&(u, v)| !g.contains(u, v)) {
            return Err(Error::EdgeAbsent(u + 1, v + 1));
        }
        Ok(())
    }

    /// Nonzero entries of the adjacency change: `+1` per insertion, `-1` per
    /// deletion.
    pub fn adjacency_delta(&self) -> Vec<(usize, usize, i64)> {
        let mut out: Vec<_> = self
            .inserts
            .iter()
            .map(|&(u, v)| (u, v, 1))
            .chain(self.deletes.iter().map(|&(u, v)| (u, v, -1)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Factors the change of `c*I - A_G` (equivalently the `x`-free core of the
    /// change of `I - x A_G`), i.e. the negated adjacency delta.
    pub fn decompose(&self, n: usize, k: usize) -> Result<UbvDecomposition> {
        let entries: Vec<_> = self
            .adjacency_delta()
            .into_iter()
            .map(|(u, v, d)| (u, v, -d))
            .collect();
        decompose(n, &entries, Some(k))
    }
}

/// Splits a change into batches touching at most `k` sources and `k` targets.
///
/// Edges are visited in `(source, target)` order and placed into the first
/// batch that can take them. `k = 0` is treated as `1`.
pub fn batch_partition(inserts: &[Edge], deletes: &[Edge], k: usize) -> Vec<ChangeBatch> {
    let k = k.max(1);
    let mut items: Vec<(Edge, bool)> = inserts
        .iter()
        .map(|&e| (e, true))
        .chain(deletes.iter().map(|&e| (e, false)))
        .collect();
    items.sort_unstable();
    items.dedup();
    let mut batches: Vec<(ChangeBatch, BTreeSet<usize>, BTreeSet<usize>)> = Vec::new();
    for ((u, v), is_insert) in items {
        let slot = batches.iter().position(|(_, src, tgt)| {
            (src.contains(&u) || src.len() < k) && (tgt.contains(&v) || tgt.len() < k)
        });
        let idx = match slot {
            Some(i) => i,
            None => {
                batches.push((ChangeBatch::default(), BTreeSet::new(), BTreeSet::new()));
                batches.len() - 1
            }
        };
        let (batch, src, tgt) = &mut batches[idx];
        src.insert(u);
        tgt.insert(v);
        if is_insert {
            batch.inserts.push((u, v));
        } else {
            batch.deletes.push((u, v));
        }
    }
    batches.into_iter().map(|(b, _, _)| b).collect()
}

/// `M = U * B * V` where `U` selects the nonzero rows of `M`, `V` its nonzero
/// columns and `B` is `M` with all-zero rows and columns removed.
///
/// `U` and `V` are kept implicitly as the row and column index lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UbvDecomposition {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    core: Vec<i64>,
}

impl UbvDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Indices `i_1 < ... < i_r` of the nonzero rows.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Indices `j_1 < ... < j_c` of the nonzero columns.
    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn r(&self) -> usize {
        self.rows.len()
    }

    pub fn c(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    #[inline]
    pub fn core(&self, i: usize, l: usize) -> i64 {
        self.core[i * self.cols.len() + l]
    }

    /// Dense `n x r` selector.
    pub fn u_dense(&self) -> Vec<Vec<i64>> {
        let mut u = vec![vec![0; self.r()]; self.n];
        for (m, &i) in self.rows.iter().enumerate() {
            u[i][m] = 1;
        }
        u
    }

    /// Dense `c x n` selector.
    pub fn v_dense(&self) -> Vec<Vec<i64>> {
        let mut v = vec![vec![0; self.n]; self.c()];
        for (m, &j) in self.cols.iter().enumerate() {
            v[m][j] = 1;
        }
        v
    }

    pub fn b_dense(&self) -> Vec<Vec<i64>> {
        (0..self.r())
            .map(|i| (0..self.c()).map(|l| self.core(i, l)).collect())
            .collect()
    }
}

pub fn decompose(
    n: usize,
    entries: &[(usize, usize, i64)],
    k: Option<usize>,
) -> Result<UbvDecomposition> {
    let nz: Vec<_> = entries.iter().copied().filter(|e| e.2 != 0).collect();
    let rows: Vec<usize> = nz
        .iter()
        .map(|e| e.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cols: Vec<usize> = nz
        .iter()
        .map(|e| e.1)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Some(&bad) = rows.iter().chain(&cols).find(|&&x| x >= n) {
        return Err(Error::NodeOutOfRange { node: bad + 1, n });
    }
    if let Some(k) = k {
        if rows.len() > k || cols.len() > k {
            return Err(Error::BatchTooWide {
                sources: rows.len(),
                targets: cols.len(),
                k,
            });
        }
    }
    let mut core = vec![0i64; rows.len() * cols.len()];
    for (u, v, d) in nz {
        let i = rows.binary_search(&u).expect("row collected");
        let l = cols.binary_search(&v).expect("col collected");
        core[i * cols.len() + l] += d;
    }
    Ok(UbvDecomposition {
        n,
        rows,
        cols,
        core,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let inner = b.len();
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| (0..inner).map(|l| row[l] * b[l][j]).sum())
                    .collect()
            })
            .collect()
    }

    fn product(d: &UbvDecomposition) -> Vec<Vec<i64>> {
        let ub = matmul(&d.u_dense(), &d.b_dense());
        if d.is_empty() {
            return vec![vec![0; d.n()]; d.n()];
        }
        matmul(&ub, &d.v_dense())
    }

    fn dense(n: usize, entries: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; n]; n];
        for &(i, j, v) in entries {
            m[i][j] += v;
        }
        m
    }

    #[test]
    fn single_entry() {
        let d = decompose(4, &[(0, 1, 7)], None).unwrap();
        assert_eq!(d.rows(), &[0]);
        assert_eq!(d.cols(), &[1]);
        assert_eq!(d.b_dense(), vec![vec![7]]);
        assert_eq!(product(&d), dense(4, &[(0, 1, 7)]));
    }

    #[test]
    fn zero_change_is_empty() {
        let d = decompose(3, &[], Some(1)).unwrap();
        assert_eq!((d.r(), d.c()), (0, 0));
        assert_eq!(product(&d), vec![vec![0; 3]; 3]);
    }

    #[test]
    fn shared_column() {
        let e = [(0, 1, 1), (2, 1, -1)];
        let d = decompose(4, &e, Some(2)).unwrap();
        assert_eq!((d.r(), d.c()), (2, 1));
        assert_eq!(product(&d), dense(4, &e));
        assert!(matches!(
            decompose(4, &e, Some(1)),
            Err(Error::BatchTooWide { .. })
        ));
    }

    #[test]
    fn partition_examples() {
        assert_eq!(batch_partition(&[(0, 1)], &[], 2).len(), 1);
        assert!(batch_partition(&[], &[], 3).is_empty());
        let ins = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)];
        let batches = batch_partition(&ins, &[], 3);
        for b in &batches {
            assert!(b.sources().len() <= 3 && b.targets().len() <= 3);
        }
        assert_eq!(batches.iter().map(ChangeBatch::len).sum::<usize>(), 5);
    }

    #[test]
    fn conflicting_batch_rejected() {
        assert_eq!(
            ChangeBatch::new(vec![(0, 1)], vec![(0, 1)]),
            Err(Error::ConflictingChange(1, 2))
        );
    }

    #[test]
    fn apply_checks_presence() {
        let mut g = Graph::with_edges(3, [(0, 1)]).unwrap();
        let bad = ChangeBatch::new(vec![(0, 1)], vec![]).unwrap();
        assert_eq!(g.apply(&bad), Err(Error::EdgePresent(1, 2)));
        let bad = ChangeBatch::new(vec![], vec![(1, 2)]).unwrap();
        assert_eq!(g.apply(&bad), Err(Error::EdgeAbsent(2, 3)));
    }

    #[test]
    fn random_partitions_cover_and_respect_bounds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(2..12);
            let k = rng.gen_range(1..4);
            let start: Vec<Edge> = (0..rng.gen_range(0..20))
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
                .collect();
            let g0 = Graph::with_edges(n, start).unwrap();
            let mut ins = Vec::new();
            let mut del = Vec::new();
            for _ in 0..rng.gen_range(0..15) {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if g0.contains(u, v) {
                    del.push((u, v));
                } else {
                    ins.push((u, v));
                }
            }
            ins.sort_unstable();
            ins.dedup();
            del.sort_unstable();
            del.dedup();
            let mut whole = g0.clone();
            whole
                .apply(&ChangeBatch::new(ins.clone(), del.clone()).unwrap())
                .unwrap();
            let mut stepwise = g0.clone();
            for b in batch_partition(&ins, &del, k) {
                b.check_width(k).unwrap();
                let d = b.decompose(n, k).unwrap();
                let expect: Vec<_> = b
                    .adjacency_delta()
                    .iter()
                    .map(|&(u, v, x)| (u, v, -x))
                    .collect();
                assert_eq!(product(&d), dense(n, &expect));
                stepwise.apply(&b).unwrap();
            }
            assert_eq!(whole, stepwise);
        }
    }
}
