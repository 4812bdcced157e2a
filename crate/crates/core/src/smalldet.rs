//! Determinants and inverses of small matrices over `Z_p`.
//!
//! Two independent determinant routes live here: plain Gaussian elimination,
//! and the self-reducible characterization that only ever asks "is this
//! matrix singular?". The second one first fixes a column permutation whose
//! leading principal minors are all nonzero, then peels off one diagonal entry
//! at a time: for each `i` the unique `b_i` that makes the leading `i x i`
//! block singular (with `a_ii` replaced by `b_i`) gives
//! `det(A_i) = (a_ii - b_i) * det(A_{i-1})`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::modmath::{crr_decode_signed, gen_primes, CrrNumber, Modulus, PrimePool, Residue};

/// Dense row-major matrix over `Z_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    entries: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: u64) -> Self {
        ModMatrix {
            rows,
            cols,
            modulus,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut m = Self::zeros(n, n, modulus);
        for i in 0..n {
            m.entries[i * n + i] = 1 % modulus;
        }
        m
    }

    /// Entries are reduced modulo `modulus`.
    pub fn new(rows: usize, cols: usize, modulus: u64, entries: Vec<u64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        let entries = entries.into_iter().map(|e| e % modulus).collect();
        ModMatrix {
            rows,
            cols,
            modulus,
            entries,
        }
    }

    pub fn from_rows(rows: &[Vec<i64>], modulus: u64) -> Self {
        let m = Modulus::new(modulus);
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&v| m.reduce_i64(v)));
        }
        ModMatrix {
            rows: r,
            cols: c,
            modulus,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [u64] {
        &mut self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.cols + j] = v % self.modulus;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &ModMatrix) -> Result<ModMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        let m = Modulus::new(self.modulus);
        let mut out = ModMatrix::zeros(self.rows, other.cols, self.modulus);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                let orow = other.row(l);
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = m.mul_add(*d, a, b);
                }
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u64::from(i == j)))
    }

    /// Leading principal `i x i` block.
    pub fn leading(&self, i: usize) -> ModMatrix {
        self.submatrix(&(0..i).collect::<Vec<_>>(), &(0..i).collect::<Vec<_>>())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ModMatrix {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                entries.push(self.get(i, j));
            }
        }
        ModMatrix {
            rows: rows.len(),
            cols: cols.len(),
            modulus: self.modulus,
            entries,
        }
    }

    /// The matrix with row `i` and column `j` removed.
    pub fn minor(&self, i: usize, j: usize) -> ModMatrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.submatrix(&rows, &cols)
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }
}

/// Determinant by Gaussian elimination with pivot search.
pub fn det_elimination(m: &ModMatrix) -> Result<Residue> {
    m.require_square()?;
    let p = m.modulus;
    let field = Modulus::new(p);
    let n = m.rows;
    let mut a = m.entries.clone();
    let mut det = 1 % p;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
            return Ok(Residue::new(0, p));
        };
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = field.neg(det);
        }
        let pv = a[col * n + col];
        det = field.mul(det, pv);
        let pinv = field.inv(pv)?;
        for r in col + 1..n {
            let f = field.mul(a[r * n + col], pinv);
            if f == 0 {
                continue;
            }
            for j in col..n {
                let v = field.mul(f, a[col * n + j]);
                a[r * n + j] = field.sub(a[r * n + j], v);
            }
        }
    }
    Ok(Residue::new(det, p))
}

/// Rank over `Z_p`, computed without inversions.
pub fn rank(m: &ModMatrix) -> usize {
    let field = Modulus::new(m.modulus);
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.entries.clone();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        for j in 0..cols {
            a.swap(piv * cols + j, rank * cols + j);
        }
        let pv = a[rank * cols + col];
        for r in rank + 1..rows {
            let f = a[r * cols + col];
            if f == 0 {
                continue;
            }
            // row_r <- pv * row_r - f * row_rank
            for j in col..cols {
                let x = field.mul(pv, a[r * cols + j]);
                let y = field.mul(f, a[rank * cols + j]);
                a[r * cols + j] = field.sub(x, y);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

pub fn is_singular(m: &ModMatrix) -> bool {
    rank(m) < m.rows.min(m.cols) || m.rows != m.cols
}

/// Column permutation: position `j` of the permuted matrix holds original
/// column `mapping[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotPermutation {
    mapping: Vec<usize>,
}

impl PivotPermutation {
    pub fn identity(k: usize) -> Self {
        PivotPermutation {
            mapping: (0..k).collect(),
        }
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Self {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            assert!(m < mapping.len() && !seen[m], "not a bijection");
            seen[m] = true;
        }
        PivotPermutation { mapping }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(&self) -> i64 {
        let mut seen = vec![false; self.mapping.len()];
        let mut transpositions = 0;
        for start in 0..self.mapping.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.mapping[j];
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn apply(&self, m: &ModMatrix) -> ModMatrix {
        let rows: Vec<usize> = (0..m.rows).collect();
        m.submatrix(&rows, &self.mapping)
    }
}

/// Finds a column permutation after which every diagonal entry and every
/// leading principal minor is nonzero.
///
/// Works from the last row upward: in the cofactor expansion of the current
/// leading block along its last row some term `a_{m,l} * det(minor_{m,l})` is
/// nonzero; columns `m` and `l` are swapped (keeping `l = m` when it already
/// qualifies) and the search continues on the block one smaller.
pub fn pivot_permutation(m: &ModMatrix) -> Result<PivotPermutation> {
    m.require_square()?;
    let k = m.rows;
    if is_singular(m) {
        return Err(Error::Singular(m.modulus));
    }
    let mut work = m.clone();
    let mut mapping: Vec<usize> = (0..k).collect();
    for size in (1..=k).rev() {
        let last = size - 1;
        let block = work.leading(size);
        let qualifies = |l: usize| block.get(last, l) != 0 && !is_singular(&block.minor(last, l));
        let l = if qualifies(last) {
            last
        } else {
            (0..last)
                .find(|&l| qualifies(l))
                .expect("nonsingular block has a nonzero cofactor term")
        };
        work.swap_cols(l, last);
        mapping.swap(l, last);
    }
    Ok(PivotPermutation { mapping })
}

/// Limits for the exhaustive search in [`det_self_reducible`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfReducibleGuard {
    pub max_modulus: u64,
    pub max_size: usize,
}

impl Default for SelfReducibleGuard {
    fn default() -> Self {
        SelfReducibleGuard {
            max_modulus: 1 << 16,
            max_size: 8,
        }
    }
}

/// Determinant from singularity tests only.
pub fn det_self_reducible(m: &ModMatrix, guard: &SelfReducibleGuard) -> Result<Residue> {
    m.require_square()?;
    let p = m.modulus;
    let k = m.rows;
    if p > guard.max_modulus || k > guard.max_size {
        return Err(Error::TooLargeForSelfReducible {
            size: k,
            modulus: p,
        });
    }
    if k == 0 {
        return Ok(Residue::new(1, p));
    }
    if is_singular(m) {
        return Ok(Residue::new(0, p));
    }
    let field = Modulus::new(p);
    let perm = pivot_permutation(m)?;
    let a = perm.apply(m);
    let mut d = a.get(0, 0);
    for i in 1..k {
        let mut block = a.leading(i + 1);
        let b = (0..p)
            .find(|&b| {
                block.set(i, i, b);
                is_singular(&block)
            })
            .expect("a unique singularizing diagonal value exists");
        d = field.mul(field.sub(a.get(i, i), b), d);
    }
    if perm.sign() < 0 {
        d = field.neg(d);
    }
    Ok(Residue::new(d, p))
}

/// Which determinant routine evaluates minors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetMethod {
    #[default]
    Elimination,
    /// Falls back to elimination when the guard is exceeded.
    SelfReducible(SelfReducibleGuard),
}

pub fn determinant(m: &ModMatrix, method: DetMethod) -> Result<Residue> {
    match method {
        DetMethod::Elimination => det_elimination(m),
        DetMethod::SelfReducible(guard) => match det_self_reducible(m, &guard) {
            Err(Error::TooLargeForSelfReducible { .. }) => det_elimination(m),
            other => other,
        },
    }
}

/// Classical adjugate, `adj(M)_{ij} = (-1)^{i+j} det(M_{ji})`. Defined for
/// singular matrices too.
pub fn adjugate(m: &ModMatrix, method: DetMethod) -> Result<ModMatrix> {
    m.require_square()?;
    let k = m.rows;
    let field = Modulus::new(m.modulus);
    let mut out = ModMatrix::zeros(k, k, m.modulus);
    if k == 1 {
        out.entries[0] = 1 % m.modulus;
        return Ok(out);
    }
    for i in 0..k {
        for j in 0..k {
            let d = determinant(&m.minor(j, i), method)?.value();
            let v = if (i + j) % 2 == 0 { d } else { field.neg(d) };
            out.entries[i * k + j] = v;
        }
    }
    Ok(out)
}

/// `M^{-1}` with entries `(-1)^{i+j} det(M_{ji}) / det(M)`.
pub fn adjugate_inverse(m: &ModMatrix, method: DetMethod) -> Result<ModMatrix> {
    m.require_square()?;
    let det = determinant(m, method)?;
    if det.is_zero() {
        return Err(Error::Singular(m.modulus));
    }
    let field = Modulus::new(m.modulus);
    let dinv = field.inv(det.value())?;
    let mut adj = adjugate(m, method)?;
    for e in adj.entries.iter_mut() {
        *e = field.mul(*e, dinv);
    }
    Ok(adj)
}

/// Gauss-Jordan inverse, used for full-size initialization.
pub fn gauss_jordan_inverse(m: &ModMatrix) -> Result<ModMatrix> {
    m.require_square()?;
    let n = m.rows;
    let field = Modulus::new(m.modulus);
    let mut a = m.entries.clone();
    let mut inv = ModMatrix::identity(n, m.modulus).entries;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
            return Err(Error::Singular(m.modulus));
        };
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let pinv = field.inv(a[col * n + col])?;
        for j in 0..n {
            a[col * n + j] = field.mul(a[col * n + j], pinv);
            inv[col * n + j] = field.mul(inv[col * n + j], pinv);
        }
        let (pa, pi) = (
            a[col * n..(col + 1) * n].to_vec(),
            inv[col * n..(col + 1) * n].to_vec(),
        );
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == 0 {
                continue;
            }
            let f = field.neg(f);
            for j in 0..n {
                a[r * n + j] = field.mul_add(a[r * n + j], f, pa[j]);
                inv[r * n + j] = field.mul_add(inv[r * n + j], f, pi[j]);
            }
        }
    }
    Ok(ModMatrix {
        rows: n,
        cols: n,
        modulus: m.modulus,
        entries: inv,
    })
}

/// Determinant modulo `p` assembled from determinants modulo small primes.
///
/// Entries are lifted to integers in `[0, p)`; the Hadamard bound
/// `k^{k/2} (p-1)^k` fixes how many small primes are needed so that the
/// balanced Chinese-remainder decoding returns the integer determinant, which
/// is then reduced modulo `p`.
pub fn det_via_crr(m: &ModMatrix, method: DetMethod) -> Result<Residue> {
    m.require_square()?;
    let k = m.rows as u64;
    let p = m.modulus;
    // 2 * |det| < prod(q) is required; bits of the Hadamard bound plus one
    let hadamard_bits = ((k as f64) / 2.0 * (k.max(1) as f64).log2()
        + k as f64 * ((p - 1).max(1) as f64).log2())
    .ceil() as u64
        + 2;
    let mut pool_primes = Vec::new();
    let mut bits = 0u64;
    let mut next = 3u64;
    while bits < hadamard_bits {
        let q = gen_primes(1, next).prime(0);
        pool_primes.push(q);
        bits += crate::modmath::floor_log2(q);
        next = q + 1;
    }
    let pool = PrimePool::from_primes(pool_primes);
    let residues = pool
        .primes()
        .iter()
        .map(|&q| {
            let mq = ModMatrix::new(m.rows, m.cols, q, m.entries.clone());
            determinant(&mq, method)
        })
        .collect::<Result<Vec<_>>>()?;
    let crr = CrrNumber::from_residues(residues, hadamard_bits);
    let det: BigInt = crr_decode_signed(&crr, &pool)?;
    Ok(Residue::new(Modulus::new(p).reduce_big(&det), p))
}
