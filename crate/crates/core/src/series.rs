//! Power series over `Z_p` truncated at a fixed degree `m`, and matrices of
//! them.

use crate::error::{Error, Result};
use crate::modmath::Modulus;

/// `c_0 + c_1 x + ... + c_m x^m` with coefficients in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<u64>,
    modulus: u64,
}

impl TruncatedSeries {
    /// Pads with zeros or truncates `coeffs` to exactly `m + 1` entries.
    pub fn new(mut coeffs: Vec<u64>, m: usize, modulus: u64) -> Self {
        coeffs.resize(m + 1, 0);
        let md = Modulus::new(modulus);
        for c in &mut coeffs {
            *c = md.reduce(*c);
        }
        TruncatedSeries { coeffs, modulus }
    }

    pub fn from_i64(coeffs: &[i64], m: usize, modulus: u64) -> Self {
        let md = Modulus::new(modulus);
        let v = coeffs.iter().map(|&c| md.reduce_i64(c)).collect();
        TruncatedSeries::new(v, m, modulus)
    }

    pub fn zero(m: usize, modulus: u64) -> Self {
        TruncatedSeries {
            coeffs: vec![0; m + 1],
            modulus,
        }
    }

    pub fn one(m: usize, modulus: u64) -> Self {
        let mut s = Self::zero(m, modulus);
        s.coeffs[0] = 1 % modulus;
        s
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Result<u64> {
        self.coeffs.get(i).copied().ok_or(Error::DegreeExceeded {
            index: i,
            degree: self.degree_bound(),
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.coeffs[0] == 1
    }

    /// Index of the first nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    fn check(&self, o: &TruncatedSeries) -> Result<Modulus> {
        if self.modulus != o.modulus || self.coeffs.len() != o.coeffs.len() {
            return Err(Error::SeriesMismatch);
        }
        Ok(Modulus::new(self.modulus))
    }
}

pub fn series_add(g: &TruncatedSeries, h: &TruncatedSeries) -> Result<TruncatedSeries> {
    let md = g.check(h)?;
    let coeffs = g
        .coeffs
        .iter()
        .zip(&h.coeffs)
        .map(|(&a, &b)| md.add(a, b))
        .collect();
    Ok(TruncatedSeries {
        coeffs,
        modulus: g.modulus,
    })
}

pub fn series_sub(g: &TruncatedSeries, h: &TruncatedSeries) -> Result<TruncatedSeries> {
    let md = g.check(h)?;
    let coeffs = g
        .coeffs
        .iter()
        .zip(&h.coeffs)
        .map(|(&a, &b)| md.sub(a, b))
        .collect();
    Ok(TruncatedSeries {
        coeffs,
        modulus: g.modulus,
    })
}

pub fn series_mul(g: &TruncatedSeries, h: &TruncatedSeries) -> Result<TruncatedSeries> {
    let md = g.check(h)?;
    let mut out = vec![0; g.coeffs.len()];
    mul_acc(&md, &mut out, &g.coeffs, &h.coeffs);
    Ok(TruncatedSeries {
        coeffs: out,
        modulus: g.modulus,
    })
}

/// The `d` with `g d = 1` up to degree `m`.
pub fn series_recip(g: &TruncatedSeries) -> Result<TruncatedSeries> {
    let md = Modulus::new(g.modulus);
    let coeffs = recip_slice(&md, &g.coeffs)?;
    Ok(TruncatedSeries {
        coeffs,
        modulus: g.modulus,
    })
}

/// `out += a * b`, truncated at `out.len()`.
#[inline]
pub(crate) fn mul_acc(md: &Modulus, out: &mut [u64], a: &[u64], b: &[u64]) {
    let len = out.len();
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0 {
            continue;
        }
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o = md.mul_add(*o, ai, bj);
        }
    }
}

/// `out -= a * b`, truncated at `out.len()`.
#[inline]
pub(crate) fn mul_sub(md: &Modulus, out: &mut [u64], a: &[u64], b: &[u64]) {
    let len = out.len();
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0 {
            continue;
        }
        let nai = md.neg(ai);
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o = md.mul_add(*o, nai, bj);
        }
    }
}

pub(crate) fn recip_slice(md: &Modulus, c: &[u64]) -> Result<Vec<u64>> {
    let inv0 = md.inv(c[0])?;
    let ninv0 = md.neg(inv0);
    let mut d = vec![0; c.len()];
    d[0] = inv0;
    for j in 1..c.len() {
        let mut acc = 0;
        for i in 1..=j {
            acc = md.mul_add(acc, c[i], d[j - i]);
        }
        d[j] = md.mul(ninv0, acc);
    }
    Ok(d)
}

/// Dense matrix of truncated series sharing one degree bound and modulus.
///
/// Stored flat: entry `(i, j)` occupies `m + 1` consecutive words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    m: usize,
    modulus: u64,
    data: Vec<u64>,
}

impl SeriesMatrix {
    pub fn zeros(rows: usize, cols: usize, m: usize, modulus: u64) -> Self {
        SeriesMatrix {
            rows,
            cols,
            m,
            modulus,
            data: vec![0; rows * cols * (m + 1)],
        }
    }

    pub fn identity(n: usize, m: usize, modulus: u64) -> Self {
        let mut s = Self::zeros(n, n, m, modulus);
        for i in 0..n {
            s.entry_mut(i, i)[0] = 1 % modulus;
        }
        s
    }

    /// Builds from row-major entries, which must all share `m` and `p`.
    pub fn from_entries(rows: usize, cols: usize, entries: &[TruncatedSeries]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let first = entries
            .first()
            .ok_or_else(|| Error::Dimension("empty series matrix".into()))?;
        let (m, modulus) = (first.degree_bound(), first.modulus());
        let mut out = Self::zeros(rows, cols, m, modulus);
        for (idx, e) in entries.iter().enumerate() {
            if e.degree_bound() != m || e.modulus() != modulus {
                return Err(Error::SeriesMismatch);
            }
            out.entry_mut(idx / cols, idx % cols)
                .copy_from_slice(e.coeffs());
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree_bound(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &[u64] {
        let w = self.m + 1;
        let off = (i * self.cols + j) * w;
        &self.data[off..off + w]
    }

    #[inline]
    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut [u64] {
        let w = self.m + 1;
        let off = (i * self.cols + j) * w;
        &mut self.data[off..off + w]
    }

    pub fn get(&self, i: usize, j: usize) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.entry(i, j).to_vec(),
            modulus: self.modulus,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, s: &TruncatedSeries) -> Result<()> {
        if s.degree_bound() != self.m || s.modulus() != self.modulus {
            return Err(Error::SeriesMismatch);
        }
        self.entry_mut(i, j).copy_from_slice(s.coeffs());
        Ok(())
    }

    /// Is the matrix of constant coefficients the identity?
    pub fn is_normalized(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| self.entry(i, j)[0] == u64::from(i == j)))
    }

    fn check_compatible(&self, o: &SeriesMatrix) -> Result<()> {
        if self.m != o.m || self.modulus != o.modulus {
            return Err(Error::SeriesMismatch);
        }
        Ok(())
    }
}

pub fn polymat_mul(a: &SeriesMatrix, b: &SeriesMatrix) -> Result<SeriesMatrix> {
    a.check_compatible(b)?;
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let md = Modulus::new(a.modulus);
    let mut out = SeriesMatrix::zeros(a.rows, b.cols, a.m, a.modulus);
    for i in 0..a.rows {
        for l in 0..a.cols {
            let ail = a.entry(i, l);
            if ail.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..b.cols {
                mul_acc(&md, out.entry_mut(i, j), ail, b.entry(l, j));
            }
        }
    }
    Ok(out)
}

pub fn polymat_add(a: &SeriesMatrix, b: &SeriesMatrix) -> Result<SeriesMatrix> {
    a.check_compatible(b)?;
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Dimension("matrix sum shapes differ".into()));
    }
    let md = Modulus::new(a.modulus);
    let mut out = a.clone();
    for (o, &y) in out.data.iter_mut().zip(&b.data) {
        *o = md.add(*o, y);
    }
    Ok(out)
}

/// Inverse of a matrix whose constant coefficients form the identity, by
/// Gauss-Jordan elimination with series reciprocals as pivot inverses.
pub fn polymat_inverse_normalized(e: &SeriesMatrix) -> Result<SeriesMatrix> {
    if !e.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let n = e.rows;
    let md = Modulus::new(e.modulus);
    let mut a = e.clone();
    let mut inv = SeriesMatrix::identity(n, e.m, e.modulus);
    let w = e.m + 1;
    let mut tmp = vec![0; w];
    for col in 0..n {
        // the pivot keeps constant term 1: earlier eliminations only subtract
        // multiples of x
        let piv = recip_slice(&md, a.entry(col, col))?;
        scale_row(&md, &mut a, col, &piv, &mut tmp);
        scale_row(&md, &mut inv, col, &piv, &mut tmp);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a.entry(r, col).to_vec();
            if factor.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..n {
                let src = a.entry(col, j).to_vec();
                mul_sub(&md, a.entry_mut(r, j), &factor, &src);
                let src = inv.entry(col, j).to_vec();
                mul_sub(&md, inv.entry_mut(r, j), &factor, &src);
            }
        }
    }
    Ok(inv)
}

fn scale_row(md: &Modulus, a: &mut SeriesMatrix, row: usize, by: &[u64], tmp: &mut [u64]) {
    for j in 0..a.cols {
        tmp.fill(0);
        mul_acc(md, tmp, a.entry(row, j), by);
        a.entry_mut(row, j).copy_from_slice(tmp);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const P: u64 = 1_000_000_007;

    fn random_series(rng: &mut impl Rng, m: usize, p: u64, normalized: bool) -> TruncatedSeries {
        let mut c: Vec<u64> = (0..=m).map(|_| rng.gen_range(0..p)).collect();
        if normalized {
            c[0] = 1;
        }
        TruncatedSeries::new(c, m, p)
    }

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize, m: usize, p: u64) -> SeriesMatrix {
        let e: Vec<_> = (0..r * c)
            .map(|_| random_series(rng, m, p, false))
            .collect();
        SeriesMatrix::from_entries(r, c, &e).unwrap()
    }

    #[test]
    fn add_examples() {
        let g = TruncatedSeries::from_i64(&[3, 1, 4], 2, P);
        assert_eq!(series_add(&g, &TruncatedSeries::zero(2, P)).unwrap(), g);
        let a = TruncatedSeries::from_i64(&[1, 1], 2, P);
        let b = TruncatedSeries::from_i64(&[1, -1], 2, P);
        assert_eq!(
            series_add(&a, &b).unwrap(),
            TruncatedSeries::from_i64(&[2], 2, P)
        );
        assert_eq!(
            series_add(&a, &TruncatedSeries::zero(3, P)),
            Err(Error::SeriesMismatch)
        );
        assert_eq!(
            series_add(&a, &TruncatedSeries::zero(2, 7)),
            Err(Error::SeriesMismatch)
        );
    }

    #[test]
    fn mul_examples() {
        let g = TruncatedSeries::from_i64(&[3, 1, 4], 2, P);
        assert_eq!(series_mul(&g, &TruncatedSeries::one(2, P)).unwrap(), g);
        let a = TruncatedSeries::from_i64(&[1, 1], 2, P);
        let b = TruncatedSeries::from_i64(&[1, -1], 2, P);
        assert_eq!(
            series_mul(&a, &b).unwrap(),
            TruncatedSeries::from_i64(&[1, 0, -1], 2, P)
        );
    }

    #[test]
    fn recip_examples() {
        let one = TruncatedSeries::one(5, P);
        assert_eq!(series_recip(&one).unwrap(), one);
        let g = TruncatedSeries::from_i64(&[1, -1], 3, P);
        assert_eq!(
            series_recip(&g).unwrap(),
            TruncatedSeries::from_i64(&[1, 1, 1, 1], 3, P)
        );
        let bad = TruncatedSeries::from_i64(&[0, 1], 3, P);
        assert!(matches!(
            series_recip(&bad),
            Err(Error::NotInvertible { .. })
        ));
        // any invertible constant term is accepted
        let g = TruncatedSeries::from_i64(&[2, 5, 7], 2, 11);
        let d = series_recip(&g).unwrap();
        assert_eq!(series_mul(&g, &d).unwrap(), TruncatedSeries::one(2, 11));
    }

    #[test]
    fn inverse_examples() {
        let id = SeriesMatrix::identity(3, 4, P);
        assert_eq!(polymat_inverse_normalized(&id).unwrap(), id);
        let e = SeriesMatrix::from_entries(
            2,
            2,
            &[
                TruncatedSeries::one(3, P),
                TruncatedSeries::from_i64(&[0, 1], 3, P),
                TruncatedSeries::zero(3, P),
                TruncatedSeries::one(3, P),
            ],
        )
        .unwrap();
        let inv = polymat_inverse_normalized(&e).unwrap();
        assert_eq!(inv.get(0, 1), TruncatedSeries::from_i64(&[0, -1], 3, P));
        assert_eq!(
            polymat_mul(&e, &inv).unwrap(),
            SeriesMatrix::identity(2, 3, P)
        );
        let mut bad = e.clone();
        bad.entry_mut(1, 1)[0] = 2;
        assert_eq!(polymat_inverse_normalized(&bad), Err(Error::NotNormalized));
    }

    #[test]
    fn mul_examples_matrix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 3, 3, 5, P);
        assert_eq!(
            polymat_mul(&a, &SeriesMatrix::identity(3, 5, P)).unwrap(),
            a
        );
        let b = random_matrix(&mut rng, 3, 3, 5, P);
        let c = random_matrix(&mut rng, 3, 3, 5, P);
        let left = polymat_mul(&polymat_mul(&a, &b).unwrap(), &c).unwrap();
        let right = polymat_mul(&a, &polymat_mul(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
        let g = random_series(&mut rng, 5, P, false);
        let h = random_series(&mut rng, 5, P, false);
        let gm = SeriesMatrix::from_entries(1, 1, std::slice::from_ref(&g)).unwrap();
        let hm = SeriesMatrix::from_entries(1, 1, std::slice::from_ref(&h)).unwrap();
        assert_eq!(
            polymat_mul(&gm, &hm).unwrap().get(0, 0),
            series_mul(&g, &h).unwrap()
        );
        let wide = random_matrix(&mut rng, 2, 3, 5, P);
        assert!(polymat_mul(&wide, &wide).is_err());
    }

    fn leibniz(m: &SeriesMatrix) -> TruncatedSeries {
        let k = m.rows();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut acc = TruncatedSeries::zero(m.degree_bound(), m.modulus());
        // Heap's algorithm with parity tracking
        fn visit(
            perm: &mut Vec<usize>,
            size: usize,
            even: &mut bool,
            m: &SeriesMatrix,
            acc: &mut TruncatedSeries,
        ) {
            if size <= 1 {
                let mut t = TruncatedSeries::one(m.degree_bound(), m.modulus());
                for (i, &j) in perm.iter().enumerate() {
                    t = series_mul(&t, &m.get(i, j)).unwrap();
                }
                *acc = if *even {
                    series_add(acc, &t).unwrap()
                } else {
                    series_sub(acc, &t).unwrap()
                };
                return;
            }
            for i in 0..size {
                visit(perm, size - 1, even, m, acc);
                if i + 1 < size {
                    if size.is_multiple_of(2) {
                        perm.swap(i, size - 1);
                    } else {
                        perm.swap(0, size - 1);
                    }
                    *even = !*even;
                }
            }
        }
        let mut even = true;
        visit(&mut perm, k, &mut even, m, &mut acc);
        acc
    }

    fn minor(m: &SeriesMatrix, row: usize, col: usize) -> SeriesMatrix {
        let k = m.rows();
        let mut e = Vec::new();
        for i in (0..k).filter(|&i| i != row) {
            for j in (0..k).filter(|&j| j != col) {
                e.push(m.get(i, j));
            }
        }
        SeriesMatrix::from_entries(k - 1, k - 1, &e).unwrap()
    }

    #[test]
    fn elimination_matches_adjugate_route() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for k in 2..=4 {
            for _ in 0..5 {
                let m = 6;
                let mut e = random_matrix(&mut rng, k, k, m, 101);
                for i in 0..k {
                    for j in 0..k {
                        e.entry_mut(i, j)[0] = u64::from(i == j);
                    }
                }
                let inv = polymat_inverse_normalized(&e).unwrap();
                let det = leibniz(&e);
                assert!(det.is_normalized());
                let rdet = series_recip(&det).unwrap();
                for i in 0..k {
                    for j in 0..k {
                        let mut cof = leibniz(&minor(&e, j, i));
                        if (i + j) % 2 == 1 {
                            cof = series_sub(&TruncatedSeries::zero(m, 101), &cof).unwrap();
                        }
                        assert_eq!(inv.get(i, j), series_mul(&cof, &rdet).unwrap());
                    }
                }
            }
        }
    }

    fn agreeing(rng: &mut impl Rng, g: &TruncatedSeries, extra: usize) -> Vec<u64> {
        let mut c = g.coeffs().to_vec();
        c.extend((0..extra).map(|_| rng.gen_range(0..g.modulus())));
        c
    }

    #[test]
    fn truncation_soundness() {
        // g', h' of higher degree agreeing with g, h up to m give the same
        // sum, product and reciprocal up to m
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for m in [4, 9] {
            let g = random_series(&mut rng, m, P, true);
            let h = random_series(&mut rng, m, P, true);
            let big = m + 6;
            let g2 = TruncatedSeries::new(agreeing(&mut rng, &g, 6), big, P);
            let h2 = TruncatedSeries::new(agreeing(&mut rng, &h, 6), big, P);
            let cut = |s: TruncatedSeries| TruncatedSeries::new(s.coeffs().to_vec(), m, P);
            assert_eq!(
                series_add(&g, &h).unwrap(),
                cut(series_add(&g2, &h2).unwrap())
            );
            assert_eq!(
                series_mul(&g, &h).unwrap(),
                cut(series_mul(&g2, &h2).unwrap())
            );
            assert_eq!(series_recip(&g).unwrap(), cut(series_recip(&g2).unwrap()));
        }
    }

    proptest! {
        #[test]
        fn add_sub_roundtrip(seed in any::<u64>(), m in 0usize..12) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_series(&mut rng, m, P, false);
            let h = random_series(&mut rng, m, P, false);
            prop_assert_eq!(series_sub(&series_add(&g, &h).unwrap(), &h).unwrap(), g);
        }

        #[test]
        fn mul_associative(seed in any::<u64>(), m in 0usize..12) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_series(&mut rng, m, P, false);
            let b = random_series(&mut rng, m, P, false);
            let c = random_series(&mut rng, m, P, false);
            prop_assert_eq!(
                series_mul(&series_mul(&a, &b).unwrap(), &c).unwrap(),
                series_mul(&a, &series_mul(&b, &c).unwrap()).unwrap()
            );
        }

        #[test]
        fn recip_involution(seed in any::<u64>(), m in 0usize..16) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_series(&mut rng, m, P, true);
            let d = series_recip(&g).unwrap();
            prop_assert_eq!(series_mul(&g, &d).unwrap(), TruncatedSeries::one(m, P));
            prop_assert_eq!(series_recip(&d).unwrap(), g);
        }

        #[test]
        fn normalized_always_invertible(seed in any::<u64>(), k in 1usize..5, m in 0usize..8) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut e = random_matrix(&mut rng, k, k, m, P);
            for i in 0..k {
                for j in 0..k {
                    e.entry_mut(i, j)[0] = u64::from(i == j);
                }
            }
            let inv = polymat_inverse_normalized(&e).unwrap();
            prop_assert_eq!(inv.degree_bound(), m);
            prop_assert_eq!(polymat_mul(&e, &inv).unwrap(), SeriesMatrix::identity(k, m, P));
        }
    }
}
