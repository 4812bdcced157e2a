//! Prime generation, prime-field scalar arithmetic and Chinese-remainder
//! encoding/decoding.
//!
//! Every engine in this crate works on word-size primes (below `2^62`) and
//! only reconciles residues when a query needs an integer answer.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Upper limit (exclusive) for every modulus handled by [`Modulus`].
pub const MAX_MODULUS: u64 = 1 << 62;

/// Witnesses that make Miller-Rabin deterministic for every `n < 2^64`.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// A prime modulus with precomputed Barrett constants.
///
/// Values are plain residues in `[0, p)`; products of two residues are reduced
/// without a 128-bit division.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    p: u64,
    bits: u32,
    barrett: u128,
}

impl Modulus {
    pub fn new(p: u64) -> Self {
        assert!((2..MAX_MODULUS).contains(&p), "modulus {p} out of range");
        let bits = 64 - p.leading_zeros();
        let barrett = (1u128 << (2 * bits)) / p as u128;
        Modulus { p, bits, barrett }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64);
        r as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.bits <= 32 {
            return (a * b) % self.p;
        }
        let x = a as u128 * b as u128;
        let q = ((x >> (self.bits - 1)) * self.barrett) >> (self.bits + 1);
        let mut r = (x - q * self.p as u128) as u64;
        while r >= self.p {
            r -= self.p;
        }
        r
    }

    /// `acc + a * b`
    #[inline]
    pub fn mul_add(&self, acc: u64, a: u64, b: u64) -> u64 {
        self.add(acc, self.mul(a, b))
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::NotInvertible {
                value: a,
                modulus: self.p,
            });
        }
        let (mut r0, mut r1) = (self.p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return Err(Error::NotInvertible {
                value: a,
                modulus: self.p,
            });
        }
        Ok(t0.rem_euclid(self.p as i128) as u64)
    }

    /// Reduces an arbitrary integer into `[0, p)`.
    pub fn reduce_big(&self, x: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let r = ((x % &m) + &m) % &m;
        r.to_u64_digits().1.first().copied().unwrap_or(0)
    }
}

/// An element of `Z_p` tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: u64, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        Residue {
            value: value % modulus,
            modulus,
        }
    }

    pub fn from_i64(value: i64, modulus: u64) -> Self {
        assert!((2..MAX_MODULUS).contains(&modulus));
        Residue {
            value: value.rem_euclid(modulus as i64) as u64,
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

/// Multiplicative inverse of a nonzero residue.
pub fn mod_inv(a: Residue) -> Result<Residue> {
    let inv = Modulus::new(a.modulus).inv(a.value)?;
    Ok(Residue::new(inv, a.modulus))
}

fn pow_mod_u128(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc: u64 = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % n as u128) as u64;
        }
        base = (base as u128 * base as u128 % n as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Ordered list of distinct primes, each with a validity flag.
///
/// A cleared flag is only restored by [`PrimePool::reset`], which marks the
/// start of a new epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimePool {
    primes: Vec<u64>,
    valid: Vec<bool>,
}

impl PrimePool {
    /// Builds a pool from explicit primes. Panics on composites or duplicates.
    pub fn from_primes(primes: Vec<u64>) -> Self {
        for (i, &p) in primes.iter().enumerate() {
            assert!(is_prime(p), "{p} is not prime");
            assert!(p < MAX_MODULUS, "{p} exceeds the word-size limit");
            assert!(!primes[..i].contains(&p), "duplicate prime {p}");
        }
        let valid = vec![true; primes.len()];
        PrimePool { primes, valid }
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn prime(&self, idx: usize) -> u64 {
        self.primes[idx]
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.valid[idx]
    }

    pub fn invalidate(&mut self, idx: usize) {
        self.valid[idx] = false;
    }

    /// Restores every flag (start of a new epoch).
    pub fn reset(&mut self) {
        self.valid.iter_mut().for_each(|v| *v = true);
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn valid_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.valid
            .iter()
            .enumerate()
            .filter(|(_, v)| **v)
            .map(|(i, _)| i)
    }

    pub fn valid_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.valid_indices().map(|i| self.primes[i])
    }

    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.iter().position(|&q| q == p)
    }

    /// Lower bound `b` with `2^b <= product of valid primes`.
    pub fn valid_bits(&self) -> u64 {
        self.valid_primes().map(floor_log2).sum()
    }

    /// Lower bound on the bit length of the product of all primes.
    pub fn total_bits(&self) -> u64 {
        self.primes.iter().map(|&p| floor_log2(p)).sum()
    }
}

pub(crate) fn floor_log2(p: u64) -> u64 {
    63 - p.leading_zeros() as u64
}

/// The `count` smallest primes that are at least `min_value`.
pub fn gen_primes(count: usize, min_value: u64) -> PrimePool {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = min_value.max(2);
    while primes.len() < count {
        if is_prime(candidate) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    PrimePool::from_primes_unchecked(primes)
}

/// `count` distinct random primes with exactly `bits` bits (`2 <= bits <= 62`).
pub fn random_primes<R: Rng + ?Sized>(count: usize, bits: u32, rng: &mut R) -> PrimePool {
    assert!((2..=62).contains(&bits), "prime width {bits} unsupported");
    let lo = 1u64 << (bits - 1);
    let hi = (1u64 << bits) - 1;
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    while primes.len() < count {
        let c = rng.gen_range(lo..=hi) | 1;
        if is_prime(c) && !primes.contains(&c) {
            primes.push(c);
        }
    }
    PrimePool::from_primes_unchecked(primes)
}

impl PrimePool {
    fn from_primes_unchecked(primes: Vec<u64>) -> Self {
        let valid = vec![true; primes.len()];
        PrimePool { primes, valid }
    }
}

/// An integer held as residues modulo every pool prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrrNumber {
    residues: Vec<Residue>,
    bound: u64,
}

impl CrrNumber {
    pub fn from_residues(residues: Vec<Residue>, bound: u64) -> Self {
        CrrNumber { residues, bound }
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    /// Bit-length bound on the absolute value of the encoded integer.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(Residue::is_zero)
    }
}

fn product(primes: impl Iterator<Item = u64>) -> BigUint {
    primes.fold(BigUint::one(), |acc, p| acc * p)
}

pub fn crr_encode(x: &BigUint, pool: &PrimePool) -> Result<CrrNumber> {
    let n = product(pool.primes.iter().copied());
    if x >= &n {
        return Err(Error::Range {
            bits: pool.total_bits(),
        });
    }
    let residues = pool
        .primes
        .iter()
        .map(|&p| {
            let r = x % p;
            Residue::new(r.to_u64_digits().first().copied().unwrap_or(0), p)
        })
        .collect();
    Ok(CrrNumber {
        residues,
        bound: x.bits(),
    })
}

/// Balanced encoding: accepts `|x| < N/2`.
pub fn crr_encode_signed(x: &BigInt, pool: &PrimePool) -> Result<CrrNumber> {
    let n = product(pool.primes.iter().copied());
    let mag = x.magnitude();
    if mag * 2u32 >= n {
        return Err(Error::Range {
            bits: pool.total_bits(),
        });
    }
    let residues = pool
        .primes
        .iter()
        .map(|&p| Residue::new(Modulus::new(p).reduce_big(x), p))
        .collect();
    Ok(CrrNumber {
        residues,
        bound: mag.bits(),
    })
}

/// Recovers `x in [0, N)` from the residues at the valid pool primes, where
/// `N` is the product of those primes, as `(sum_i a_i h_i C_i) mod N`.
pub fn crr_decode(c: &CrrNumber, pool: &PrimePool) -> Result<BigUint> {
    let (x, _) = decode_with_modulus(c, pool)?;
    Ok(x)
}

/// Balanced decoding: returns the representative in `(-N/2, N/2]`.
pub fn crr_decode_signed(c: &CrrNumber, pool: &PrimePool) -> Result<BigInt> {
    let (x, n) = decode_with_modulus(c, pool)?;
    if &x * 2u32 > n {
        Ok(BigInt::from_biguint(Sign::Plus, x) - BigInt::from_biguint(Sign::Plus, n))
    } else {
        Ok(BigInt::from_biguint(Sign::Plus, x))
    }
}

fn decode_with_modulus(c: &CrrNumber, pool: &PrimePool) -> Result<(BigUint, BigUint)> {
    if c.residues.len() != pool.len() {
        return Err(Error::Dimension(format!(
            "{} residues for a pool of {} primes",
            c.residues.len(),
            pool.len()
        )));
    }
    for (r, &p) in c.residues.iter().zip(&pool.primes) {
        if r.modulus != p {
            return Err(Error::ModulusMismatch(r.modulus, p));
        }
    }
    let used: Vec<usize> = pool.valid_indices().collect();
    if used.is_empty() {
        return Err(Error::EmptyPool);
    }
    let n = product(used.iter().map(|&i| pool.primes[i]));
    let mut sum = BigUint::zero();
    for &i in &used {
        let p = pool.primes[i];
        let cofactor = &n / p;
        let m = Modulus::new(p);
        let cof_mod = (&cofactor % p)
            .to_u64_digits()
            .first()
            .copied()
            .unwrap_or(0);
        let h = m.inv(cof_mod)?;
        let coeff = m.mul(c.residues[i].value, h);
        sum += cofactor * coeff;
    }
    Ok((sum % &n, n))
}

/// Signed convenience wrapper used by tests and examples.
pub fn balanced(x: &BigInt, modulus: &BigUint) -> BigInt {
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let r = ((x % &m) + &m) % &m;
    if (&r * 2) > m {
        r - m
    } else {
        r
    }
}
