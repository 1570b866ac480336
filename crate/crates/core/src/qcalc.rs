//! Gaussian polynomials `[n, i]_q` with integer coefficients.
//!
//! The table is filled by the Pascal recurrence
//! `[n, i] = [n-1, i-1] + q^i [n-1, i]` and memoized process-wide behind a
//! read-write lock, so concurrent readers never block each other once the
//! rows they need exist.

use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::padic::PadicInt;

/// Largest `n` whose Gaussian coefficients fit in `i64`.
pub const MAX_QBINOM_N: u64 = 66;

/// Integer polynomial in `q`, ascending coefficients, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QPoly {
    coeffs: Vec<i64>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<i64>) -> QPoly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> QPoly {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> QPoly {
        QPoly { coeffs: vec![1] }
    }

    /// `q^k`.
    pub fn monomial(k: usize) -> QPoly {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        QPoly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        QPoly::new(c)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: usize) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.coeffs);
        QPoly { coeffs: c }
    }

    pub fn coeff(&self, k: usize) -> i64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn eval_i64(&self, x: i64) -> i64 {
        self.coeffs.iter().rev().fold(0, |acc, c| acc * x + c)
    }

    /// Horner evaluation in p-adic arithmetic.
    pub fn eval(&self, x: &PadicInt) -> PadicInt {
        let ctx = x.ctx();
        self.coeffs.iter().rev().fold(ctx.zero(), |acc, &c| {
            acc.mul_unchecked(x).add_unchecked(&ctx.int(c))
        })
    }
}

type Table = Vec<Vec<QPoly>>;

fn table() -> &'static RwLock<Table> {
    static TABLE: OnceLock<RwLock<Table>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![vec![QPoly::one()]]))
}

/// The Gaussian polynomial `[n, i]_q`; zero when `i < 0` or `i > n`.
///
/// # Panics
///
/// If `n > MAX_QBINOM_N`, where coefficients would overflow `i64`.
pub fn qbinom(n: u64, i: i64) -> QPoly {
    assert!(n <= MAX_QBINOM_N, "qbinom: n = {n} exceeds {MAX_QBINOM_N}");
    if i < 0 || i as u64 > n {
        return QPoly::zero();
    }
    let (n, i) = (n as usize, i as usize);
    {
        let t = table().read().unwrap();
        if let Some(row) = t.get(n) {
            return row[i].clone();
        }
    }
    let mut t = table().write().unwrap();
    while t.len() <= n {
        let prev = t.last().unwrap();
        let m = prev.len();
        let row: Vec<QPoly> = (0..=m)
            .map(|k| {
                let left = if k == 0 {
                    QPoly::zero()
                } else {
                    prev[k - 1].clone()
                };
                let right = prev.get(k).map(|r| r.shift(k)).unwrap_or_default();
                left.add(&right)
            })
            .collect();
        t.push(row);
    }
    t[n][i].clone()
}

/// `[n, i]_x` evaluated at a p-adic integer.
pub fn qbinom_eval(n: u64, i: i64, x: &PadicInt) -> PadicInt {
    qbinom(n, i).eval(x)
}

/// Ordinary binomial coefficient; zero outside `0 <= k <= n`.
pub fn binom(n: u64, k: i64) -> u64 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}
