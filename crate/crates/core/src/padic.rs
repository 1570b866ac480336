//! Capped-precision p-adic integers and scaled p-adic rationals.
//!
//! A [`PadicInt`] is an element of `Z_p` known modulo `p^N`, stored as its
//! canonical residue in `[0, p^N)`. A [`PadicScaled`] is an element of `Q_p`
//! written as `p^val * unit` where `unit` is a p-adic unit known to `prec`
//! significant digits. All values are immutable and `Send + Sync`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest precision exponent accepted by [`make_context`].
pub const MAX_PRECISION: u32 = 4096;

/// Shared parameters for one p-adic computation: the odd prime `p`, the
/// precision exponent `N`, and a generator `q` of `(Z/p^2)^x` together with
/// `q_hat = q^(p-1)`.
#[derive(Debug)]
pub struct PadicContext {
    p: u64,
    q: u64,
    precision: u32,
    modulus: BigUint,
    /// `p^0 ..= p^N`.
    powers: Vec<BigUint>,
    q_hat: BigUint,
}

pub type Ctx = Arc<PadicContext>;

/// Validates `(p, q, N)` and builds a shared context.
pub fn make_context(p: u64, q: u64, precision: u32) -> Result<Ctx> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p >= 1 << 31 {
        return Err(Error::BadPrecision(format!("prime {p} too large")));
    }
    if precision < 1 {
        return Err(Error::BadPrecision(format!("N = {precision} must be >= 1")));
    }
    if precision > MAX_PRECISION {
        return Err(Error::BadPrecision(format!(
            "N = {precision} exceeds the supported maximum {MAX_PRECISION}"
        )));
    }
    let p2 = p * p;
    if q < 2 || q >= p2 {
        return Err(Error::NotPrimitive {
            p,
            q,
            order: 0,
            expected: p * (p - 1),
        });
    }
    let order = order_mod_p2(q, p);
    if order != p * (p - 1) {
        return Err(Error::NotPrimitive {
            p,
            q,
            order,
            expected: p * (p - 1),
        });
    }
    Ok(build_context(p, q, precision))
}

fn build_context(p: u64, q: u64, precision: u32) -> Ctx {
    let pb = BigUint::from(p);
    let mut powers = Vec::with_capacity(precision as usize + 1);
    powers.push(BigUint::one());
    for i in 0..precision as usize {
        let next = &powers[i] * &pb;
        powers.push(next);
    }
    let modulus = powers[precision as usize].clone();
    let q_hat = BigUint::from(q).modpow(&BigUint::from(p - 1), &modulus);
    Arc::new(PadicContext {
        p,
        q,
        precision,
        modulus,
        powers,
        q_hat,
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut k: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        k >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Order of `q` in `(Z/p^2)^x` for an odd prime `p`; `0` when `p | q`.
///
/// Starts from the group order `p(p-1)` and strips each prime factor while
/// the power stays `1`.
pub fn order_mod_p2(q: u64, p: u64) -> u64 {
    let m = p * p;
    if q.is_multiple_of(p) {
        return 0;
    }
    let mut order = p * (p - 1);
    let mut factors = prime_factors(p - 1);
    factors.push(p);
    for r in factors {
        while order.is_multiple_of(r) && pow_mod(q, order / r, m) == 1 {
            order /= r;
        }
    }
    order
}

/// Smallest `q >= 2` generating `(Z/p^2)^x`.
pub fn smallest_primitive_root_mod_p2(p: u64) -> Option<u64> {
    (2..p * p).find(|&q| order_mod_p2(q, p) == p * (p - 1))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `nu_p(k!)` by Legendre's sum `sum_{i>=1} floor(k / p^i)`.
pub fn nu_factorial(p: u64, k: u64) -> u64 {
    let mut total = 0;
    let mut m = k;
    while m > 0 {
        m /= p;
        total += m;
    }
    total
}

/// `nu_p(n)` for `n > 0`.
pub fn nu_int(p: u64, mut n: u64) -> u64 {
    assert!(n > 0, "valuation of zero is infinite");
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Sum of the base-`p` digits of `k`.
pub fn digit_sum(p: u64, mut k: u64) -> u64 {
    let mut s = 0;
    while k > 0 {
        s += k % p;
        k /= p;
    }
    s
}

impl PadicContext {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The precision exponent `N`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `rho = 2(p - 1)`.
    pub fn rho(&self) -> u64 {
        2 * (self.p - 1)
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `p^k` for `k <= N`.
    pub fn p_pow(&self, k: u32) -> &BigUint {
        &self.powers[k as usize]
    }

    /// The same `p` and `q` at another precision.
    pub fn with_precision(&self, precision: u32) -> Result<Ctx> {
        if !(1..=MAX_PRECISION).contains(&precision) {
            return Err(Error::BadPrecision(format!("N = {precision} out of range")));
        }
        Ok(build_context(self.p, self.q, precision))
    }

    pub fn q_hat(self: &Arc<Self>) -> PadicInt {
        PadicInt {
            ctx: self.clone(),
            residue: self.q_hat.clone(),
        }
    }

    /// `q_hat^k` as a p-adic integer.
    pub fn q_hat_pow(self: &Arc<Self>, k: u64) -> PadicInt {
        self.q_hat().pow(k)
    }

    pub fn same(&self, other: &PadicContext) -> bool {
        std::ptr::eq(self, other)
            || (self.p == other.p && self.precision == other.precision && self.q == other.q)
    }

    pub fn describe(&self) -> String {
        format!("(p={}, q={}, N={})", self.p, self.q, self.precision)
    }

    pub fn zero(self: &Arc<Self>) -> PadicInt {
        PadicInt {
            ctx: self.clone(),
            residue: BigUint::zero(),
        }
    }

    pub fn one(self: &Arc<Self>) -> PadicInt {
        PadicInt {
            ctx: self.clone(),
            residue: BigUint::one(),
        }
    }

    pub fn int(self: &Arc<Self>, n: i64) -> PadicInt {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(self: &Arc<Self>, n: &BigInt) -> PadicInt {
        let m = BigInt::from_biguint(Sign::Plus, self.modulus.clone());
        let r = n.mod_floor(&m);
        PadicInt {
            ctx: self.clone(),
            residue: r.to_biguint().expect("mod_floor is nonnegative"),
        }
    }

    /// Wraps an already-reduced residue, rejecting values `>= p^N`.
    pub fn from_residue(self: &Arc<Self>, residue: BigUint) -> Result<PadicInt> {
        if residue >= self.modulus {
            return Err(Error::Parse(format!(
                "residue {residue} is not reduced modulo {}",
                self.modulus
            )));
        }
        Ok(PadicInt {
            ctx: self.clone(),
            residue,
        })
    }

    pub(crate) fn check(&self, other: &PadicContext) -> Result<()> {
        if self.same(other) {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: self.describe(),
                right: other.describe(),
            })
        }
    }

    /// Valuation of a residue modulo `p^k`; `None` when it is zero.
    fn residue_valuation(&self, r: &BigUint) -> Option<u32> {
        if r.is_zero() {
            return None;
        }
        let p = BigUint::from(self.p);
        let mut v = 0;
        let mut x = r.clone();
        loop {
            let (quo, rem) = x.div_rem(&p);
            if !rem.is_zero() {
                return Some(v);
            }
            x = quo;
            v += 1;
        }
    }
}

impl PartialEq for PadicContext {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for PadicContext {}

/// Valuation of a [`PadicInt`]. Zero residues only tell us `v >= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(u32),
    AtLeast(u32),
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// An element of `Z_p` modulo `p^N`.
#[derive(Clone)]
pub struct PadicInt {
    ctx: Ctx,
    residue: BigUint,
}

impl PadicInt {
    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// Canonical residue in `[0, p^N)`.
    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.residue.is_one()
    }

    pub fn is_unit(&self) -> bool {
        !(&self.residue % self.ctx.p).is_zero()
    }

    /// True when the element lies in `1 + pZ_p`.
    pub fn is_one_mod_p(&self) -> bool {
        (&self.residue % self.ctx.p).is_one()
    }

    fn with(&self, residue: BigUint) -> PadicInt {
        PadicInt {
            ctx: self.ctx.clone(),
            residue,
        }
    }

    pub fn add(&self, other: &PadicInt) -> Result<PadicInt> {
        self.ctx.check(&other.ctx)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &PadicInt) -> Result<PadicInt> {
        self.ctx.check(&other.ctx)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn mul(&self, other: &PadicInt) -> Result<PadicInt> {
        self.ctx.check(&other.ctx)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &PadicInt) -> PadicInt {
        let mut r = &self.residue + &other.residue;
        if r >= self.ctx.modulus {
            r -= &self.ctx.modulus;
        }
        self.with(r)
    }

    pub(crate) fn sub_unchecked(&self, other: &PadicInt) -> PadicInt {
        if self.residue >= other.residue {
            self.with(&self.residue - &other.residue)
        } else {
            self.with(&self.ctx.modulus - &other.residue + &self.residue)
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &PadicInt) -> PadicInt {
        self.with((&self.residue * &other.residue) % &self.ctx.modulus)
    }

    pub fn neg(&self) -> PadicInt {
        if self.residue.is_zero() {
            self.clone()
        } else {
            self.with(&self.ctx.modulus - &self.residue)
        }
    }

    pub fn pow(&self, k: u64) -> PadicInt {
        self.with(self.residue.modpow(&BigUint::from(k), &self.ctx.modulus))
    }

    /// Multiplies by a small signed integer.
    pub fn scale(&self, k: i64) -> PadicInt {
        self.mul_unchecked(&self.ctx.int(k))
    }

    /// Inverse of a unit modulo `p^N`.
    pub fn inv_unit(&self) -> Result<PadicInt> {
        if !self.is_unit() {
            return Err(Error::NotAUnit(self.residue.to_string()));
        }
        Ok(self.with(inverse_mod(&self.residue, &self.ctx.modulus)))
    }

    pub fn valuation(&self) -> Valuation {
        match self.ctx.residue_valuation(&self.residue) {
            Some(v) => Valuation::Finite(v),
            None => Valuation::AtLeast(self.ctx.precision),
        }
    }

    /// Signed representative in `(-p^N/2, p^N/2]`, handy for display.
    pub fn symmetric(&self) -> BigInt {
        let half = &self.ctx.modulus >> 1;
        if self.residue > half {
            BigInt::from(self.residue.clone()) - BigInt::from(self.ctx.modulus.clone())
        } else {
            BigInt::from(self.residue.clone())
        }
    }
}

/// Inverse of a unit `a` modulo `m` by the extended Euclidean algorithm.
fn inverse_mod(a: &BigUint, m: &BigUint) -> BigUint {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(&m).to_biguint().expect("nonnegative")
}

impl PartialEq for PadicInt {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same(&other.ctx) && self.residue == other.residue
    }
}

impl Eq for PadicInt {}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.ctx.p, self.ctx.precision)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

/// An element `p^val * unit` of `Q_p` with bounded denominator.
///
/// The unit is known to `prec` significant digits and is stored reduced
/// modulo `p^prec`, which makes the representation canonical. Zero is
/// `(val = None, unit = 0, prec = 0)`.
#[derive(Clone, PartialEq, Eq)]
pub struct PadicScaled {
    val: Option<i64>,
    unit: PadicInt,
    prec: u32,
}

impl PadicScaled {
    pub fn zero(ctx: &Ctx) -> PadicScaled {
        PadicScaled {
            val: None,
            unit: ctx.zero(),
            prec: 0,
        }
    }

    pub fn one(ctx: &Ctx) -> PadicScaled {
        Self::p_power(ctx, 0)
    }

    /// The exact value `p^m`.
    pub fn p_power(ctx: &Ctx, m: i64) -> PadicScaled {
        PadicScaled {
            val: Some(m),
            unit: ctx.one(),
            prec: ctx.precision,
        }
    }

    /// Lifts an element known modulo `p^N`: a value of valuation `v` keeps
    /// `N - v` significant digits.
    pub fn from_padic_int(a: &PadicInt) -> PadicScaled {
        let ctx = &a.ctx;
        match a.valuation() {
            Valuation::AtLeast(_) => Self::zero(ctx),
            Valuation::Finite(v) => {
                let unit = &a.residue / ctx.p_pow(v);
                let prec = ctx.precision - v;
                PadicScaled {
                    val: Some(v as i64),
                    unit: a.with(unit % ctx.p_pow(prec)),
                    prec,
                }
            }
        }
    }

    /// An exact integer, carried at full relative precision `N`.
    pub fn from_integer(ctx: &Ctx, n: &BigInt) -> PadicScaled {
        if n.is_zero() {
            return Self::zero(ctx);
        }
        let p = BigInt::from(ctx.p);
        let mut v = 0i64;
        let mut x = n.clone();
        loop {
            let (quo, rem) = x.div_rem(&p);
            if !rem.is_zero() {
                break;
            }
            x = quo;
            v += 1;
        }
        PadicScaled {
            val: Some(v),
            unit: ctx.from_bigint(&x),
            prec: ctx.precision,
        }
    }

    pub fn from_i64(ctx: &Ctx, n: i64) -> PadicScaled {
        Self::from_integer(ctx, &BigInt::from(n))
    }

    /// Builds `p^val * unit` from raw parts; `unit` must be a unit and
    /// `1 <= prec <= N`.
    pub fn from_parts(val: i64, unit: PadicInt, prec: u32) -> Result<PadicScaled> {
        let ctx = unit.ctx.clone();
        if prec < 1 {
            return Err(Error::PrecisionExhausted(
                "a nonzero value needs at least one significant digit".into(),
            ));
        }
        if prec > ctx.precision {
            return Err(Error::BadPrecision(format!(
                "relative precision {prec} exceeds N = {}",
                ctx.precision
            )));
        }
        if !unit.is_unit() {
            return Err(Error::NotAUnit(unit.residue.to_string()));
        }
        let r = &unit.residue % ctx.p_pow(prec);
        Ok(PadicScaled {
            val: Some(val),
            unit: unit.with(r),
            prec,
        })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.unit.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    /// `None` encodes the `+inf` valuation of zero.
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }

    pub fn unit(&self) -> &PadicInt {
        &self.unit
    }

    /// Number of significant p-adic digits of the unit part.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// The value is known modulo `p^abs_prec`; `None` for zero.
    pub fn abs_prec(&self) -> Option<i64> {
        self.val.map(|v| v + self.prec as i64)
    }

    pub fn neg(&self) -> PadicScaled {
        if self.is_zero() {
            return self.clone();
        }
        let m = self.ctx().p_pow(self.prec);
        let r = if self.unit.residue.is_zero() {
            BigUint::zero()
        } else {
            m - &self.unit.residue
        };
        PadicScaled {
            val: self.val,
            unit: self.unit.with(r),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &PadicScaled) -> Result<PadicScaled> {
        self.ctx().check(other.ctx())?;
        let (a, b) = match (self.val, other.val) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(va), Some(vb)) if va <= vb => (self, other),
            _ => (other, self),
        };
        let ctx = a.ctx();
        let va = a.val.unwrap();
        let d = b.val.unwrap() - va;
        let avail = (a.prec as i64).min(b.prec as i64 + d) as u32;
        let m = ctx.p_pow(avail);
        let mut s = &a.unit.residue % m;
        if (d as u64) < avail as u64 {
            s = (s + ctx.p_pow(d as u32) * &b.unit.residue) % m;
        }
        let w = match ctx.residue_valuation(&s) {
            None => return Ok(Self::zero(ctx)),
            Some(w) => w,
        };
        let prec = avail - w;
        if prec < 1 {
            return Err(Error::PrecisionExhausted(format!(
                "sum at valuation {va} kept {prec} significant digits"
            )));
        }
        let unit = (s / ctx.p_pow(w)) % ctx.p_pow(prec);
        Ok(PadicScaled {
            val: Some(va + w as i64),
            unit: a.unit.with(unit),
            prec,
        })
    }

    pub fn sub(&self, other: &PadicScaled) -> Result<PadicScaled> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicScaled) -> Result<PadicScaled> {
        self.ctx().check(other.ctx())?;
        let (va, vb) = match (self.val, other.val) {
            (Some(va), Some(vb)) => (va, vb),
            _ => return Ok(Self::zero(self.ctx())),
        };
        let prec = self.prec.min(other.prec);
        let m = self.ctx().p_pow(prec);
        let r = (&self.unit.residue * &other.unit.residue) % m;
        Ok(PadicScaled {
            val: Some(va + vb),
            unit: self.unit.with(r),
            prec,
        })
    }

    pub fn inv(&self) -> Result<PadicScaled> {
        let v = self.val.ok_or(Error::DivisionByZero)?;
        let m = self.ctx().p_pow(self.prec);
        let r = inverse_mod(&self.unit.residue, m);
        Ok(PadicScaled {
            val: Some(-v),
            unit: self.unit.with(r),
            prec: self.prec,
        })
    }

    pub fn pow(&self, k: u32) -> Result<PadicScaled> {
        let mut acc = Self::one(self.ctx());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplies by `p^m` (any sign); exact.
    pub fn scale_by_p_power(&self, m: i64) -> PadicScaled {
        match self.val {
            None => self.clone(),
            Some(v) => PadicScaled {
                val: Some(v + m),
                unit: self.unit.clone(),
                prec: self.prec,
            },
        }
    }

    /// True when `self - other` vanishes to the precision both carry.
    pub fn agrees(&self, other: &PadicScaled) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Projects an element of `Z_p` back to a residue modulo `p^N`.
    pub fn to_padic_int(&self) -> Result<PadicInt> {
        let ctx = self.ctx();
        match self.val {
            None => Ok(ctx.zero()),
            Some(v) if v < 0 => Err(Error::NotAUnit(format!(
                "value of valuation {v} is not a p-adic integer"
            ))),
            Some(v) if v >= ctx.precision as i64 => Ok(ctx.zero()),
            Some(v) => {
                let r = (ctx.p_pow(v as u32) * &self.unit.residue) % &ctx.modulus;
                Ok(ctx.zero().with(r))
            }
        }
    }

    /// Exact rational value when the unit is read as an integer in
    /// `[0, p^prec)`; used for display and by tests.
    pub fn to_fraction(&self) -> (BigInt, BigInt) {
        let ctx = self.ctx();
        let p = BigInt::from(ctx.p);
        match self.val {
            None => (BigInt::zero(), BigInt::one()),
            Some(v) => {
                let u = BigInt::from(self.unit.residue.clone());
                if v >= 0 {
                    (u * num_traits::pow(p, v as usize), BigInt::one())
                } else {
                    (u, num_traits::pow(p, (-v) as usize))
                }
            }
        }
    }
}

impl fmt::Debug for PadicScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "0"),
            Some(v) => write!(
                f,
                "{}^{} * {} [+{} digits]",
                self.ctx().p,
                v,
                self.unit.residue,
                self.prec
            ),
        }
    }
}

impl fmt::Display for PadicScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "0"),
            Some(0) => write!(f, "{}", self.unit.symmetric()),
            Some(v) => write!(f, "{}^{}*{}", self.ctx().p, v, self.unit.symmetric()),
        }
    }
}

/// `nu_p` of a nonzero exact integer.
pub fn nu_bigint(p: u64, n: &BigInt) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut x = n.clone();
    loop {
        let (quo, rem) = x.div_rem(&pb);
        if !rem.is_zero() {
            return Some(v);
        }
        x = quo;
        v += 1;
    }
}
