//! Bivariate polynomials in `u_hat`, `v_hat` over `Q_p`, the integral basis
//! elements built from them, the two integrality conditions, and the action
//! of the Adams operation (`u_hat -> u_hat`, `v_hat -> q_hat v_hat`).

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{nu_factorial, nu_int, Ctx, PadicInt, PadicScaled};
use crate::qcalc::qbinom_eval;

/// Extra digits kept above the largest denominator valuation.
pub const GUARD_DIGITS: u32 = 4;

/// Polynomial in `u_hat`, `v_hat` with scaled p-adic coefficients; the key
/// `(a, b)` stands for `u_hat^a v_hat^b`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivarPoly {
    ctx: Ctx,
    terms: BTreeMap<(u32, u32), PadicScaled>,
}

impl BivarPoly {
    pub fn zero(ctx: &Ctx) -> BivarPoly {
        BivarPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Ctx) -> BivarPoly {
        Self::monomial(ctx, 0, 0, PadicScaled::one(ctx))
    }

    pub fn monomial(ctx: &Ctx, a: u32, b: u32, coeff: PadicScaled) -> BivarPoly {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((a, b), coeff);
        }
        BivarPoly {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn u(ctx: &Ctx) -> BivarPoly {
        Self::monomial(ctx, 1, 0, PadicScaled::one(ctx))
    }

    pub fn v(ctx: &Ctx) -> BivarPoly {
        Self::monomial(ctx, 0, 1, PadicScaled::one(ctx))
    }

    /// Sums repeated exponents; zero coefficients are dropped.
    pub fn from_terms(
        ctx: &Ctx,
        terms: impl IntoIterator<Item = ((u32, u32), PadicScaled)>,
    ) -> Result<BivarPoly> {
        let mut out = Self::zero(ctx);
        for (key, c) in terms {
            ctx.check(c.ctx())?;
            out.accumulate(key, &c)?;
        }
        Ok(out)
    }

    fn accumulate(&mut self, key: (u32, u32), c: &PadicScaled) -> Result<()> {
        let sum = match self.terms.get(&key) {
            Some(old) => old.add(c)?,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &PadicScaled)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: u32, b: u32) -> PadicScaled {
        self.terms
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(|| PadicScaled::zero(&self.ctx))
    }

    /// The common value of `a + b` over all terms; `None` for zero or a
    /// mixed-weight polynomial.
    pub fn weight(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|(a, b)| a + b);
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.weight().is_some()
    }

    /// Splits into homogeneous components keyed by weight.
    pub fn homogeneous_parts(&self) -> BTreeMap<u32, BivarPoly> {
        let mut out: BTreeMap<u32, BivarPoly> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            out.entry(a + b)
                .or_insert_with(|| Self::zero(&self.ctx))
                .terms
                .insert((a, b), c.clone());
        }
        out
    }

    /// Smallest `val + prec` over the coefficients: the polynomial is known
    /// modulo `p^k` coefficient-wise for this `k`. `None` for zero.
    pub fn min_abs_prec(&self) -> Option<i64> {
        self.terms.values().filter_map(PadicScaled::abs_prec).min()
    }

    pub fn add(&self, other: &BivarPoly) -> Result<BivarPoly> {
        self.ctx.check(&other.ctx)?;
        let mut out = self.clone();
        for (&key, c) in &other.terms {
            out.accumulate(key, c)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> BivarPoly {
        self.map_coeffs(|_, c| c.neg())
    }

    pub fn sub(&self, other: &BivarPoly) -> Result<BivarPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &BivarPoly) -> Result<BivarPoly> {
        self.ctx.check(&other.ctx)?;
        let mut out = Self::zero(&self.ctx);
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                out.accumulate((a1 + a2, b1 + b2), &c1.mul(c2)?)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &PadicScaled) -> Result<BivarPoly> {
        self.ctx.check(c.ctx())?;
        let mut out = Self::zero(&self.ctx);
        for (&key, x) in &self.terms {
            out.accumulate(key, &x.mul(c)?)?;
        }
        Ok(out)
    }

    /// Multiplies by `p^m` for any sign of `m`.
    pub fn scale_by_p_power(&self, m: i64) -> BivarPoly {
        self.map_coeffs(|_, c| c.scale_by_p_power(m))
    }

    /// Multiplies by `u_hat^k`.
    pub fn shift_u(&self, k: u32) -> BivarPoly {
        BivarPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((a + k, b), c.clone()))
                .collect(),
        }
    }

    /// Multiplies by `(u_hat / p)^k`.
    pub fn mul_u_over_p(&self, k: u32) -> BivarPoly {
        self.shift_u(k).scale_by_p_power(-(k as i64))
    }

    fn map_coeffs(&self, f: impl Fn((u32, u32), &PadicScaled) -> PadicScaled) -> BivarPoly {
        BivarPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(&k, c)| (k, f(k, c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn eval(&self, u: &PadicScaled, v: &PadicScaled) -> Result<PadicScaled> {
        self.ctx.check(u.ctx())?;
        self.ctx.check(v.ctx())?;
        let mut acc = PadicScaled::zero(&self.ctx);
        for (&(a, b), c) in &self.terms {
            let term = c.mul(&u.pow(a)?)?.mul(&v.pow(b)?)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// The Adams operation: `u_hat^a v_hat^b -> q_hat^b u_hat^a v_hat^b`.
    pub fn psi(&self) -> BivarPoly {
        let ctx = self.ctx.clone();
        self.map_coeffs(|(_, b), c| {
            c.mul(&PadicScaled::from_padic_int(&ctx.q_hat_pow(b as u64)))
                .expect("same context")
        })
    }

    /// True when the two polynomials agree to the precision both carry.
    pub fn agrees(&self, other: &BivarPoly) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }
}

/// Smallest precision at which every `c_k`, `k <= kmax`, keeps
/// [`GUARD_DIGITS`] digits beyond its denominator.
pub fn required_precision(p: u64, kmax: u64) -> u32 {
    let worst = (0..=kmax).map(|k| nu_factorial(p, k) + k).max().unwrap_or(0);
    worst as u32 + GUARD_DIGITS
}

/// Refuses a context too small for basis elements up to `kmax`.
pub fn check_precision(ctx: &Ctx, kmax: u64) -> Result<()> {
    let need = required_precision(ctx.p(), kmax);
    if ctx.precision() < need {
        return Err(Error::BadPrecision(format!(
            "N = {} is below the {need} digits needed for k <= {kmax}",
            ctx.precision()
        )));
    }
    Ok(())
}

/// `prod_{i<k} (q_hat^k - q_hat^i)`, the denominator of `c_k`, modulo `p^N`.
pub fn c_denominator(ctx: &Ctx, k: u64) -> PadicInt {
    let top = ctx.q_hat_pow(k);
    (0..k).fold(ctx.one(), |acc, i| {
        acc.mul_unchecked(&top.sub_unchecked(&ctx.q_hat_pow(i)))
    })
}

/// Coefficients of `prod_{i<k} (v_hat - q_hat^i u_hat)`; entry `b` belongs
/// to `u_hat^(k-b) v_hat^b`.
fn numerator_coeffs(ctx: &Ctx, k: u64) -> Vec<PadicInt> {
    let mut acc = vec![ctx.one()];
    for i in 0..k {
        let shift = ctx.q_hat_pow(i);
        let mut next = vec![ctx.zero(); acc.len() + 1];
        for (b, x) in acc.iter().enumerate() {
            next[b + 1] = next[b + 1].add_unchecked(x);
            next[b] = next[b].sub_unchecked(&x.mul_unchecked(&shift));
        }
        acc = next;
    }
    acc
}

/// Reads an integer computed modulo `p^(N + extra)` as a scaled value that
/// keeps up to `N` significant digits.
fn lift_integer(ctx: &Ctx, wide: &PadicInt) -> Result<PadicScaled> {
    let v = match wide.valuation().finite() {
        None => return Ok(PadicScaled::zero(ctx)),
        Some(v) => v,
    };
    let prec = ctx.precision().min(wide.ctx().precision() - v);
    let unit = (wide.residue() / wide.ctx().p_pow(v)) % ctx.p_pow(prec);
    PadicScaled::from_parts(v as i64, ctx.from_residue(unit)?, prec)
}

fn from_top_coeffs(ctx: &Ctx, k: u64, coeffs: &[PadicScaled]) -> Result<BivarPoly> {
    let k = k as u32;
    BivarPoly::from_terms(
        ctx,
        coeffs
            .iter()
            .enumerate()
            .map(|(b, x)| ((k - b as u32, b as u32), x.clone())),
    )
}

/// `n_k = prod_{i<k} (v_hat - q_hat^i u_hat)`.
pub fn numerator_poly(ctx: &Ctx, k: u64) -> Result<BivarPoly> {
    let coeffs: Vec<PadicScaled> = numerator_coeffs(ctx, k)
        .iter()
        .map(|x| lift_integer(ctx, x))
        .collect::<Result<_>>()?;
    from_top_coeffs(ctx, k, &coeffs)
}

/// `c_k = prod_{i<k} (v_hat - q_hat^i u_hat) / (q_hat^k - q_hat^i)`.
///
/// Numerator and denominator are integers; both are formed with
/// `nu_p(k!) + k` extra digits so the quotient keeps `N - nu_p(k!) - k`
/// absolute digits.
pub fn c_poly(ctx: &Ctx, k: u64) -> Result<BivarPoly> {
    let headroom = nu_factorial(ctx.p(), k) + k;
    let need = headroom + GUARD_DIGITS as u64;
    if (ctx.precision() as u64) < need {
        return Err(Error::PrecisionExhausted(format!(
            "c_{k} needs N >= {need}, have {}",
            ctx.precision()
        )));
    }
    let wide = ctx.with_precision(ctx.precision() + headroom as u32)?;
    let den = lift_integer(ctx, &c_denominator(&wide, k))?;
    if den.is_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "denominator of c_{k} vanishes mod p^N"
        )));
    }
    let inv = den.inv()?;
    let coeffs: Vec<PadicScaled> = numerator_coeffs(&wide, k)
        .iter()
        .map(|x| lift_integer(ctx, x)?.mul(&inv))
        .collect::<Result<_>>()?;
    from_top_coeffs(ctx, k, &coeffs)
}

/// `f_k = p^nu_p(k!) c_k`.
pub fn f_poly(ctx: &Ctx, k: u64) -> Result<BivarPoly> {
    Ok(c_poly(ctx, k)?.scale_by_p_power(nu_factorial(ctx.p(), k) as i64))
}

/// Whether [`big_f`] enforces the admissibility constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMode {
    Basis,
    Raw,
}

/// Index `(i, j, k)` of `F_{i,j,k} = u_hat^i (u_hat/p)^j f_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FIndex {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl FIndex {
    pub fn weight(&self) -> u32 {
        self.i + self.j + self.k
    }

    /// `j <= nu_p(k!)`, and `i = 0` unless `j = nu_p(k!)`.
    pub fn is_admissible(&self, p: u64) -> bool {
        let top = nu_factorial(p, self.k as u64);
        let j = self.j as u64;
        j < top && self.i == 0 || j == top
    }
}

pub fn big_f(ctx: &Ctx, idx: FIndex, mode: FMode) -> Result<BivarPoly> {
    if mode == FMode::Basis && !idx.is_admissible(ctx.p()) {
        return Err(Error::BadIndex(format!(
            "F_({},{},{}) is not a basis element: need j <= {} and i = 0 unless j is maximal",
            idx.i,
            idx.j,
            idx.k,
            nu_factorial(ctx.p(), idx.k as u64)
        )));
    }
    Ok(f_poly(ctx, idx.k as u64)?.shift_u(idx.i).mul_u_over_p(idx.j))
}

/// The admissible index of weight `m` built from `f_l`.
pub fn g_index(p: u64, m: u64, l: u64) -> Result<FIndex> {
    if m < l {
        return Err(Error::BadIndex(format!("g_({m},{l}) needs m >= l")));
    }
    let nu = nu_factorial(p, l);
    let (i, j) = if m <= nu + l { (0, m - l) } else { (m - l - nu, nu) };
    Ok(FIndex {
        i: i as u32,
        j: j as u32,
        k: l as u32,
    })
}

pub fn g_poly(ctx: &Ctx, m: u64, l: u64) -> Result<BivarPoly> {
    big_f(ctx, g_index(ctx.p(), m, l)?, FMode::Basis)
}

/// `nu_p(m!)` when `m > nu_p(i!) + i`, else `nu_p(m!) + m - nu_p(i!) - i`.
pub fn beta(p: u64, m: u64, i: u64) -> i64 {
    let (nm, ni) = (nu_factorial(p, m) as i64, nu_factorial(p, i) as i64);
    if m as i64 > ni + i as i64 {
        nm
    } else {
        nm + m as i64 - ni - i as i64
    }
}

/// Coefficients `lambda_0..lambda_n` with `f = sum_s lambda_s u_hat^(n-s) c_s`.
///
/// Peels one coefficient at a time: at `(u_hat, v_hat) = (1, q_hat^s)` every
/// `c_r` with `r > s` vanishes and `c_r` with `r <= s` takes the value
/// `[s, r]` at `q_hat`, so
/// `lambda_s = f(1, q_hat^s) - sum_{r<s} lambda_r [s, r]`.
/// An empty list is returned for the zero polynomial.
pub fn expand_in_c_basis(f: &BivarPoly) -> Result<Vec<PadicScaled>> {
    if f.is_zero() {
        return Ok(vec![]);
    }
    let n = f.weight().ok_or(Error::NotHomogeneous)? as u64;
    let bound = f.min_abs_prec().expect("nonzero");
    if bound < 1 {
        return Err(Error::PrecisionExhausted(format!(
            "coefficients known only modulo p^{bound}"
        )));
    }
    let ctx = f.ctx();
    let one = PadicScaled::one(ctx);
    let mut lambdas: Vec<PadicScaled> = Vec::with_capacity(n as usize + 1);
    for s in 0..=n {
        let point = PadicScaled::from_padic_int(&ctx.q_hat_pow(s));
        let mut acc = f.eval(&one, &point)?;
        for (r, lam) in lambdas.iter().enumerate() {
            let g = PadicScaled::from_padic_int(&qbinom_eval(s, r as i64, &ctx.q_hat()));
            acc = acc.sub(&lam.mul(&g)?)?;
        }
        lambdas.push(acc);
    }
    Ok(lambdas)
}

/// `sum_s lambda_s u_hat^(n-s) c_s` with `n = lambdas.len() - 1`.
pub fn reconstruct(ctx: &Ctx, lambdas: &[PadicScaled]) -> Result<BivarPoly> {
    let n = lambdas.len() as u32;
    let mut out = BivarPoly::zero(ctx);
    for (s, lam) in lambdas.iter().enumerate() {
        if lam.is_zero() {
            continue;
        }
        let term = c_poly(ctx, s as u64)?.shift_u(n - 1 - s as u32).scale(lam)?;
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Outcome of the two integrality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Integrality {
    /// `f(kt, lt)` has integral coefficients for all `k, l` in `1 + pZ_p`.
    pub cond1: bool,
    /// `f` lies in `Z_p[u_hat/p, v_hat/p]`.
    pub cond2: bool,
}

/// The first condition holds iff every homogeneous part has integral
/// coordinates in the `c_k` basis; the second iff the coefficient of
/// `u_hat^a v_hat^b` has valuation at least `-(a + b)`.
pub fn check_integrality(f: &BivarPoly) -> Result<Integrality> {
    let mut cond1 = true;
    for part in f.homogeneous_parts().values() {
        for lam in expand_in_c_basis(part)? {
            if lam.valuation().is_some_and(|v| v < 0) {
                cond1 = false;
            }
        }
    }
    let cond2 = f
        .terms()
        .all(|(&(a, b), c)| c.valuation().is_none_or(|v| v >= -((a + b) as i64)));
    Ok(Integrality { cond1, cond2 })
}

/// Coordinates of a homogeneous `f` over the admissible `F_{i,j,k}` of its
/// weight `n`, one per `k = 0..=n` (that element is `g_{n,k}`).
///
/// `g_{n,k} = p^(nu_p(k!) - j) u_hat^(n-k) c_k` with `j = min(n-k, nu_p(k!))`,
/// so the coordinate is `lambda_k p^(j - nu_p(k!))`.
pub fn expand_in_integral_basis(f: &BivarPoly) -> Result<Vec<(FIndex, PadicScaled)>> {
    let lambdas = expand_in_c_basis(f)?;
    let n = lambdas.len() as u64;
    let p = f.ctx().p();
    lambdas
        .into_iter()
        .enumerate()
        .map(|(k, lam)| {
            let idx = g_index(p, n - 1, k as u64)?;
            let shift = idx.j as i64 - nu_factorial(p, k as u64) as i64;
            Ok((idx, lam.scale_by_p_power(shift)))
        })
        .collect()
}

/// Evaluates every homogeneous part of `f` at `trials` random points of
/// `(1 + pZ_p)^2`; true when all values are integral.
pub fn sample_condition1(f: &BivarPoly, trials: usize, rng: &mut impl Rng) -> Result<bool> {
    let ctx = f.ctx();
    let parts = f.homogeneous_parts();
    for _ in 0..trials {
        let k = random_one_mod_p(ctx, rng);
        let l = random_one_mod_p(ctx, rng);
        for part in parts.values() {
            if part.eval(&k, &l)?.valuation().is_some_and(|v| v < 0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn random_one_mod_p(ctx: &Ctx, rng: &mut impl Rng) -> PadicScaled {
    let x = crate::conj::random_element(ctx, rng);
    let y = ctx.one().add_unchecked(&x.scale(ctx.p() as i64));
    PadicScaled::from_padic_int(&y)
}

/// Result of comparing both sides of an identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityOutcome {
    pub branch: &'static str,
    pub holds: bool,
    /// The sides were compared modulo `p^digits`.
    pub digits: i64,
}

fn compare(branch: &'static str, lhs: &BivarPoly, rhs: &BivarPoly) -> Result<IdentityOutcome> {
    let digits = [lhs.min_abs_prec(), rhs.min_abs_prec()]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(lhs.ctx().precision() as i64);
    Ok(IdentityOutcome {
        branch,
        holds: lhs.agrees(rhs)? && digits >= 1,
        digits,
    })
}

/// `psi(c_m) = q_hat^m c_m + u_hat c_(m-1)` for `m >= 1`.
pub fn check_action_on_c(ctx: &Ctx, m: u64) -> Result<IdentityOutcome> {
    if m < 1 {
        return Err(Error::BadIndex("action on c_m needs m >= 1".into()));
    }
    let lhs = c_poly(ctx, m)?.psi();
    let rhs = c_poly(ctx, m)?
        .scale(&PadicScaled::from_padic_int(&ctx.q_hat_pow(m)))?
        .add(&c_poly(ctx, m - 1)?.shift_u(1))?;
    compare("c", &lhs, &rhs)
}

/// `psi(f_m) = q_hat^m f_m + p^nu_p(m) u_hat f_(m-1)` for `m >= 1`.
pub fn check_action_on_f(ctx: &Ctx, m: u64) -> Result<IdentityOutcome> {
    if m < 1 {
        return Err(Error::BadIndex("action on f_m needs m >= 1".into()));
    }
    let fm = f_poly(ctx, m)?;
    let rhs = fm.scale(&PadicScaled::from_padic_int(&ctx.q_hat_pow(m)))?.add(
        &f_poly(ctx, m - 1)?
            .shift_u(1)
            .scale_by_p_power(nu_int(ctx.p(), m) as i64),
    )?;
    compare("f", &fm.psi(), &rhs)
}

/// `psi(g_{m,n})` against its case formula, `0 <= n <= m`. The diagonal
/// splits on `m` against `p`; off the diagonal on `m` against
/// `nu_p(n!) + n` and `nu_p((n-1)!) + n - 1`.
pub fn check_action_on_g(ctx: &Ctx, m: u64, n: u64) -> Result<IdentityOutcome> {
    if n > m {
        return Err(Error::BadIndex(format!("g_({m},{n}) needs m >= n")));
    }
    let p = ctx.p();
    let lhs = g_poly(ctx, m, n)?.psi();
    if n == 0 {
        let branch = if m == 0 { "diagonal m = 0" } else { "column 0" };
        return compare(branch, &lhs, &g_poly(ctx, m, 0)?);
    }
    let (branch, shift): (&'static str, i64) = if m == n {
        match m.cmp(&p) {
            std::cmp::Ordering::Greater => ("diagonal m > p", nu_int(p, m) as i64 + 1),
            std::cmp::Ordering::Equal => ("diagonal m = p", 1),
            std::cmp::Ordering::Less => ("diagonal 1 <= m < p", 0),
        }
    } else {
        let upper = nu_factorial(p, n) + n;
        let lower = nu_factorial(p, n - 1) + n - 1;
        if m > upper {
            ("m > nu(n!) + n", 0)
        } else if m > lower {
            ("nu((n-1)!) + n - 1 < m <= nu(n!) + n", upper as i64 - m as i64)
        } else {
            ("m <= nu((n-1)!) + n - 1", nu_int(p, n) as i64 + 1)
        }
    };
    let rhs = g_poly(ctx, m, n)?
        .scale(&PadicScaled::from_padic_int(&ctx.q_hat_pow(n)))?
        .add(&g_poly(ctx, m, n - 1)?.scale_by_p_power(shift))?;
    compare(branch, &lhs, &rhs)
}

/// `u_hat^(m-n) g_{n,i} = p^e g_{m,i}` for `i <= n <= m`, with `e` read off
/// from where `n` and `m` sit against `nu_p(i!) + i`.
pub fn check_lower_g(ctx: &Ctx, m: u64, n: u64, i: u64) -> Result<IdentityOutcome> {
    if !(i <= n && n <= m) {
        return Err(Error::BadIndex(format!(
            "lowering needs i <= n <= m, got ({m},{n},{i})"
        )));
    }
    let edge = nu_factorial(ctx.p(), i) + i;
    let (branch, e): (&'static str, i64) = if m <= edge {
        ("n <= m <= nu(i!) + i", (m - n) as i64)
    } else if n <= edge {
        ("n <= nu(i!) + i < m", edge as i64 - n as i64)
    } else {
        ("nu(i!) + i < n <= m", 0)
    };
    let lhs = g_poly(ctx, n, i)?.shift_u((m - n) as u32);
    let rhs = g_poly(ctx, m, i)?.scale_by_p_power(e);
    compare(branch, &lhs, &rhs)
}

/// `(u_hat/p)^nu_p(m!) g_{m,i} = p^-beta(m,i) u_hat^(nu_p(m!) - nu_p(i!) + m - i) (u_hat/p)^nu_p(i!) f_i`
/// for `0 <= i < m`.
pub fn check_alglem(ctx: &Ctx, m: u64, i: u64) -> Result<IdentityOutcome> {
    if i >= m {
        return Err(Error::BadIndex(format!("need i < m, got i = {i}, m = {m}")));
    }
    let p = ctx.p();
    let (nm, ni) = (nu_factorial(p, m), nu_factorial(p, i));
    let branch = if m <= ni + i {
        "m <= nu(i!) + i"
    } else {
        "m > nu(i!) + i"
    };
    let lhs = g_poly(ctx, m, i)?.mul_u_over_p(nm as u32);
    let rhs = f_poly(ctx, i)?
        .mul_u_over_p(ni as u32)
        .shift_u((nm + m - ni - i) as u32)
        .scale_by_p_power(-beta(p, m, i));
    compare(branch, &lhs, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_context;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx3() -> Ctx {
        make_context(3, 2, 20).unwrap()
    }

    fn int(ctx: &Ctx, n: i64) -> PadicScaled {
        PadicScaled::from_i64(ctx, n)
    }

    fn rational(ctx: &Ctx, r: &BigRational) -> PadicScaled {
        if r.is_zero() {
            return PadicScaled::zero(ctx);
        }
        PadicScaled::from_integer(ctx, r.numer())
            .mul(&PadicScaled::from_integer(ctx, r.denom()).inv().unwrap())
            .unwrap()
    }

    /// Exact `c_k` over the rationals; entry `b` belongs to `u^(k-b) v^b`.
    fn c_exact(qh: i64, k: usize) -> Vec<BigRational> {
        let qpow = |e: usize| BigInt::from(qh).pow(e as u32);
        let mut num = vec![BigInt::one()];
        for i in 0..k {
            let mut next = vec![BigInt::zero(); num.len() + 1];
            for (b, x) in num.iter().enumerate() {
                next[b + 1] += x;
                next[b] -= x * qpow(i);
            }
            num = next;
        }
        let den: BigInt = (0..k).map(|i| qpow(k) - qpow(i)).product();
        num.into_iter()
            .map(|x| BigRational::new(x, den.clone()))
            .collect()
    }

    fn from_exact(ctx: &Ctx, k: usize, coeffs: &[BigRational]) -> BivarPoly {
        BivarPoly::from_terms(
            ctx,
            coeffs
                .iter()
                .enumerate()
                .map(|(b, r)| (((k - b) as u32, b as u32), rational(ctx, r))),
        )
        .unwrap()
    }

    /// Solves `f = sum lambda_s u^(n-s) c_s` top-down over the rationals.
    fn lambdas_exact(qh: i64, f: &[BigRational]) -> Vec<BigRational> {
        let n = f.len() - 1;
        let cs: Vec<Vec<BigRational>> = (0..=n).map(|s| c_exact(qh, s)).collect();
        let mut lam = vec![BigRational::zero(); n + 1];
        for b in (0..=n).rev() {
            let mut acc = f[b].clone();
            for s in b + 1..=n {
                acc -= &lam[s] * &cs[s][b];
            }
            lam[b] = acc / &cs[b][b];
        }
        lam
    }

    #[test]
    fn arithmetic_examples() {
        let c = ctx3();
        let uv = BivarPoly::u(&c).mul(&BivarPoly::v(&c)).unwrap();
        assert_eq!(uv.weight(), Some(2));
        assert!(uv.coeff(1, 1) == PadicScaled::one(&c) && uv.len() == 1);
        let f = c_poly(&c, 3).unwrap();
        assert!(f.add(&f.scale(&int(&c, -1)).unwrap()).unwrap().is_zero());

        let qh = PadicScaled::from_padic_int(&c.q_hat());
        let lin = |s: &PadicScaled| BivarPoly::v(&c).sub(&BivarPoly::u(&c).scale(s).unwrap()).unwrap();
        let prod = lin(&PadicScaled::one(&c)).mul(&lin(&qh)).unwrap();
        let want = BivarPoly::from_terms(
            &c,
            [((0, 2), int(&c, 1)), ((1, 1), int(&c, -5)), ((2, 0), int(&c, 4))],
        )
        .unwrap();
        assert_eq!(prod, want);
    }

    #[test]
    fn c_and_f_examples() {
        let c = ctx3();
        assert_eq!(c_poly(&c, 0).unwrap(), BivarPoly::one(&c));
        let qm1 = int(&c, 3).inv().unwrap();
        let c1 = BivarPoly::v(&c)
            .sub(&BivarPoly::u(&c))
            .unwrap()
            .scale(&qm1)
            .unwrap();
        assert!(c_poly(&c, 1).unwrap().agrees(&c1).unwrap());
        assert_eq!(f_poly(&c, 0).unwrap(), BivarPoly::one(&c));
        assert_eq!(f_poly(&c, 1).unwrap(), c_poly(&c, 1).unwrap());
        let f3 = f_poly(&c, 3).unwrap();
        assert!(f3.agrees(&c_poly(&c, 3).unwrap().scale_by_p_power(1)).unwrap());
        assert!(check_integrality(&f3).unwrap().cond2);
    }

    #[test]
    fn c_matches_rational_oracle() {
        for (p, q) in [(3, 2), (5, 2)] {
            let c = make_context(p, q, 30).unwrap();
            let qh = (q as i64).pow(p as u32 - 1);
            for k in 0..=8 {
                let want = from_exact(&c, k, &c_exact(qh, k));
                assert!(
                    c_poly(&c, k as u64).unwrap().agrees(&want).unwrap(),
                    "p={p} k={k}"
                );
            }
        }
    }

    #[test]
    fn denominator_valuation() {
        for p in [3u64, 5, 7] {
            let q = crate::padic::smallest_primitive_root_mod_p2(p).unwrap();
            let c = make_context(p, q, 40).unwrap();
            for k in 0..=12 {
                let v = c_denominator(&c, k).valuation().finite().unwrap() as u64;
                assert_eq!(v, nu_factorial(p, k) + k, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn precision_guard() {
        let small = make_context(3, 2, 10).unwrap();
        assert!(c_poly(&small, 5).is_ok());
        assert!(matches!(c_poly(&small, 6), Err(Error::PrecisionExhausted(_))));
        assert_eq!(required_precision(3, 8), 14);
        assert!(matches!(check_precision(&small, 8), Err(Error::BadPrecision(_))));
        assert!(check_precision(&ctx3(), 8).is_ok());
    }

    #[test]
    fn big_f_examples() {
        let c = ctx3();
        let f = |i, j, k| FIndex { i, j, k };
        assert_eq!(big_f(&c, f(0, 0, 0), FMode::Basis).unwrap(), BivarPoly::one(&c));
        let want = f_poly(&c, 1).unwrap().shift_u(2);
        assert_eq!(big_f(&c, f(2, 0, 1), FMode::Basis).unwrap(), want);
        assert!(matches!(
            big_f(&c, f(1, 0, 3), FMode::Basis),
            Err(Error::BadIndex(_))
        ));
        assert!(matches!(
            big_f(&c, f(0, 2, 3), FMode::Basis),
            Err(Error::BadIndex(_))
        ));
        let raw = big_f(&c, f(0, 2, 3), FMode::Raw).unwrap();
        assert!(!check_integrality(&raw).unwrap().cond1);
    }

    #[test]
    fn g_examples() {
        let c = ctx3();
        for l in 0..=6 {
            assert_eq!(g_poly(&c, l, l).unwrap(), f_poly(&c, l).unwrap());
        }
        for m in 0..=6 {
            assert_eq!(g_poly(&c, m, 0).unwrap(), BivarPoly::one(&c).shift_u(m as u32));
        }
        let f3 = f_poly(&c, 3).unwrap();
        assert_eq!(g_poly(&c, 4, 3).unwrap(), f3.mul_u_over_p(1));
        assert_eq!(g_poly(&c, 5, 3).unwrap(), f3.mul_u_over_p(1).shift_u(1));
        assert!(matches!(g_poly(&c, 2, 3), Err(Error::BadIndex(_))));
        for m in 0..=8u64 {
            for l in 0..=m {
                let idx = g_index(3, m, l).unwrap();
                assert!(idx.is_admissible(3));
                assert_eq!(idx.weight() as u64, m);
            }
        }
    }

    #[test]
    fn beta_examples_and_sign() {
        for m in 0..=10 {
            assert_eq!(beta(3, m, m), 0);
        }
        assert_eq!(beta(3, 4, 3), 1);
        assert_eq!(beta(3, 9, 1), 4);
        for p in [3, 5, 7] {
            for m in 0..=30 {
                for i in 0..=m {
                    assert!(beta(p, m, i) >= 0, "p={p} m={m} i={i}");
                }
            }
        }
    }

    #[test]
    fn psi_examples() {
        let c = ctx3();
        let u5 = BivarPoly::one(&c).shift_u(5);
        assert_eq!(u5.psi(), u5);
        let c1 = c_poly(&c, 1).unwrap();
        let rhs = c1
            .scale(&PadicScaled::from_padic_int(&c.q_hat()))
            .unwrap()
            .add(&BivarPoly::u(&c))
            .unwrap();
        assert!(c1.psi().agrees(&rhs).unwrap());
        for m in 1..=8 {
            assert!(check_action_on_c(&c, m).unwrap().holds);
        }
        assert!(check_action_on_f(&c, 3).unwrap().holds);
    }

    #[test]
    fn expansion_examples() {
        let c = ctx3();
        let un = BivarPoly::one(&c).shift_u(4);
        let lam = expand_in_c_basis(&un).unwrap();
        assert_eq!(lam[0], PadicScaled::one(&c));
        assert!(lam[1..].iter().all(PadicScaled::is_zero));
        for k in 0..=6 {
            let lam = expand_in_c_basis(&c_poly(&c, k).unwrap()).unwrap();
            for (s, x) in lam.iter().enumerate() {
                let want = if s as u64 == k {
                    PadicScaled::one(&c)
                } else {
                    PadicScaled::zero(&c)
                };
                assert!(x.agrees(&want).unwrap(), "k={k} s={s}");
            }
        }
        for k in 0..=4 {
            let lam = expand_in_c_basis(&numerator_poly(&c, k).unwrap()).unwrap();
            let top = PadicScaled::from_padic_int(&c_denominator(&c, k));
            assert!(lam[k as usize].agrees(&top).unwrap());
        }
        assert!(matches!(
            expand_in_c_basis(&BivarPoly::one(&c).add(&BivarPoly::u(&c)).unwrap()),
            Err(Error::NotHomogeneous)
        ));
    }

    #[test]
    fn numerator_expansion_matches_symbolic() {
        let c = ctx3();
        for k in 0..=4usize {
            let num = numerator_poly(&c, k as u64).unwrap();
            let den: BigInt = (0..k)
                .map(|i| BigInt::from(4).pow(k as u32) - BigInt::from(4).pow(i as u32))
                .product();
            let coeffs: Vec<BigRational> = c_exact(4, k)
                .iter()
                .map(|r| r * BigRational::from(den.clone()))
                .collect();
            let want = lambdas_exact(4, &coeffs);
            for (x, w) in expand_in_c_basis(&num).unwrap().iter().zip(&want) {
                assert!(x.agrees(&rational(&c, w)).unwrap(), "k={k}");
            }
        }
    }

    #[test]
    fn integrality_examples() {
        let c = ctx3();
        for k in 0..=8 {
            let fk = f_poly(&c, k).unwrap();
            assert_eq!(
                check_integrality(&fk).unwrap(),
                Integrality {
                    cond1: true,
                    cond2: true
                },
                "k={k}"
            );
            let nu = nu_factorial(3, k) as u32;
            let top = fk.mul_u_over_p(nu);
            assert!(check_integrality(&top).unwrap().cond1, "k={k}");
            assert!(
                !check_integrality(&fk.mul_u_over_p(nu + 1)).unwrap().cond1,
                "k={k}"
            );
        }
        let u_over_p = BivarPoly::u(&c).scale_by_p_power(-1);
        assert_eq!(
            check_integrality(&u_over_p).unwrap(),
            Integrality {
                cond1: false,
                cond2: true
            }
        );
        assert_eq!(
            check_integrality(&BivarPoly::zero(&c)).unwrap(),
            Integrality {
                cond1: true,
                cond2: true
            }
        );
    }

    #[test]
    fn sampling_agrees_with_decision() {
        let c = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=6 {
            let fk = f_poly(&c, k).unwrap();
            assert!(sample_condition1(&fk, 10, &mut rng).unwrap());
            let nu = nu_factorial(3, k) as u32;
            assert!(sample_condition1(&fk.mul_u_over_p(nu), 10, &mut rng).unwrap());
        }
        let u_over_p = BivarPoly::u(&c).scale_by_p_power(-1);
        assert!(!sample_condition1(&u_over_p, 3, &mut rng).unwrap());
    }

    fn random_homogeneous(c: &Ctx, n: u32, rng: &mut impl Rng) -> BivarPoly {
        BivarPoly::from_terms(
            c,
            (0..=n).map(|b| {
                let x = int(c, rng.gen_range(-2000..2000)).scale_by_p_power(-rng.gen_range(0..4));
                ((n - b, b), x)
            }),
        )
        .unwrap()
    }

    #[test]
    fn expansion_matches_rational_oracle() {
        let c = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let n = rng.gen_range(0..=6usize);
            let coeffs: Vec<BigRational> = (0..=n)
                .map(|_| {
                    BigRational::new(
                        BigInt::from(rng.gen_range(-2000..2000)),
                        BigInt::from(3).pow(rng.gen_range(0..4)),
                    )
                })
                .collect();
            let f = from_exact(&c, n, &coeffs);
            let got = expand_in_c_basis(&f).unwrap();
            let want = lambdas_exact(4, &coeffs);
            if f.is_zero() {
                continue;
            }
            for (x, w) in got.iter().zip(&want) {
                assert!(x.agrees(&rational(&c, w)).unwrap());
            }
        }
    }

    #[test]
    fn expansion_round_trip() {
        let c = make_context(3, 2, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(0..=8);
            let f = random_homogeneous(&c, n, &mut rng);
            let lam = expand_in_c_basis(&f).unwrap();
            let back = reconstruct(&c, &lam).unwrap();
            assert!(back.agrees(&f).unwrap());
            assert!(back.sub(&f).unwrap().is_zero());
        }
    }

    #[test]
    fn integral_basis_expansion() {
        let c = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut integral = 0;
        for _ in 0..200 {
            let n = rng.gen_range(0..=6);
            // Integer combinations of basis elements plus a perturbation
            // that is sometimes not integral.
            let mut f = BivarPoly::zero(&c);
            for l in 0..=n as u64 {
                let coeff = int(&c, rng.gen_range(-50..50));
                f = f
                    .add(&g_poly(&c, n as u64, l).unwrap().scale(&coeff).unwrap())
                    .unwrap();
            }
            if rng.gen_bool(0.3) {
                f = f.add(&random_homogeneous(&c, n, &mut rng)).unwrap();
            }
            let ok = check_integrality(&f).unwrap();
            if !(ok.cond1 && ok.cond2) || f.is_zero() {
                continue;
            }
            integral += 1;
            let coords = expand_in_integral_basis(&f).unwrap();
            let mut back = BivarPoly::zero(&c);
            for (idx, mu) in &coords {
                assert!(idx.is_admissible(3));
                assert!(mu.valuation().is_none_or(|v| v >= 0), "{idx:?} {mu:?}");
                back = back
                    .add(&big_f(&c, *idx, FMode::Basis).unwrap().scale(mu).unwrap())
                    .unwrap();
            }
            assert!(back.agrees(&f).unwrap());
        }
        assert!(integral > 50);
    }

    #[test]
    fn action_identities() {
        for (p, q) in [(3, 2), (5, 2)] {
            let c = make_context(p, q, 20).unwrap();
            for m in 1..=8 {
                let o = check_action_on_f(&c, m).unwrap();
                assert!(o.holds && o.digits >= 5, "p={p} m={m} {o:?}");
            }
        }
    }

    #[test]
    fn action_on_g_every_branch() {
        let c = ctx3();
        let mut seen = std::collections::BTreeSet::new();
        for m in 0..=8 {
            for n in 0..=m {
                let o = check_action_on_g(&c, m, n).unwrap();
                assert!(o.holds, "m={m} n={n} {o:?}");
                seen.insert(o.branch);
            }
        }
        assert_eq!(seen.len(), 8, "{seen:?}");
    }

    #[test]
    fn lower_g_and_alglem() {
        let c = ctx3();
        let mut branches = std::collections::BTreeSet::new();
        for m in 0..=8 {
            for n in 0..=m {
                for i in 0..=n {
                    let o = check_lower_g(&c, m, n, i).unwrap();
                    assert!(o.holds, "m={m} n={n} i={i} {o:?}");
                    branches.insert(o.branch);
                }
            }
            for i in 0..m {
                let o = check_alglem(&c, m, i).unwrap();
                assert!(o.holds, "m={m} i={i} {o:?}");
                branches.insert(o.branch);
            }
        }
        assert_eq!(branches.len(), 5, "{branches:?}");
    }

    #[test]
    fn a_wrong_identity_fails() {
        let c = ctx3();
        let lhs = f_poly(&c, 4).unwrap().psi();
        let rhs = f_poly(&c, 4).unwrap();
        assert!(!compare("x", &lhs, &rhs).unwrap().holds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mul_is_commutative_and_weights_add(
            a in proptest::collection::vec(-100i64..100, 1..4),
            b in proptest::collection::vec(-100i64..100, 1..4),
        ) {
            let c = ctx3();
            let mk = |xs: &[i64]| {
                let n = xs.len() as u32 - 1;
                BivarPoly::from_terms(&c, xs.iter().enumerate().map(|(k, &x)| ((n - k as u32, k as u32), int(&c, x)))).unwrap()
            };
            let (f, g) = (mk(&a), mk(&b));
            let fg = f.mul(&g).unwrap();
            prop_assert_eq!(&fg, &g.mul(&f).unwrap());
            if !fg.is_zero() {
                prop_assert_eq!(fg.weight(), Some(f.weight().unwrap() + g.weight().unwrap()));
            }
            prop_assert_eq!(fg.psi(), f.psi().mul(&g.psi()).unwrap());
        }

        #[test]
        fn c_expansion_round_trips(
            n in 0u32..=8,
            coeffs in proptest::collection::vec((-3i64..=3, -1000i64..1000), 9),
        ) {
            let c = ctx3();
            let f = BivarPoly::from_terms(&c, (0..=n).map(|b| {
                let (v, x) = coeffs[b as usize];
                ((n - b, b), int(&c, x).scale_by_p_power(v))
            }))
            .unwrap();
            let lambdas = expand_in_c_basis(&f).unwrap();
            prop_assert!(reconstruct(&c, &lambdas).unwrap().agrees(&f).unwrap());
            let r = check_integrality(&f).unwrap();
            let coords = expand_in_integral_basis(&f).unwrap();
            let integral = coords.iter().all(|(_, mu)| mu.valuation().is_none_or(|v| v >= 0));
            prop_assert_eq!(integral, r.cond1 && r.cond2);
        }
    }
}
