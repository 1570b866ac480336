//! Named verification suites. Each suite expands into independent checks that
//! run on the rayon pool; results come back sorted so a report does not depend
//! on scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::basis::{
    self, beta, big_f, check_integrality, expand_in_c_basis, expand_in_integral_basis, f_poly, g_poly,
    reconstruct, sample_condition1, BivarPoly, FIndex, FMode,
};
use crate::conj::{normalizing_matrix, random_element, verify_conjugation, AFormMatrix, CFormMatrix};
use crate::error::{Error, Result};
use crate::ops::{
    alpha, build_basic, build_xn, rpower_closed, xn_closed, xn_expand_binomial, xn_sequence, BasicMatrix,
};
use crate::padic::{nu_factorial, Ctx, PadicScaled};
use crate::qcalc::{qbinom, qbinom_eval, QPoly, MAX_QBINOM_N};
use crate::utmat::UTWindow;

/// Where each check comes from. The labels are fixed report strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Anchor {
    QBinomialExpansion,
    PowerClosedForm,
    LeadingColumnsVanish,
    ProductClosedForm,
    NormalForm,
    IntegralityConditions,
    IntegralBasis,
    ActionOnF,
    ActionOnG,
    Alglem,
    LowerG,
    OperationRingMap,
}

impl Anchor {
    pub const ALL: [Anchor; 12] = [
        Anchor::QBinomialExpansion,
        Anchor::PowerClosedForm,
        Anchor::LeadingColumnsVanish,
        Anchor::ProductClosedForm,
        Anchor::NormalForm,
        Anchor::IntegralityConditions,
        Anchor::IntegralBasis,
        Anchor::ActionOnF,
        Anchor::ActionOnG,
        Anchor::Alglem,
        Anchor::LowerG,
        Anchor::OperationRingMap,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Anchor::QBinomialExpansion => "Eq. expand",
            Anchor::PowerClosedForm => "Lemma Rpower",
            Anchor::LeadingColumnsVanish => "Theorem app(1)",
            Anchor::ProductClosedForm => "Theorem app(3)",
            Anchor::NormalForm => "§4.3 Theorem",
            Anchor::IntegralityConditions => "Prop. subring",
            Anchor::IntegralBasis => "Theorem basis",
            Anchor::ActionOnF => "Lemma action on f",
            Anchor::ActionOnG => "Prop. action on g",
            Anchor::Alglem => "Lemma alglem",
            Anchor::LowerG => "Lemma lower g",
            Anchor::OperationRingMap => "Theorem topringapp",
        }
    }
}

impl Serialize for Anchor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    QbinomMatrix,
    Rpower,
    Xn,
    Alpha,
    Conjugation,
    Integrality,
    Action,
    Alglem,
    LowerG,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::QbinomMatrix,
        Suite::Rpower,
        Suite::Xn,
        Suite::Alpha,
        Suite::Conjugation,
        Suite::Integrality,
        Suite::Action,
        Suite::Alglem,
        Suite::LowerG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::QbinomMatrix => "qbinom-matrix",
            Suite::Rpower => "rpower",
            Suite::Xn => "xn",
            Suite::Alpha => "alpha",
            Suite::Conjugation => "conjugation",
            Suite::Integrality => "integrality",
            Suite::Action => "action",
            Suite::Alglem => "alglem",
            Suite::LowerG => "lower-g",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    fn uses_window(self) -> bool {
        matches!(
            self,
            Suite::QbinomMatrix | Suite::Rpower | Suite::Xn | Suite::Alpha | Suite::Conjugation
        )
    }

    fn uses_basis(self) -> bool {
        matches!(
            self,
            Suite::Integrality | Suite::Action | Suite::Alglem | Suite::LowerG
        )
    }

    /// Distinguishes the random streams of different suites.
    fn stream_tag(self) -> u64 {
        self as u64 + 1
    }
}

impl Serialize for Suite {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub ctx: Ctx,
    pub window: usize,
    pub nmax: u64,
    pub kmax: u64,
    pub trials: usize,
    pub seed: u64,
}

/// Number of coefficient vectors and their length for the operation-ring map.
pub const ALPHA_VECTORS: usize = 20;
pub const ALPHA_LENGTH: usize = 10;
pub const ALPHA_COLUMNS: usize = 6;

impl SuiteConfig {
    /// Rejects windows too small for `nmax` and precisions too small for
    /// `kmax` before anything runs.
    pub fn validate(&self, suites: &[Suite]) -> Result<()> {
        if suites.iter().any(|s| s.uses_window()) {
            if self.window < self.nmax as usize + 2 {
                return Err(Error::BadIndex(format!(
                    "W = {} must be at least nmax + 2 = {}",
                    self.window,
                    self.nmax + 2
                )));
            }
            if self.nmax > MAX_QBINOM_N || self.window as u64 > MAX_QBINOM_N {
                return Err(Error::BadIndex(format!(
                    "nmax and W must not exceed {MAX_QBINOM_N}"
                )));
            }
        }
        if suites.iter().any(|s| s.uses_basis()) {
            if self.kmax < 1 || self.kmax > 40 {
                return Err(Error::BadIndex(format!("kmax = {} outside 1..=40", self.kmax)));
            }
            basis::check_precision(&self.ctx, self.kmax)?;
        }
        Ok(())
    }

    /// Per-trial generator: the base seed selects the key, the suite and
    /// trial select the stream, so results do not depend on scheduling.
    fn rng(&self, suite: Suite, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((suite.stream_tag() << 32) | trial as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub anchor: Anchor,
    pub check: String,
    pub params: Value,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn sort_key(&self) -> (Suite, Anchor, String, String) {
        (
            self.suite,
            self.anchor,
            self.check.clone(),
            self.params.to_string(),
        )
    }
}

type Job<'a> = Box<dyn Fn() -> Result<(bool, Option<String>)> + Send + Sync + 'a>;

struct Plan<'a> {
    suite: Suite,
    jobs: Vec<(Anchor, String, Value, Job<'a>)>,
}

impl<'a> Plan<'a> {
    fn new(suite: Suite) -> Self {
        Plan { suite, jobs: vec![] }
    }

    fn add(
        &mut self,
        anchor: Anchor,
        check: &str,
        params: Value,
        job: impl Fn() -> Result<(bool, Option<String>)> + Send + Sync + 'a,
    ) {
        self.jobs.push((anchor, check.to_string(), params, Box::new(job)));
    }

    fn run(self) -> Vec<CheckResult> {
        let suite = self.suite;
        let mut out: Vec<CheckResult> = self
            .jobs
            .into_par_iter()
            .map(|(anchor, check, params, job)| {
                let (passed, detail) = match job() {
                    Ok(r) => r,
                    Err(e) => (false, Some(e.to_string())),
                };
                CheckResult {
                    suite,
                    anchor,
                    check,
                    params,
                    passed,
                    detail,
                }
            })
            .collect();
        out.sort_by_key(CheckResult::sort_key);
        out
    }
}

fn exact(ok: bool) -> Result<(bool, Option<String>)> {
    Ok((ok, None))
}

fn mismatch_detail(a: &UTWindow, b: &UTWindow) -> Result<(bool, Option<String>)> {
    let d = a.differences(b)?;
    Ok(if d.is_empty() {
        (true, None)
    } else {
        (
            false,
            Some(format!("{} entries differ, first at {:?}", d.len(), d[0])),
        )
    })
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    cfg.validate(&[suite])?;
    let mut plan = Plan::new(suite);
    match suite {
        Suite::QbinomMatrix => plan_qbinom_matrix(&mut plan, cfg),
        Suite::Rpower => plan_rpower(&mut plan, cfg),
        Suite::Xn => plan_xn(&mut plan, cfg),
        Suite::Alpha => plan_alpha(&mut plan, cfg),
        Suite::Conjugation => plan_conjugation(&mut plan, cfg),
        Suite::Integrality => plan_integrality(&mut plan, cfg),
        Suite::Action => plan_action(&mut plan, cfg),
        Suite::Alglem => plan_alglem(&mut plan, cfg),
        Suite::LowerG => plan_lower_g(&mut plan, cfg),
    }
    Ok(plan.run())
}

/// `prod_{j=1}^{i} (1 - q^(n-i+j))` against `[n, i] prod_{j=1}^{i} (1 - q^j)`.
fn product_formula_holds(n: u64, i: u64) -> bool {
    let factor = |k: u64| QPoly::one().sub(&QPoly::monomial(k as usize));
    let (mut lhs, mut rhs) = (QPoly::one(), qbinom(n, i as i64));
    for j in 1..=i {
        lhs = lhs.mul(&factor(n - i + j));
        rhs = rhs.mul(&factor(j));
    }
    lhs == rhs
}

fn plan_qbinom_matrix(plan: &mut Plan<'_>, cfg: &SuiteConfig) {
    let w = cfg.window;
    for n in 0..=cfg.nmax {
        let ctx = cfg.ctx.clone();
        plan.add(
            Anchor::QBinomialExpansion,
            "(D+S)^n = sum_i [n,i] D^i S^(n-i)",
            json!({"n": n, "W": w}),
            move || {
                let d = build_basic(&ctx, BasicMatrix::D, w);
                let s = build_basic(&ctx, BasicMatrix::S, w);
                let mut rhs = UTWindow::zero(&ctx, w);
                for i in 0..=n {
                    let term = d
                        .pow(i)
                        .mul(&s.pow(n - i))?
                        .scale(&qbinom_eval(n, i as i64, &ctx.q_hat()))?;
                    rhs = rhs.add(&term)?;
                }
                mismatch_detail(&build_basic(&ctx, BasicMatrix::R, w).pow(n), &rhs)
            },
        );
        plan.add(
            Anchor::QBinomialExpansion,
            "product formula",
            json!({"n": n}),
            move || exact((0..=n).all(|i| product_formula_holds(n, i))),
        );
        if n >= 1 {
            plan.add(
                Anchor::QBinomialExpansion,
                "both recurrences",
                json!({"n": n}),
                move || {
                    exact((0..=n as i64).all(|i| {
                        let (a, b) = (qbinom(n - 1, i - 1), qbinom(n - 1, i));
                        let first = a.add(&b.shift(i as usize));
                        let second = a.shift((n as i64 - i) as usize).add(&b);
                        qbinom(n, i) == first && qbinom(n, i) == second
                    }))
                },
            );
        }
    }
    let ctx = cfg.ctx.clone();
    plan.add(
        Anchor::QBinomialExpansion,
        "SD = q_hat DS",
        json!({"W": w}),
        move || {
            let d = build_basic(&ctx, BasicMatrix::D, w);
            let s = build_basic(&ctx, BasicMatrix::S, w);
            mismatch_detail(&s.mul(&d)?, &d.mul(&s)?.scale(&ctx.q_hat())?)
        },
    );
}

fn plan_rpower(plan: &mut Plan<'_>, cfg: &SuiteConfig) {
    let w = cfg.window;
    for n in 0..=cfg.nmax {
        let ctx = cfg.ctx.clone();
        plan.add(
            Anchor::PowerClosedForm,
            "closed form of R^n",
            json!({"n": n, "W": w}),
            move || {
                let closed = UTWindow::from_fn(&ctx, w, |s, t| {
                    rpower_closed(&ctx, n, s as u64, t as i64 - s as i64)
                });
                let r = build_basic(&ctx, BasicMatrix::R, w);
                let iterated = (0..n).try_fold(UTWindow::identity(&ctx, w), |acc, _| acc.mul(&r))?;
                mismatch_detail(&closed, &iterated)
            },
        );
    }
}

fn plan_xn(plan: &mut Plan<'_>, cfg: &SuiteConfig) {
    let w = cfg.window;
    let nmax = cfg.nmax;
    let ctx = cfg.ctx.clone();
    plan.add(
        Anchor::LeadingColumnsVanish,
        "X_(n+1) = X_n R_(n+1)",
        json!({"nmax": nmax, "W": w}),
        move || {
            let xs = xn_sequence(&ctx, nmax, w);
            exact(
                xs.iter()
                    .enumerate()
                    .all(|(n, x)| x == &build_xn(&ctx, n as u64, w)),
            )
        },
    );
    for n in 0..=nmax {
        let ctx = cfg.ctx.clone();
        plan.add(
            Anchor::LeadingColumnsVanish,
            "first n columns of X_n vanish",
            json!({"n": n, "W": w}),
            move || {
                let level = build_xn(&ctx, n, w).filtration_level();
                Ok((level >= n as usize, Some(format!("filtration level {level}"))))
            },
        );
        if n == 0 {
            continue;
        }
        let ctx = cfg.ctx.clone();
        plan.add(
            Anchor::ProductClosedForm,
            "(X_n)_(s,s+c) = 0 for c > n",
            json!({"n": n, "W": w}),
            move || {
                let x = build_xn(&ctx, n, w);
                exact((0..w).all(|s| (s + n as usize + 1..w).all(|t| x.get(s, t).is_zero())))
            },
        );
        let ctx = cfg.ctx.clone();
        plan.add(
            Anchor::ProductClosedForm,
            "closed form of X_n",
            json!({"n": n, "W": w}),
            move || {
                let closed =
                    UTWindow::from_fn(&ctx, w, |s, t| xn_closed(&ctx, n, s as u64, t as i64 - s as i64));
                mismatch_detail(&closed, &build_xn(&ctx, n, w))
            },
        );
        let ctx = cfg.ctx.clone();
        plan.add(
            Anchor::ProductClosedForm,
            "alternating sum of R powers",
            json!({"n": n, "W": w}),
            move || mismatch_detail(&xn_expand_binomial(&ctx, n, w), &build_xn(&ctx, n, w)),
        );
    }
}

fn plan_alpha<'a>(plan: &mut Plan<'a>, cfg: &'a SuiteConfig) {
    let w = cfg.window;
    for t in 0..ALPHA_VECTORS {
        plan.add(
            Anchor::OperationRingMap,
            "column j depends only on a_0..a_j",
            json!({"trial": t, "seed": cfg.seed, "M": ALPHA_LENGTH, "W": w}),
            move || {
                let ctx = &cfg.ctx;
                let mut rng = cfg.rng(Suite::Alpha, t);
                let coeffs: Vec<_> = (0..=ALPHA_LENGTH)
                    .map(|_| random_element(ctx, &mut rng))
                    .collect();
                let full = alpha(ctx, &coeffs, w);
                let cols = ALPHA_COLUMNS.min(w - 1);
                exact((0..=cols).all(|j| full.column(j) == alpha(ctx, &coeffs[..=j], w).column(j)))
            },
        );
    }
    plan.add(
        Anchor::OperationRingMap,
        "terms beyond the window vanish",
        json!({"seed": cfg.seed, "W": w}),
        move || {
            let ctx = &cfg.ctx;
            let mut rng = cfg.rng(Suite::Alpha, ALPHA_VECTORS);
            let coeffs: Vec<_> = (0..w + 6).map(|_| random_element(ctx, &mut rng)).collect();
            mismatch_detail(&alpha(ctx, &coeffs, w), &alpha(ctx, &coeffs[..w], w))
        },
    );
}

fn plan_conjugation<'a>(plan: &mut Plan<'a>, cfg: &'a SuiteConfig) {
    let w = cfg.window;
    let p = cfg.ctx.p();
    for t in 0..cfg.trials {
        plan.add(
            Anchor::NormalForm,
            "UC = RU",
            json!({"trial": t, "seed": cfg.seed, "p": p, "W": w}),
            move || {
                let mut rng = cfg.rng(Suite::Conjugation, 2 * t);
                let c = CFormMatrix::random(&cfg.ctx, w, &mut rng);
                let rep = verify_conjugation(&c);
                Ok((
                    rep.passed() && rep.u_in_u_infty,
                    Some(serde_json::to_string(&rep).expect("plain data")),
                ))
            },
        );
        plan.add(
            Anchor::NormalForm,
            "B A B^-1 = R with B = U E",
            json!({"trial": t, "seed": cfg.seed, "p": p, "W": w}),
            move || {
                let mut rng = cfg.rng(Suite::Conjugation, 2 * t + 1);
                let a = AFormMatrix::random(&cfg.ctx, w, &mut rng);
                let b = normalizing_matrix(&a)?;
                let conj = b.mul(a.window())?.mul(&b.inverse()?)?;
                mismatch_detail(&conj, &build_basic(&cfg.ctx, BasicMatrix::R, w))
            },
        );
    }
}

fn is_integral(x: &PadicScaled) -> bool {
    x.valuation().is_none_or(|v| v >= 0)
}

/// A random element of weight `n`: an integer combination of the basis
/// elements of that weight, plus (half the time) a term with a small
/// denominator that may break integrality.
fn random_weight_n(ctx: &Ctx, n: u64, rng: &mut impl Rng) -> Result<BivarPoly> {
    let mut f = BivarPoly::zero(ctx);
    for l in 0..=n {
        let c = PadicScaled::from_padic_int(&random_element(ctx, rng));
        f = f.add(&g_poly(ctx, n, l)?.scale(&c)?)?;
    }
    if rng.gen_bool(0.5) {
        let b = rng.gen_range(0..=n) as u32;
        let c = PadicScaled::from_i64(ctx, rng.gen_range(1..1000)).scale_by_p_power(-rng.gen_range(1..=3));
        f = f.add(&BivarPoly::monomial(ctx, n as u32 - b, b, c))?;
    }
    Ok(f)
}

fn plan_integrality<'a>(plan: &mut Plan<'a>, cfg: &'a SuiteConfig) {
    let ctx = &cfg.ctx;
    let p = ctx.p();
    for k in 0..=cfg.kmax {
        plan.add(
            Anchor::IntegralityConditions,
            "f_k satisfies both conditions",
            json!({"k": k}),
            move || {
                let r = check_integrality(&f_poly(ctx, k)?)?;
                exact(r.cond1 && r.cond2)
            },
        );
        plan.add(
            Anchor::IntegralityConditions,
            "sampling agrees with condition 1",
            json!({"k": k, "samples": 10, "seed": cfg.seed}),
            move || {
                let mut rng = cfg.rng(Suite::Integrality, k as usize);
                let top = f_poly(ctx, k)?.mul_u_over_p(nu_factorial(p, k) as u32);
                exact(sample_condition1(&top, 10, &mut rng)?)
            },
        );
        plan.add(
            Anchor::IntegralBasis,
            "(u/p)^nu(k!) f_k satisfies condition 1",
            json!({"k": k}),
            move || {
                let top = f_poly(ctx, k)?.mul_u_over_p(nu_factorial(p, k) as u32);
                exact(check_integrality(&top)?.cond1)
            },
        );
        plan.add(
            Anchor::IntegralBasis,
            "(u/p)^(nu(k!)+1) f_k fails condition 1",
            json!({"k": k}),
            move || {
                let j = nu_factorial(p, k) as u32 + 1;
                let raw = big_f(ctx, FIndex { i: 0, j, k: k as u32 }, FMode::Raw)?;
                exact(!check_integrality(&raw)?.cond1)
            },
        );
    }
    plan.add(
        Anchor::IntegralityConditions,
        "u/p satisfies only condition 2",
        json!({}),
        move || {
            let r = check_integrality(&BivarPoly::u(ctx).scale_by_p_power(-1))?;
            exact(!r.cond1 && r.cond2)
        },
    );
    for k in 0..=12u64 {
        plan.add(
            Anchor::IntegralityConditions,
            "nu(prod (q_hat^k - q_hat^i)) = nu(k!) + k",
            json!({"k": k}),
            move || {
                let want = nu_factorial(p, k) + k;
                let wide = ctx.with_precision(ctx.precision().max(nu_factorial(p, 12) as u32 + 13))?;
                let got = basis::c_denominator(&wide, k).valuation().finite();
                Ok((got == Some(want as u32), Some(format!("valuation {got:?}"))))
            },
        );
    }
    for t in 0..cfg.trials {
        plan.add(
            Anchor::IntegralBasis,
            "c_k coordinates reconstruct f",
            json!({"trial": t, "seed": cfg.seed}),
            move || {
                let mut rng = cfg.rng(Suite::Integrality, 1000 + t);
                let n = rng.gen_range(0..=cfg.kmax);
                let f = random_weight_n(ctx, n, &mut rng)?;
                exact(reconstruct(ctx, &expand_in_c_basis(&f)?)?.agrees(&f)?)
            },
        );
        plan.add(
            Anchor::IntegralBasis,
            "integral coordinates over F_ijk iff both conditions",
            json!({"trial": t, "seed": cfg.seed}),
            move || {
                let mut rng = cfg.rng(Suite::Integrality, 2000 + t);
                let n = rng.gen_range(0..=cfg.kmax.min(6));
                let f = random_weight_n(ctx, n, &mut rng)?;
                let r = check_integrality(&f)?;
                let coords = expand_in_integral_basis(&f)?;
                let integral = coords.iter().all(|(_, mu)| is_integral(mu));
                let admissible = coords.iter().all(|(idx, _)| idx.is_admissible(p));
                let mut back = BivarPoly::zero(ctx);
                for (idx, mu) in &coords {
                    back = back.add(&big_f(ctx, *idx, FMode::Basis)?.scale(mu)?)?;
                }
                let ok = admissible && back.agrees(&f)? && integral == (r.cond1 && r.cond2);
                Ok((
                    ok,
                    Some(format!("weight {n}, cond1 {}, cond2 {}", r.cond1, r.cond2)),
                ))
            },
        );
    }
}

fn outcome(o: basis::IdentityOutcome) -> Result<(bool, Option<String>)> {
    Ok((
        o.holds,
        Some(format!("{}; compared mod p^{}", o.branch, o.digits)),
    ))
}

fn plan_action<'a>(plan: &mut Plan<'a>, cfg: &'a SuiteConfig) {
    let ctx = &cfg.ctx;
    for m in 1..=cfg.kmax {
        plan.add(
            Anchor::ActionOnF,
            "psi(f_m) = q_hat^m f_m + p^nu(m) u f_(m-1)",
            json!({"m": m}),
            move || outcome(basis::check_action_on_f(ctx, m)?),
        );
    }
    for m in 0..=cfg.kmax {
        for n in 0..=m {
            plan.add(
                Anchor::ActionOnG,
                "psi(g_(m,n))",
                json!({"m": m, "n": n}),
                move || outcome(basis::check_action_on_g(ctx, m, n)?),
            );
        }
    }
}

fn plan_alglem<'a>(plan: &mut Plan<'a>, cfg: &'a SuiteConfig) {
    let ctx = &cfg.ctx;
    for m in 1..=cfg.kmax {
        for i in 0..m {
            plan.add(
                Anchor::Alglem,
                "(u/p)^nu(m!) g_(m,i)",
                json!({"m": m, "i": i}),
                move || outcome(basis::check_alglem(ctx, m, i)?),
            );
        }
    }
    let p = ctx.p();
    plan.add(Anchor::Alglem, "beta(m,i) >= 0", json!({"mmax": 30}), move || {
        exact((0..=30).all(|m| (0..=m).all(|i| beta(p, m, i) >= 0)))
    });
}

fn plan_lower_g<'a>(plan: &mut Plan<'a>, cfg: &'a SuiteConfig) {
    let ctx = &cfg.ctx;
    for m in 0..=cfg.kmax {
        for n in 0..=m {
            for i in 0..=n {
                plan.add(
                    Anchor::LowerG,
                    "u^(m-n) g_(n,i)",
                    json!({"m": m, "n": n, "i": i}),
                    move || outcome(basis::check_lower_g(ctx, m, n, i)?),
                );
            }
        }
    }
}

/// Totals and the anchors seen, for the last report line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub failed: usize,
    pub anchors: Vec<&'static str>,
}

pub fn summarize(results: &[CheckResult]) -> Summary {
    let anchors: BTreeMap<Anchor, ()> = results.iter().map(|r| (r.anchor, ())).collect();
    Summary {
        checks: results.len(),
        failed: results.iter().filter(|r| !r.passed).count(),
        anchors: anchors.keys().map(|a| a.label()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_context;

    fn cfg(seed: u64) -> SuiteConfig {
        SuiteConfig {
            ctx: make_context(3, 2, 20).unwrap(),
            window: 8,
            nmax: 5,
            kmax: 5,
            trials: 4,
            seed,
        }
    }

    #[test]
    fn every_suite_passes_small() {
        let c = cfg(1);
        for s in Suite::ALL {
            let rs = run_suite(s, &c).unwrap();
            assert!(!rs.is_empty());
            for r in &rs {
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn anchors_cover_the_list() {
        let c = cfg(2);
        let mut all = vec![];
        for s in Suite::ALL {
            all.extend(run_suite(s, &c).unwrap());
        }
        let labels = summarize(&all).anchors;
        let mut want: Vec<_> = Anchor::ALL.iter().map(|a| a.label()).collect();
        want.sort();
        let mut got = labels.clone();
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Conjugation, &cfg(3)).unwrap();
        let b = run_suite(Suite::Conjugation, &cfg(3)).unwrap();
        assert_eq!(a, b);
        let c = run_suite(Suite::Conjugation, &cfg(4)).unwrap();
        assert_eq!(a.len(), c.len());
    }

    #[test]
    fn validation() {
        let mut c = cfg(0);
        c.window = 6;
        assert!(matches!(c.validate(&[Suite::Xn]), Err(Error::BadIndex(_))));
        assert!(c.validate(&[Suite::Action]).is_ok());
        let mut c = cfg(0);
        c.ctx = make_context(3, 2, 10).unwrap();
        c.kmax = 8;
        assert!(matches!(
            c.validate(&[Suite::Action]),
            Err(Error::BadPrecision(_))
        ));
        assert_eq!(Suite::from_name("lower-g"), Some(Suite::LowerG));
        assert_eq!(Suite::from_name("nope"), None);
    }
}
