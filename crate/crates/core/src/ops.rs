//! The operation matrices `D`, `S`, `R = D + S`, `R_n = R - q_hat^(n-1) I`
//! and `X_n = R_1 R_2 ... R_n`, their closed entry formulas, and the map
//! `sum a_n phi_n -> sum a_n X_n` on finite truncations.

use crate::error::{Error, Result};
use crate::padic::{Ctx, PadicInt};
use crate::qcalc::{binom, qbinom_eval};
use crate::utmat::UTWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicMatrix {
    /// `diag(1, q_hat, q_hat^2, ...)`.
    D,
    /// The superdiagonal shift.
    S,
    /// `D + S`, the matrix of the Adams operation.
    R,
}

/// Exponent of `q_hat` picked up by row `row` after `steps` diagonal factors.
///
/// `(D^i S^j)[s][s+j] = q_hat^(s*i)` with 0-based `s`; the 1-based form of the
/// same entry reads `q_hat^((s-1)*i)`. Both closed formulas go through here.
fn row_exponent(row: u64, steps: u64) -> u64 {
    row * steps
}

pub fn build_basic(ctx: &Ctx, kind: BasicMatrix, size: usize) -> UTWindow {
    UTWindow::from_fn(ctx, size, |i, j| match (kind, j - i) {
        (BasicMatrix::D | BasicMatrix::R, 0) => ctx.q_hat_pow(i as u64),
        (BasicMatrix::S | BasicMatrix::R, 1) => ctx.one(),
        _ => ctx.zero(),
    })
}

/// `R_n = R - q_hat^(n-1) I` for `n >= 1`.
pub fn build_rn(ctx: &Ctx, n: u64, size: usize) -> Result<UTWindow> {
    if n < 1 {
        return Err(Error::BadIndex(format!("R_n needs n >= 1, got {n}")));
    }
    let shift = ctx.q_hat_pow(n - 1);
    Ok(UTWindow::from_fn(ctx, size, |i, j| match j - i {
        0 => ctx.q_hat_pow(i as u64).sub_unchecked(&shift),
        1 => ctx.one(),
        _ => ctx.zero(),
    }))
}

/// `X_n = R_1 R_2 ... R_n`; `X_0 = I`.
pub fn build_xn(ctx: &Ctx, n: u64, size: usize) -> UTWindow {
    (1..=n).fold(UTWindow::identity(ctx, size), |x, k| {
        x.mul(&build_rn(ctx, k, size).expect("k >= 1"))
            .expect("same window")
    })
}

/// `X_0, X_1, ..., X_nmax` built incrementally via `X_{n+1} = X_n R_{n+1}`.
pub fn xn_sequence(ctx: &Ctx, nmax: u64, size: usize) -> Vec<UTWindow> {
    let mut out = Vec::with_capacity(nmax as usize + 1);
    out.push(UTWindow::identity(ctx, size));
    for k in 1..=nmax {
        let next = out[k as usize - 1]
            .mul(&build_rn(ctx, k, size).expect("k >= 1"))
            .expect("same window");
        out.push(next);
    }
    out
}

/// Closed form of `(R^n)[s][s+c]`: `[n, n-c]_{q_hat} q_hat^(s(n-c))`, zero
/// unless `0 <= c <= n`.
pub fn rpower_closed(ctx: &Ctx, n: u64, s: u64, c: i64) -> PadicInt {
    if c < 0 || c as u64 > n {
        return ctx.zero();
    }
    let k = n - c as u64;
    qbinom_eval(n, k as i64, &ctx.q_hat()).mul_unchecked(&ctx.q_hat_pow(row_exponent(s, k)))
}

/// Closed form of `(X_n)[s][s+c]`:
/// `sum_{i=c}^{n} (-1)^(n-i) q_hat^(C(n-i,2) + s(i-c)) [n,i] [i,i-c]`,
/// zero unless `0 <= c <= n`.
pub fn xn_closed(ctx: &Ctx, n: u64, s: u64, c: i64) -> PadicInt {
    if c < 0 || c as u64 > n {
        return ctx.zero();
    }
    let c = c as u64;
    let qh = ctx.q_hat();
    (c..=n).fold(ctx.zero(), |acc, i| {
        let exp = binom(n - i, 2) + row_exponent(s, i - c);
        let term = ctx
            .q_hat_pow(exp)
            .mul_unchecked(&qbinom_eval(n, i as i64, &qh))
            .mul_unchecked(&qbinom_eval(i, (i - c) as i64, &qh));
        if (n - i).is_multiple_of(2) {
            acc.add_unchecked(&term)
        } else {
            acc.sub_unchecked(&term)
        }
    })
}

/// `X_n` as the alternating sum `sum_i (-1)^(n-i) q_hat^C(n-i,2) [n,i] R^i`,
/// with explicit powers of `R`.
pub fn xn_expand_binomial(ctx: &Ctx, n: u64, size: usize) -> UTWindow {
    let r = build_basic(ctx, BasicMatrix::R, size);
    let qh = ctx.q_hat();
    (0..=n).fold(UTWindow::zero(ctx, size), |acc, i| {
        let mut coeff = ctx
            .q_hat_pow(binom(n - i, 2))
            .mul_unchecked(&qbinom_eval(n, i as i64, &qh));
        if (n - i) % 2 == 1 {
            coeff = coeff.neg();
        }
        let term = r.pow(i).scale(&coeff).expect("same context");
        acc.add(&term).expect("same window")
    })
}

/// `sum_{n=0}^{M} a_n X_n` on the window.
///
/// `X_n` has its first `n` columns zero, so once `n` reaches `W` every
/// remaining term vanishes on the window; both facts are checked as the sum
/// is accumulated.
pub fn alpha(ctx: &Ctx, coeffs: &[PadicInt], size: usize) -> UTWindow {
    let mut acc = UTWindow::zero(ctx, size);
    let mut x = UTWindow::identity(ctx, size);
    for (n, a) in coeffs.iter().enumerate() {
        if n > 0 {
            x = x
                .mul(&build_rn(ctx, n as u64, size).expect("n >= 1"))
                .expect("same window");
        }
        assert!(
            x.filtration_level() >= n.min(size),
            "X_{n} has a nonzero entry in its first {n} columns"
        );
        if n >= size {
            // X_m lies in the ideal U_W for every m >= n.
            break;
        }
        acc = acc.add(&x.scale(a).expect("same context")).expect("same window");
    }
    acc
}
