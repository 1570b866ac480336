//! Conjugating the Adams-operation matrix into the normal form `R`.
//!
//! Input matrices have diagonal `q_hat^i`, unit superdiagonal `u_i` and free
//! entries above. A diagonal `E` rescales the superdiagonal to ones
//! (`C = E A E^-1`), and the row-recursive `U` then satisfies `U C = R U`.
//! The units and free entries are not computable from first principles, so
//! everything here is checked for arbitrary (seeded random) inputs.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::{build_basic, BasicMatrix};
use crate::padic::{Ctx, PadicInt};
use crate::utmat::UTWindow;

/// Upper-triangular matrix with diagonal `q_hat^i`, unit superdiagonal and
/// arbitrary `Z_p` entries from the second superdiagonal on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AFormMatrix {
    window: UTWindow,
}

/// An [`AFormMatrix`] whose superdiagonal is all ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFormMatrix {
    window: UTWindow,
}

fn check_diagonal(window: &UTWindow) -> Result<()> {
    let ctx = window.ctx();
    for i in 0..window.size() {
        if window.entry(i, i) != &ctx.q_hat_pow(i as u64) {
            return Err(Error::BadIndex(format!("diagonal entry {i} is not q_hat^{i}")));
        }
    }
    Ok(())
}

impl AFormMatrix {
    /// Assembles the matrix from its superdiagonal units and a generator
    /// for the entries `a[i][j]`, `j >= i + 2`.
    pub fn new(
        ctx: &Ctx,
        superdiag: &[PadicInt],
        mut upper: impl FnMut(usize, usize) -> PadicInt,
    ) -> Result<AFormMatrix> {
        let size = superdiag.len() + 1;
        if let Some(u) = superdiag.iter().find(|u| !u.is_unit()) {
            return Err(Error::NotAUnit(u.to_string()));
        }
        let window = UTWindow::from_fn(ctx, size, |i, j| match j - i {
            0 => ctx.q_hat_pow(i as u64),
            1 => superdiag[i].clone(),
            _ => upper(i, j),
        });
        Ok(AFormMatrix { window })
    }

    pub fn from_window(window: UTWindow) -> Result<AFormMatrix> {
        check_diagonal(&window)?;
        for i in 0..window.size().saturating_sub(1) {
            if !window.entry(i, i + 1).is_unit() {
                return Err(Error::NotAUnit(window.entry(i, i + 1).to_string()));
            }
        }
        Ok(AFormMatrix { window })
    }

    pub fn random(ctx: &Ctx, size: usize, rng: &mut impl Rng) -> AFormMatrix {
        let superdiag: Vec<PadicInt> = (0..size.saturating_sub(1))
            .map(|_| random_unit(ctx, rng))
            .collect();
        AFormMatrix::new(ctx, &superdiag, |_, _| random_element(ctx, rng)).expect("units by construction")
    }

    pub fn window(&self) -> &UTWindow {
        &self.window
    }

    pub fn superdiag(&self) -> Vec<PadicInt> {
        (0..self.window.size().saturating_sub(1))
            .map(|i| self.window.entry(i, i + 1).clone())
            .collect()
    }
}

impl CFormMatrix {
    pub fn new(ctx: &Ctx, size: usize, mut upper: impl FnMut(usize, usize) -> PadicInt) -> CFormMatrix {
        let window = UTWindow::from_fn(ctx, size, |i, j| match j - i {
            0 => ctx.q_hat_pow(i as u64),
            1 => ctx.one(),
            _ => upper(i, j),
        });
        CFormMatrix { window }
    }

    pub fn from_window(window: UTWindow) -> Result<CFormMatrix> {
        check_diagonal(&window)?;
        for i in 0..window.size().saturating_sub(1) {
            if !window.entry(i, i + 1).is_one() {
                return Err(Error::BadIndex(format!("superdiagonal entry {i} is not 1")));
            }
        }
        Ok(CFormMatrix { window })
    }

    pub fn random(ctx: &Ctx, size: usize, rng: &mut impl Rng) -> CFormMatrix {
        CFormMatrix::new(ctx, size, |_, _| random_element(ctx, rng))
    }

    pub fn window(&self) -> &UTWindow {
        &self.window
    }

    /// The free entry `c[s][j]`, `j >= s + 2`.
    pub fn c(&self, s: usize, j: usize) -> &PadicInt {
        self.window.entry(s, j)
    }
}

pub fn random_element(ctx: &Ctx, rng: &mut impl Rng) -> PadicInt {
    let digits: Vec<u32> = (0..ctx.precision())
        .map(|_| rng.gen_range(0..ctx.p() as u32))
        .collect();
    let r = digits
        .iter()
        .rev()
        .fold(num_bigint::BigUint::default(), |acc, &d| acc * ctx.p() + d);
    ctx.from_residue(r).expect("below p^N")
}

pub fn random_unit(ctx: &Ctx, rng: &mut impl Rng) -> PadicInt {
    loop {
        let x = random_element(ctx, rng);
        if x.is_unit() {
            return x;
        }
    }
}

/// Diagonal matrix with `E[0][0] = 1` and `E[i][i] = u_0 u_1 ... u_{i-1}`.
pub fn build_e(ctx: &Ctx, superdiag_units: &[PadicInt], size: usize) -> Result<UTWindow> {
    if size > 0 && superdiag_units.len() < size - 1 {
        return Err(Error::BadIndex(format!(
            "need {} superdiagonal units, got {}",
            size - 1,
            superdiag_units.len()
        )));
    }
    let mut diag = Vec::with_capacity(size);
    let mut running = ctx.one();
    for i in 0..size {
        diag.push(running.clone());
        if i + 1 < size {
            let u = &superdiag_units[i];
            if !u.is_unit() {
                return Err(Error::NotAUnit(u.to_string()));
            }
            running = running.mul(u)?;
        }
    }
    Ok(UTWindow::diagonal(ctx, &diag))
}

/// `C = E A E^-1`.
pub fn normalize_superdiag(a: &AFormMatrix) -> Result<CFormMatrix> {
    let w = a.window();
    let e = build_e(w.ctx(), &a.superdiag(), w.size())?;
    let c = e.mul(w)?.mul(&e.inverse()?)?;
    for i in 0..c.size() {
        assert_eq!(
            c.entry(i, i),
            w.entry(i, i),
            "conjugation by a diagonal moved the diagonal"
        );
        if i + 1 < c.size() {
            assert!(
                c.entry(i, i + 1).is_one(),
                "superdiagonal entry {i} not normalized"
            );
        }
    }
    Ok(CFormMatrix { window: c })
}

/// The row-recursive `U` with `U C U^-1 = R`:
/// `U[0][j] = [j == 0]` and
/// `U[i+1][j] = sum_{s=i}^{j-2} U[i][s] c[s][j] + U[i][j-1] + (q_hat^j - q_hat^i) U[i][j]`.
pub fn build_u(c: &CFormMatrix) -> UTWindow {
    let ctx = c.window().ctx();
    let w = c.window().size();
    let q_pows: Vec<PadicInt> = (0..w).map(|k| ctx.q_hat_pow(k as u64)).collect();
    // Full rows, including the part below the diagonal, so the vanishing
    // there is computed rather than assumed.
    let mut rows: Vec<Vec<PadicInt>> = Vec::with_capacity(w);
    let mut row: Vec<PadicInt> = (0..w)
        .map(|j| if j == 0 { ctx.one() } else { ctx.zero() })
        .collect();
    for i in 0..w {
        let next: Vec<PadicInt> = (0..w)
            .map(|j| {
                let mut acc = ctx.zero();
                for s in i..j.saturating_sub(1) {
                    acc = acc.add_unchecked(&row[s].mul_unchecked(c.c(s, j)));
                }
                if j >= 1 {
                    acc = acc.add_unchecked(&row[j - 1]);
                }
                let d = q_pows[j].sub_unchecked(&q_pows[i]);
                acc.add_unchecked(&d.mul_unchecked(&row[j]))
            })
            .collect();
        rows.push(std::mem::replace(&mut row, next));
    }
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate().take(i) {
            assert!(x.is_zero(), "U[{i}][{j}] below the diagonal is nonzero");
        }
        assert!(r[i].is_unit(), "U[{i}][{i}] is not a unit");
    }
    UTWindow::from_fn(ctx, w, |i, j| rows[i][j].clone())
}

/// Outcome of comparing `U C` with `R U` on a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugationReport {
    pub size: usize,
    /// Entries where `UC` and `RU` differ.
    pub mismatches: usize,
    /// Smallest valuation of `(UC - RU)[i][j]` over mismatched entries.
    pub worst_valuation: Option<u32>,
    pub u_invertible: bool,
    pub u_in_u_infty: bool,
}

impl ConjugationReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.u_invertible
    }
}

pub fn verify_conjugation(c: &CFormMatrix) -> ConjugationReport {
    let ctx = c.window().ctx();
    let size = c.window().size();
    let u = build_u(c);
    let r = build_basic(ctx, BasicMatrix::R, size);
    let uc = u.mul(c.window()).expect("same window");
    let ru = r.mul(&u).expect("same window");
    let diff = uc.sub(&ru).expect("same window");
    let mut mismatches = 0;
    let mut worst: Option<u32> = None;
    for i in 0..size {
        for j in i..size {
            let d = diff.entry(i, j);
            if let Some(v) = d.valuation().finite() {
                mismatches += 1;
                worst = Some(worst.map_or(v, |w| w.min(v)));
            }
        }
    }
    let m = u.membership();
    ConjugationReport {
        size,
        mismatches,
        worst_valuation: worst,
        u_invertible: m.is_invertible,
        u_in_u_infty: m.is_in_u_infty,
    }
}

/// `B = U E` for an input matrix `A`; `B A B^-1` should equal `R`.
pub fn normalizing_matrix(a: &AFormMatrix) -> Result<UTWindow> {
    let w = a.window();
    let e = build_e(w.ctx(), &a.superdiag(), w.size())?;
    let c = normalize_superdiag(a)?;
    build_u(&c).mul(&e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_context;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u64, q: u64) -> Ctx {
        make_context(p, q, 20).unwrap()
    }

    #[test]
    fn build_e_examples() {
        let c = ctx(3, 2);
        assert_eq!(
            build_e(&c, &vec![c.one(); 3], 4).unwrap(),
            UTWindow::identity(&c, 4)
        );
        let e = build_e(&c, &vec![c.int(2); 3], 4).unwrap();
        let want: Vec<PadicInt> = [1, 2, 4, 8].iter().map(|&x| c.int(x)).collect();
        assert_eq!(e, UTWindow::diagonal(&c, &want));
        let bad = [c.int(2), c.int(3), c.int(2)];
        assert!(matches!(build_e(&c, &bad, 4), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn normalize_examples() {
        let c = ctx(3, 2);
        let a = AFormMatrix::new(&c, &vec![c.one(); 5], |_, _| c.zero()).unwrap();
        let cf = normalize_superdiag(&a).unwrap();
        assert_eq!(cf.window(), &build_basic(&c, BasicMatrix::R, 6));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = AFormMatrix::random(&c, 8, &mut rng);
            let cf = normalize_superdiag(&a).unwrap();
            let e = build_e(&c, &a.superdiag(), 8).unwrap();
            // direct conjugation oracle
            let direct = e.mul(a.window()).unwrap().mul(&e.inverse().unwrap()).unwrap();
            assert_eq!(cf.window(), &direct);
            for i in 0..8 {
                assert_eq!(cf.window().entry(i, i), &c.q_hat_pow(i as u64));
                if i < 7 {
                    assert!(cf.window().entry(i, i + 1).is_one());
                }
            }
        }
    }

    #[test]
    fn a_form_rejects_non_units() {
        let c = ctx(3, 2);
        assert!(matches!(
            AFormMatrix::new(&c, &[c.one(), c.int(6)], |_, _| c.zero()),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn u_first_rows() {
        let c = ctx(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let cf = CFormMatrix::random(&c, 6, &mut rng);
            let u = build_u(&cf);
            assert!(u.entry(0, 0).is_one());
            for j in 1..6 {
                assert!(u.entry(0, j).is_zero());
            }
            assert!(u.entry(1, 1).is_one());
            assert_eq!(u.entry(1, 2), cf.c(0, 2));
        }
    }

    #[test]
    fn u_diagonal_recursion() {
        let c = ctx(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cf = CFormMatrix::random(&c, 8, &mut rng);
        let u = build_u(&cf);
        for i in 0..7 {
            let step = c.q_hat_pow(i as u64 + 1).sub(&c.q_hat_pow(i as u64)).unwrap();
            assert!(!step.is_unit());
            let want = u.entry(i, i).add(&step.mul(u.entry(i, i + 1)).unwrap()).unwrap();
            assert_eq!(u.entry(i + 1, i + 1), &want);
        }
    }

    #[test]
    fn conjugation_holds_for_r_itself() {
        let c = ctx(3, 2);
        let cf = CFormMatrix::new(&c, 7, |_, _| c.zero());
        let rep = verify_conjugation(&cf);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn conjugation_random() {
        for (p, q, w, trials) in [(3, 2, 10, 20), (5, 2, 8, 10), (7, 3, 8, 10)] {
            let c = ctx(p, q);
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            for _ in 0..trials {
                let rep = verify_conjugation(&CFormMatrix::random(&c, w, &mut rng));
                assert!(rep.passed(), "p={p}: {rep:?}");
                assert_eq!(rep.worst_valuation, None);
            }
        }
    }

    #[test]
    fn end_to_end_normal_form() {
        let c = ctx(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let r = build_basic(&c, BasicMatrix::R, 9);
        for _ in 0..10 {
            let a = AFormMatrix::random(&c, 9, &mut rng);
            let b = normalizing_matrix(&a).unwrap();
            let conj = b.mul(a.window()).unwrap().mul(&b.inverse().unwrap()).unwrap();
            assert_eq!(conj, r);
        }
    }

    #[test]
    fn perturbed_u_is_detected() {
        let c = ctx(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cf = CFormMatrix::random(&c, 6, &mut rng);
        let u = build_u(&cf);
        let bad = UTWindow::from_fn(&c, 6, |i, j| {
            if (i, j) == (2, 4) {
                u.entry(i, j).add(&c.int(9)).unwrap()
            } else {
                u.entry(i, j).clone()
            }
        });
        let r = build_basic(&c, BasicMatrix::R, 6);
        let d = bad
            .mul(cf.window())
            .unwrap()
            .differences(&r.mul(&bad).unwrap())
            .unwrap();
        assert!(!d.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn normal_form_for_any_seed(seed in any::<u64>(), which in 0usize..3, w in 2usize..=9) {
            let (p, q) = [(3, 2), (5, 2), (7, 3)][which];
            let c = ctx(p, q);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = AFormMatrix::random(&c, w, &mut rng);
            let cf = normalize_superdiag(&a).unwrap();
            for i in 0..w {
                prop_assert_eq!(cf.window().get(i, i), c.q_hat_pow(i as u64));
                if i + 1 < w {
                    prop_assert!(cf.window().get(i, i + 1).is_one());
                }
            }
            let rep = verify_conjugation(&cf);
            prop_assert!(rep.passed() && rep.u_in_u_infty);
            let b = normalizing_matrix(&a).unwrap();
            let conj = b.mul(a.window()).unwrap().mul(&b.inverse().unwrap()).unwrap();
            prop_assert_eq!(conj, build_basic(&c, BasicMatrix::R, w));
        }
    }
}
