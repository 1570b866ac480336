//! Leading `W x W` windows of infinite upper-triangular matrices over `Z_p`.
//!
//! For upper-triangular `A` and `B`, `(AB)[i][j] = sum_{i<=k<=j} A[i][k] B[k][j]`
//! only touches indices `<= j`, so products, sums and inverses computed on a
//! window agree exactly with the window of the infinite result. Indices are
//! 0-based throughout.

use crate::error::{Error, Result};
use crate::padic::{Ctx, PadicInt};

/// Upper triangle stored row by row: row `i` holds columns `i..W`.
#[derive(Clone, PartialEq, Eq)]
pub struct UTWindow {
    ctx: Ctx,
    size: usize,
    entries: Vec<PadicInt>,
}

/// Group-membership flags for a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    /// Every diagonal entry is a p-adic unit.
    pub is_invertible: bool,
    /// Every diagonal entry lies in `1 + pZ_p`.
    pub is_in_u_infty: bool,
}

#[inline]
fn offset(size: usize, i: usize) -> usize {
    // sum_{r < i} (size - r)
    i * size - i * i.saturating_sub(1) / 2
}

impl UTWindow {
    /// Materializes a window; `gen` is only called with `i <= j`.
    pub fn from_fn(ctx: &Ctx, size: usize, mut gen: impl FnMut(usize, usize) -> PadicInt) -> UTWindow {
        let mut entries = Vec::with_capacity(size * (size + 1) / 2);
        for i in 0..size {
            for j in i..size {
                entries.push(gen(i, j));
            }
        }
        UTWindow {
            ctx: ctx.clone(),
            size,
            entries,
        }
    }

    pub fn zero(ctx: &Ctx, size: usize) -> UTWindow {
        Self::from_fn(ctx, size, |_, _| ctx.zero())
    }

    pub fn identity(ctx: &Ctx, size: usize) -> UTWindow {
        Self::from_fn(ctx, size, |i, j| if i == j { ctx.one() } else { ctx.zero() })
    }

    pub fn diagonal(ctx: &Ctx, diag: &[PadicInt]) -> UTWindow {
        Self::from_fn(
            ctx,
            diag.len(),
            |i, j| {
                if i == j {
                    diag[i].clone()
                } else {
                    ctx.zero()
                }
            },
        )
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// The window size `W`.
    pub fn size(&self) -> usize {
        self.size
    }

    fn index(&self, i: usize, j: usize) -> usize {
        offset(self.size, i) + (j - i)
    }

    /// Entry `(i, j)`; zero below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> PadicInt {
        assert!(
            i < self.size && j < self.size,
            "({i}, {j}) outside a {} window",
            self.size
        );
        if i > j {
            self.ctx.zero()
        } else {
            self.entries[self.index(i, j)].clone()
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &PadicInt {
        assert!(
            i <= j && j < self.size,
            "({i}, {j}) is not an upper entry of a {} window",
            self.size
        );
        &self.entries[self.index(i, j)]
    }

    /// Row `i` from the diagonal onwards.
    pub fn upper_row(&self, i: usize) -> &[PadicInt] {
        let start = offset(self.size, i);
        &self.entries[start..start + (self.size - i)]
    }

    fn check(&self, other: &UTWindow) -> Result<()> {
        if !self.ctx.same(&other.ctx) {
            return Err(Error::ContextMismatch {
                left: self.ctx.describe(),
                right: other.ctx.describe(),
            });
        }
        if self.size != other.size {
            return Err(Error::SizeMismatch(self.size, other.size));
        }
        Ok(())
    }

    pub fn mul(&self, other: &UTWindow) -> Result<UTWindow> {
        self.check(other)?;
        Ok(UTWindow::from_fn(&self.ctx, self.size, |i, j| {
            (i..=j).fold(self.ctx.zero(), |acc, k| {
                acc.add_unchecked(&self.entry(i, k).mul_unchecked(other.entry(k, j)))
            })
        }))
    }

    pub fn add(&self, other: &UTWindow) -> Result<UTWindow> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a.add_unchecked(b)))
    }

    pub fn sub(&self, other: &UTWindow) -> Result<UTWindow> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a.sub_unchecked(b)))
    }

    fn zip(&self, other: &UTWindow, f: impl Fn(&PadicInt, &PadicInt) -> PadicInt) -> UTWindow {
        UTWindow {
            ctx: self.ctx.clone(),
            size: self.size,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &PadicInt) -> Result<UTWindow> {
        if !self.ctx.same(c.ctx()) {
            return Err(Error::ContextMismatch {
                left: self.ctx.describe(),
                right: c.ctx().describe(),
            });
        }
        Ok(UTWindow {
            ctx: self.ctx.clone(),
            size: self.size,
            entries: self.entries.iter().map(|a| a.mul_unchecked(c)).collect(),
        })
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> UTWindow {
        let mut base = self.clone();
        let mut acc = UTWindow::identity(&self.ctx, self.size);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).expect("same window");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same window");
            }
        }
        acc
    }

    /// Inverse by back-substitution, column by column.
    pub fn inverse(&self) -> Result<UTWindow> {
        let n = self.size;
        let mut diag_inv = Vec::with_capacity(n);
        for i in 0..n {
            match self.entry(i, i).inv_unit() {
                Ok(x) => diag_inv.push(x),
                Err(_) => return Err(Error::NotInvertible { index: i }),
            }
        }
        // Solve A X = I for each column j, bottom row first.
        let mut cols: Vec<Vec<PadicInt>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut x = vec![self.ctx.zero(); j + 1];
            x[j] = diag_inv[j].clone();
            for i in (0..j).rev() {
                let s = (i + 1..=j).fold(self.ctx.zero(), |acc, k| {
                    acc.add_unchecked(&self.entry(i, k).mul_unchecked(&x[k]))
                });
                x[i] = s.neg().mul_unchecked(&diag_inv[i]);
            }
            cols.push(x);
        }
        Ok(UTWindow::from_fn(&self.ctx, n, |i, j| cols[j][i].clone()))
    }

    pub fn membership(&self) -> Membership {
        let diag = (0..self.size).map(|i| self.entry(i, i));
        let mut m = Membership {
            is_invertible: true,
            is_in_u_infty: true,
        };
        for d in diag {
            m.is_invertible &= d.is_unit();
            m.is_in_u_infty &= d.is_one_mod_p();
        }
        m
    }

    /// Number of leading columns that vanish entirely (at most `W`).
    pub fn filtration_level(&self) -> usize {
        (0..self.size)
            .find(|&j| (0..=j).any(|i| !self.entry(i, j).is_zero()))
            .unwrap_or(self.size)
    }

    /// Column `j` from row 0 down to the diagonal.
    pub fn column(&self, j: usize) -> Vec<PadicInt> {
        (0..=j).map(|i| self.entry(i, j).clone()).collect()
    }

    /// Leading `w x w` sub-window.
    pub fn sub_window(&self, w: usize) -> UTWindow {
        assert!(w <= self.size);
        UTWindow::from_fn(&self.ctx, w, |i, j| self.entry(i, j).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(PadicInt::is_zero)
    }

    /// Positions where two windows differ, in row-major order.
    pub fn differences(&self, other: &UTWindow) -> Result<Vec<(usize, usize)>> {
        self.check(other)?;
        let mut out = vec![];
        for i in 0..self.size {
            for j in i..self.size {
                if self.entry(i, j) != other.entry(i, j) {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }
}

impl std::fmt::Debug for UTWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "UTWindow {} over {}", self.size, self.ctx.describe())?;
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
