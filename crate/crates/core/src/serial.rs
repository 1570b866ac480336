//! Canonical JSON for the value types.
//!
//! Residues and units are decimal strings so that values wider than 64 bits
//! survive any JSON reader. Output is deterministic: keys appear in a fixed
//! order, polynomial terms are sorted by `(a, b)`, and `prec` is written only
//! when it falls short of `N`. Parsers accept exactly what the emitters
//! produce, checked against a caller-supplied context.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::basis::BivarPoly;
use crate::error::{Error, Result};
use crate::padic::{Ctx, PadicInt, PadicScaled};
use crate::qcalc::QPoly;
use crate::utmat::UTWindow;

/// Largest window accepted by [`parse_window`].
pub const MAX_PARSED_WINDOW: usize = 512;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntRepr {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    residue: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaledRepr {
    val: Option<i64>,
    unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prec: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowRepr {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "W")]
    w: usize,
    rows: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    a: u32,
    b: u32,
    val: i64,
    unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prec: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    weight: Option<u32>,
    terms: Vec<TermRepr>,
}

fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("plain data serializes")
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Strict decimal: digits only, no sign, no leading zeros.
fn parse_decimal(s: &str) -> Result<BigUint> {
    let ok = !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if !ok {
        return Err(Error::Parse(format!("{s:?} is not a canonical decimal")));
    }
    s.parse::<BigUint>().map_err(|e| Error::Parse(e.to_string()))
}

fn check_header(ctx: &Ctx, p: u64, n: u32) -> Result<()> {
    if p != ctx.p() || n != ctx.precision() {
        return Err(Error::ContextMismatch {
            left: ctx.describe(),
            right: format!("(p={p}, N={n})"),
        });
    }
    Ok(())
}

fn residue(ctx: &Ctx, s: &str) -> Result<PadicInt> {
    ctx.from_residue(parse_decimal(s)?)
        .map_err(|_| Error::Parse(format!("residue {s} is not below p^N")))
}

pub fn emit_padic_int(x: &PadicInt) -> String {
    to_json(&IntRepr {
        p: x.ctx().p(),
        n: x.ctx().precision(),
        residue: x.residue().to_string(),
    })
}

pub fn parse_padic_int(ctx: &Ctx, text: &str) -> Result<PadicInt> {
    let r: IntRepr = from_json(text)?;
    check_header(ctx, r.p, r.n)?;
    residue(ctx, &r.residue)
}

fn scaled_parts(x: &PadicScaled) -> (Option<i64>, String, Option<u32>) {
    let prec = (!x.is_zero() && x.prec() < x.ctx().precision()).then_some(x.prec());
    (x.valuation(), x.unit().residue().to_string(), prec)
}

fn scaled_from_parts(ctx: &Ctx, val: i64, unit: &str, prec: Option<u32>) -> Result<PadicScaled> {
    // An explicit prec is only written below N.
    if let Some(k) = prec.filter(|&k| k == 0 || k >= ctx.precision()) {
        return Err(Error::Parse(format!("prec {k} outside 1..N")));
    }
    let prec = prec.unwrap_or(ctx.precision());
    let u = residue(ctx, unit)?;
    if u.residue() >= ctx.p_pow(prec) {
        return Err(Error::Parse(format!("unit {unit} not reduced modulo p^{prec}")));
    }
    PadicScaled::from_parts(val, u, prec).map_err(|e| Error::Parse(e.to_string()))
}

pub fn emit_scaled(x: &PadicScaled) -> String {
    let (val, unit, prec) = scaled_parts(x);
    to_json(&ScaledRepr { val, unit, prec })
}

pub fn parse_scaled(ctx: &Ctx, text: &str) -> Result<PadicScaled> {
    let r: ScaledRepr = from_json(text)?;
    match r.val {
        None if r.unit == "0" && r.prec.is_none() => Ok(PadicScaled::zero(ctx)),
        None => Err(Error::Parse("zero must be written with unit \"0\"".into())),
        Some(v) => scaled_from_parts(ctx, v, &r.unit, r.prec),
    }
}

pub fn emit_qpoly(x: &QPoly) -> String {
    to_json(x)
}

pub fn parse_qpoly(text: &str) -> Result<QPoly> {
    let coeffs: Vec<i64> = from_json(text)?;
    if coeffs.last() == Some(&0) {
        return Err(Error::Parse("trailing zero coefficient".into()));
    }
    Ok(QPoly::new(coeffs))
}

/// Full square rows, zeros below the diagonal included.
pub fn emit_window(x: &UTWindow) -> String {
    let w = x.size();
    let rows = (0..w)
        .map(|i| (0..w).map(|j| x.get(i, j).residue().to_string()).collect())
        .collect();
    to_json(&WindowRepr {
        p: x.ctx().p(),
        n: x.ctx().precision(),
        w,
        rows,
    })
}

pub fn parse_window(ctx: &Ctx, text: &str) -> Result<UTWindow> {
    let r: WindowRepr = from_json(text)?;
    check_header(ctx, r.p, r.n)?;
    if r.w > MAX_PARSED_WINDOW {
        return Err(Error::Parse(format!("W = {} exceeds {MAX_PARSED_WINDOW}", r.w)));
    }
    if r.rows.len() != r.w || r.rows.iter().any(|row| row.len() != r.w) {
        return Err(Error::Parse(format!("rows do not form a {0}x{0} square", r.w)));
    }
    let mut cells = Vec::with_capacity(r.w * r.w);
    for (i, row) in r.rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            let x = residue(ctx, s)?;
            if j < i && !x.is_zero() {
                return Err(Error::Parse(format!(
                    "entry ({i},{j}) below the diagonal is nonzero"
                )));
            }
            cells.push(x);
        }
    }
    Ok(UTWindow::from_fn(ctx, r.w, |i, j| cells[i * r.w + j].clone()))
}

pub fn emit_bivar(f: &BivarPoly) -> String {
    let terms = f
        .terms()
        .map(|(&(a, b), c)| {
            let (val, unit, prec) = scaled_parts(c);
            TermRepr {
                a,
                b,
                val: val.expect("stored coefficients are nonzero"),
                unit,
                prec,
            }
        })
        .collect();
    to_json(&PolyRepr {
        weight: f.weight(),
        terms,
    })
}

pub fn parse_bivar(ctx: &Ctx, text: &str) -> Result<BivarPoly> {
    let r: PolyRepr = from_json(text)?;
    let mut prev: Option<(u32, u32)> = None;
    let mut terms = Vec::with_capacity(r.terms.len());
    for t in &r.terms {
        if prev.is_some_and(|k| k >= (t.a, t.b)) {
            return Err(Error::Parse("terms must be strictly sorted by (a, b)".into()));
        }
        t.a.checked_add(t.b)
            .ok_or_else(|| Error::Parse("exponent overflow".into()))?;
        prev = Some((t.a, t.b));
        terms.push(((t.a, t.b), scaled_from_parts(ctx, t.val, &t.unit, t.prec)?));
    }
    let f = BivarPoly::from_terms(ctx, terms)?;
    if f.weight() != r.weight {
        return Err(Error::Parse(format!(
            "declared weight {:?} but terms give {:?}",
            r.weight,
            f.weight()
        )));
    }
    Ok(f)
}
