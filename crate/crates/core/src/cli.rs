//! The `utt` command line: configure `(p, q, N, W)`, print matrices, Gaussian
//! polynomials and basis elements, and run verification suites.
//!
//! Exit codes: 0 when everything requested passed, 1 when a check failed,
//! 2 for configuration or usage errors.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::basis::{self, big_f, c_poly, f_poly, g_poly, BivarPoly, FIndex, FMode};
use crate::error::{Error, Result};
use crate::ops::{build_basic, build_rn, build_xn, BasicMatrix};
use crate::padic::{is_prime, make_context, order_mod_p2, smallest_primitive_root_mod_p2, Ctx};
use crate::qcalc::{qbinom, QPoly, MAX_QBINOM_N};
use crate::serial::{emit_bivar, emit_qpoly, emit_window};
use crate::utmat::UTWindow;
use crate::verify::{run_suite, summarize, CheckResult, Suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const MAX_WINDOW: usize = 512;
const MAX_MATRIX_INDEX: u64 = 4096;

#[derive(Parser, Debug)]
#[command(
    name = "utt",
    version,
    about = "Exact p-adic operation matrices, q-binomials and integral basis checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Odd prime p.
    #[arg(long, global = true, env = "UTT_DEFAULT_PRIME")]
    pub p: Option<u64>,
    /// Generator of (Z/p^2)^x; defaults to 2, or the least generator if 2 is not one.
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// Work modulo p^N.
    #[arg(long = "N", global = true, default_value_t = 20)]
    pub precision: u32,
    /// Window size.
    #[arg(long = "W", global = true, default_value_t = 12)]
    pub window: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 8)]
    pub kmax: u64,
    #[arg(long, global = true, default_value_t = 8)]
    pub nmax: u64,
    #[arg(long, global = true, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    #[value(name = "D")]
    D,
    #[value(name = "S")]
    S,
    #[value(name = "R")]
    R,
    #[value(name = "Rn")]
    Rn,
    #[value(name = "Xn")]
    Xn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisKind {
    /// c_k
    #[value(name = "c")]
    C,
    /// f_k
    #[value(name = "f")]
    F,
    /// F_{i,j,k}
    #[value(name = "F")]
    BigF,
    /// g_{m,l}
    #[value(name = "g")]
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    QbinomMatrix,
    Rpower,
    Xn,
    Alpha,
    Conjugation,
    Integrality,
    Action,
    Alglem,
    LowerG,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print D, S, R, R_n or X_n on the window.
    Matrix {
        #[arg(value_enum, ignore_case = true)]
        kind: MatrixKind,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Print the Gaussian polynomial [n, k]_q.
    Qbinom {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: i64,
    },
    /// Print c_k, f_k, F_{i,j,k} or g_{m,l}.
    Basis {
        #[arg(value_enum)]
        kind: BasisKind,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        i: Option<u32>,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        l: Option<u64>,
        /// Skip the admissibility constraints on F_{i,j,k}.
        #[arg(long)]
        raw: bool,
    },
    /// Run one verification suite, or all of them.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
    /// Same as `verify all`.
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        let one = match self {
            SuiteArg::QbinomMatrix => Suite::QbinomMatrix,
            SuiteArg::Rpower => Suite::Rpower,
            SuiteArg::Xn => Suite::Xn,
            SuiteArg::Alpha => Suite::Alpha,
            SuiteArg::Conjugation => Suite::Conjugation,
            SuiteArg::Integrality => Suite::Integrality,
            SuiteArg::Action => Suite::Action,
            SuiteArg::Alglem => Suite::Alglem,
            SuiteArg::LowerG => Suite::LowerG,
            SuiteArg::All => return Suite::ALL.to_vec(),
        };
        vec![one]
    }
}

/// Default `q` for a given `p`: 2 when it generates `(Z/p^2)^x`, else the
/// least generator.
pub fn default_q(p: u64) -> u64 {
    if p < 3 || !is_prime(p) || p >= 1 << 31 || order_mod_p2(2, p) == p * (p - 1) {
        return 2;
    }
    smallest_primitive_root_mod_p2(p).unwrap_or(2)
}

impl GlobalOpts {
    pub fn context(&self) -> Result<Ctx> {
        let p = self.p.unwrap_or(3);
        let q = self.q.unwrap_or_else(|| default_q(p));
        make_context(p, q, self.precision)
    }

    fn suite_config(&self, ctx: Ctx) -> SuiteConfig {
        SuiteConfig {
            ctx,
            window: self.window,
            nmax: self.nmax,
            kmax: self.kmax,
            trials: self.trials,
            seed: self.seed,
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_CONFIG };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Io(_) => EXIT_FAILED,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let ctx = cli.opts.context()?;
    let format = cli.opts.format;
    match &cli.command {
        Command::Matrix { kind, n } => {
            let w = cli.opts.window;
            if w > MAX_WINDOW || n.is_some_and(|n| n > MAX_MATRIX_INDEX) {
                return Err(Error::BadIndex(format!(
                    "W must not exceed {MAX_WINDOW} and n must not exceed {MAX_MATRIX_INDEX}"
                )));
            }
            let need_n = || n.ok_or_else(|| Error::BadIndex("--n is required".into()));
            let m = match kind {
                MatrixKind::D => build_basic(&ctx, BasicMatrix::D, w),
                MatrixKind::S => build_basic(&ctx, BasicMatrix::S, w),
                MatrixKind::R => build_basic(&ctx, BasicMatrix::R, w),
                MatrixKind::Rn => build_rn(&ctx, need_n()?, w)?,
                MatrixKind::Xn => build_xn(&ctx, need_n()?, w),
            };
            write_text(out, &render_window(&m, format))?;
        }
        Command::Qbinom { n, k } => {
            if *n > MAX_QBINOM_N {
                return Err(Error::BadIndex(format!("n must not exceed {MAX_QBINOM_N}")));
            }
            write_text(out, &render_qpoly(&qbinom(*n, *k), format))?;
        }
        Command::Basis {
            kind,
            k,
            i,
            j,
            m,
            l,
            raw,
        } => {
            let need = |x: Option<u64>, name: &str| {
                x.ok_or_else(|| Error::BadIndex(format!("--{name} is required")))
            };
            let f = match kind {
                BasisKind::C | BasisKind::F => {
                    let k = need(*k, "k")?;
                    basis::check_precision(&ctx, k)?;
                    if *kind == BasisKind::C {
                        c_poly(&ctx, k)?
                    } else {
                        f_poly(&ctx, k)?
                    }
                }
                BasisKind::BigF => {
                    let k = need(*k, "k")?;
                    basis::check_precision(&ctx, k)?;
                    let idx = FIndex {
                        i: i.unwrap_or(0),
                        j: j.unwrap_or(0),
                        k: k as u32,
                    };
                    big_f(&ctx, idx, if *raw { FMode::Raw } else { FMode::Basis })?
                }
                BasisKind::G => {
                    let (m, l) = (need(*m, "m")?, need(*l, "l")?);
                    basis::check_precision(&ctx, l)?;
                    g_poly(&ctx, m, l)?
                }
            };
            write_text(out, &render_bivar(&f, format))?;
        }
        Command::Verify { suite } => return run_verify(&cli.opts, ctx, &suite.suites(), out),
        Command::All => return run_verify(&cli.opts, ctx, &Suite::ALL, out),
    }
    Ok(EXIT_OK)
}

fn run_verify(opts: &GlobalOpts, ctx: Ctx, suites: &[Suite], out: &mut dyn Write) -> Result<i32> {
    let cfg = opts.suite_config(ctx);
    cfg.validate(suites)?;
    if opts.format == Format::Csv {
        write_text(out, "suite,anchor,check,passed,params,detail\n")?;
    }
    let mut all = vec![];
    for &suite in suites {
        let results = run_suite(suite, &cfg)?;
        let mut chunk = String::new();
        for r in &results {
            chunk.push_str(&render_check(r, opts.format));
        }
        write_text(out, &chunk)?;
        out.flush().map_err(io_error)?;
        all.extend(results);
    }
    let summary = summarize(&all);
    let last = match opts.format {
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "summary": summary,
                "config": {
                    "p": cfg.ctx.p(),
                    "q": cfg.ctx.q(),
                    "N": cfg.ctx.precision(),
                    "W": cfg.window,
                    "seed": cfg.seed,
                    "kmax": cfg.kmax,
                    "nmax": cfg.nmax,
                    "trials": cfg.trials,
                },
            })
        ),
        Format::Csv => String::new(),
        Format::Pretty => format!(
            "{} checks, {} failed\nanchors: {}\n",
            summary.checks,
            summary.failed,
            summary.anchors.join(", ")
        ),
    };
    write_text(out, &last)?;
    Ok(if summary.failed == 0 { EXIT_OK } else { EXIT_FAILED })
}

fn io_error(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_text(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes()).map_err(io_error)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_check(r: &CheckResult, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(r).expect("plain data")),
        Format::Csv => format!(
            "{},{},{},{},{},{}\n",
            r.suite.name(),
            csv_field(r.anchor.label()),
            csv_field(&r.check),
            r.passed,
            csv_field(&r.params.to_string()),
            csv_field(r.detail.as_deref().unwrap_or(""))
        ),
        Format::Pretty => format!(
            "{} [{}] {}: {} {}{}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.anchor.label(),
            r.suite.name(),
            r.check,
            r.params,
            r.detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default()
        ),
    }
}

pub fn render_window(m: &UTWindow, format: Format) -> String {
    let w = m.size();
    match format {
        Format::Json => format!("{}\n", emit_window(m)),
        Format::Csv => {
            let mut s = String::from("i,j,residue\n");
            for i in 0..w {
                for j in i..w {
                    s.push_str(&format!("{i},{j},{}\n", m.get(i, j).residue()));
                }
            }
            s
        }
        Format::Pretty => {
            let cells: Vec<Vec<String>> = (0..w)
                .map(|i| (0..w).map(|j| m.get(i, j).symmetric().to_string()).collect())
                .collect();
            let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
            let mut s = format!("{w}x{w} window mod {}^{}\n", m.ctx().p(), m.ctx().precision());
            for row in cells {
                let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
                s.push_str(line.join(" ").trim_end());
                s.push('\n');
            }
            s
        }
    }
}

pub fn render_qpoly(g: &QPoly, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", emit_qpoly(g)),
        Format::Csv => {
            let mut s = String::from("power,coefficient\n");
            for (k, c) in g.coeffs().iter().enumerate() {
                s.push_str(&format!("{k},{c}\n"));
            }
            s
        }
        Format::Pretty => {
            let terms: Vec<String> = g
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(k, &c)| match (k, c) {
                    (0, c) => c.to_string(),
                    (1, 1) => "q".to_string(),
                    (1, c) => format!("{c}q"),
                    (k, 1) => format!("q^{k}"),
                    (k, c) => format!("{c}q^{k}"),
                })
                .collect();
            if terms.is_empty() {
                "0\n".to_string()
            } else {
                format!("{}\n", terms.join(" + "))
            }
        }
    }
}

pub fn render_bivar(f: &BivarPoly, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", emit_bivar(f)),
        Format::Csv => {
            let mut s = String::from("a,b,val,unit,prec\n");
            for (&(a, b), c) in f.terms() {
                s.push_str(&format!(
                    "{a},{b},{},{},{}\n",
                    c.valuation().expect("nonzero"),
                    c.unit().residue(),
                    c.prec()
                ));
            }
            s
        }
        Format::Pretty => {
            let terms: Vec<String> = f
                .terms()
                .map(|(&(a, b), c)| format!("({c}) u^{a} v^{b}"))
                .collect();
            if terms.is_empty() {
                "0\n".to_string()
            } else {
                format!("{}\n", terms.join(" + "))
            }
        }
    }
}
