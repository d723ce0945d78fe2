//! Command-line front end. Every verb renders its whole output to a string
//! first, so identical inputs give byte-identical files.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::algebra::SquareMatrix;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::jordan::{evolution_matrix, evolution_matrix_bra, hamiltonian_matrix, Normalization};
use crate::smatrix::{expansion_coeffs, lineshape, pole_term};
use crate::states::{dyad, evolve_operator, evolve_operator_exact, pole_term_probability, w_n, w_total, StateOperator};
use crate::uniqueness::certify;

#[derive(Debug, Parser)]
#[command(name = "gamow", version, about = "Higher-order Gamow states: decay curves, lineshapes, pole terms and exponential-law certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norms of W(n), W and diagonal dyads against the pure exponential.
    DecayCurve(Common),
    /// Energy profiles |E − z_R|^(−2(n+1)) for n < r, peak normalised to 1.
    Lineshape(Common),
    /// Exact certificate for the exponentially decaying family at size j.
    Uniqueness {
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Pole term, expansion coefficients and the decay probability table.
    PoleTerm(Common),
    /// The Jordan-block Hamiltonian and the evolution at one time.
    JordanInfo {
        /// Sample time (overrides `t_sample` in the config).
        #[arg(long)]
        t: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Debug, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// derivative | factorial (overrides the config).
    #[arg(long)]
    pub normalization: Option<Normalization>,
    /// Use exact rational arithmetic where the verb supports it.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Rendered output of one verb.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub body: String,
    /// False when a certificate check failed.
    pub passed: bool,
    pub out: Option<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

/// Parses, runs, writes the output and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli).and_then(|report| emit(&report).map(|_| report)) {
        Ok(report) if report.passed => EXIT_OK,
        Ok(_) => EXIT_CERTIFICATION,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(report: &Report) -> Result<()> {
    match &report.out {
        Some(path) => std::fs::write(path, &report.body)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(report.body.as_bytes())?;
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::DecayCurve(c) => with_config(c, Format::Csv, cmd_decay_curve),
        Command::Lineshape(c) => with_config(c, Format::Csv, cmd_lineshape),
        Command::PoleTerm(c) => with_config(c, Format::Json, cmd_pole_term),
        Command::JordanInfo { t, common } => with_config(common, Format::Csv, |cfg, f, exact| {
            let mut cfg = cfg.clone();
            if let Some(t) = t {
                cfg.t_sample = *t;
            }
            cmd_jordan_info(&cfg, f, exact)
        }),
        Command::Uniqueness { j, common } => {
            let format = common.format.unwrap_or(Format::Text);
            let (body, passed) = cmd_uniqueness(*j, format)?;
            Ok(Report { body, passed, out: common.out.clone() })
        }
    }
}

fn with_config(
    common: &Common,
    default: Format,
    f: impl FnOnce(&RunConfig, Format, bool) -> Result<String>,
) -> Result<Report> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("--config is required".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(n) = common.normalization {
        cfg.normalization = n;
    }
    let format = match (common.format, cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some(name)) => Format::from_str(name, true)
            .map_err(|_| Error::ConfigInvalid(format!("unknown format {name:?}")))?,
        (None, None) => default,
    };
    let body = f(&cfg, format, common.exact)?;
    Ok(Report {
        body,
        passed: true,
        out: common.out.clone().or_else(|| cfg.output.clone()),
    })
}

/// Fixed 17-significant-digit rendering.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.16e}", x)
    }
}

/// A float serialised with [`fmt_num`]; non-finite values become `null`.
#[derive(Clone, Copy, Debug)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(fmt_num(self.0)).expect("valid number").serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

#[derive(Serialize)]
struct ComplexOut {
    re: Num,
    im: Num,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        Self { re: Num(z.re), im: Num(z.im) }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn format_not_supported(verb: &str, f: Format) -> Error {
    let name = f.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    Error::ConfigInvalid(format!("{verb} does not support --format {name}"))
}

#[derive(Serialize)]
struct DecayPoint {
    t: Num,
    norm: Num,
    exponential: Num,
    deviation: Num,
}

#[derive(Serialize)]
struct DecayCurve {
    operator: String,
    points: Vec<DecayPoint>,
}

#[derive(Serialize)]
struct DecayOut {
    width: Num,
    order: usize,
    normalization: String,
    curves: Vec<DecayCurve>,
}

/// Curves for `W⁽ⁿ⁾` (`n < r`), `W` and the dyads `|k⟩⟨k|`, `1 <= k < r`.
/// `deviation` is `‖e^{Γt}W(t) − W‖/‖W‖`, zero for a pure exponential.
pub fn cmd_decay_curve(cfg: &RunConfig, format: Format, exact: bool) -> Result<String> {
    let times = cfg.time_points()?;
    let space = cfg.space()?;
    let r = space.dim();
    let mut ops: Vec<(String, StateOperator)> = Vec::new();
    for n in 0..r {
        ops.push((format!("W{n}"), w_n(&space, n)?));
    }
    ops.push(("W".into(), w_total(&space)));
    for k in 1..r {
        ops.push((format!("dyad{k}{k}"), dyad(&space, k, k)?));
    }

    let mut curves = Vec::new();
    for (name, w) in &ops {
        let norm0 = w.norm();
        let points = times
            .iter()
            .map(|&t| {
                let e = if exact { evolve_operator_exact(w, t)? } else { evolve_operator(w, t)? };
                Ok(DecayPoint {
                    t: Num(t),
                    norm: Num(e.norm()),
                    exponential: Num(e.envelope * norm0),
                    deviation: Num(e.envelope_deviation(w)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        curves.push(DecayCurve { operator: name.clone(), points });
    }

    match format {
        Format::Json => Ok(to_json(&DecayOut {
            width: Num(cfg.width),
            order: r,
            normalization: space.normalization.to_string(),
            curves,
        })),
        Format::Csv => {
            let mut s = String::from("operator,t,norm,exponential,deviation\n");
            for c in &curves {
                for p in &c.points {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        c.operator,
                        fmt_num(p.t.0),
                        fmt_num(p.norm.0),
                        fmt_num(p.exponential.0),
                        fmt_num(p.deviation.0)
                    );
                }
            }
            Ok(s)
        }
        f => Err(format_not_supported("decay-curve", f)),
    }
}

#[derive(Serialize)]
struct LineshapeOut {
    energy: Vec<Num>,
    intensity: Vec<Vec<Num>>,
}

pub fn cmd_lineshape(cfg: &RunConfig, format: Format, _exact: bool) -> Result<String> {
    let grid = cfg.energy_points()?;
    let model = cfg.model()?;
    let r = model.order();
    let columns = (0..r).map(|n| lineshape(&model, n, &grid)).collect::<Result<Vec<_>>>()?;
    match format {
        Format::Json => Ok(to_json(&LineshapeOut {
            energy: grid.iter().map(|&e| Num(e)).collect(),
            intensity: columns.iter().map(|c| c.iter().map(|&v| Num(v)).collect()).collect(),
        })),
        Format::Csv => {
            let mut s = String::from("energy");
            for n in 0..r {
                let _ = write!(s, ",intensity_{n}");
            }
            s.push('\n');
            for (i, &e) in grid.iter().enumerate() {
                s.push_str(&fmt_num(e));
                for c in &columns {
                    s.push(',');
                    s.push_str(&fmt_num(c[i]));
                }
                s.push('\n');
            }
            Ok(s)
        }
        f => Err(format_not_supported("lineshape", f)),
    }
}

pub fn cmd_uniqueness(j: usize, format: Format) -> Result<(String, bool)> {
    let cert = certify(j)?;
    let body = match format {
        Format::Json => {
            let mut s = cert.to_json();
            s.push('\n');
            s
        }
        Format::Text => cert.to_text(),
        f => return Err(format_not_supported("uniqueness", f)),
    };
    Ok((body, cert.passed))
}

#[derive(Serialize)]
struct ProbabilityRow {
    t: Num,
    probability: Num,
    ratio: Num,
    exponential: Num,
}

#[derive(Serialize)]
struct PoleTermOut {
    order: usize,
    width: Num,
    pole_term: ComplexOut,
    expansion_coeffs: Vec<ComplexOut>,
    probability: Vec<ProbabilityRow>,
}

pub fn cmd_pole_term(cfg: &RunConfig, format: Format, _exact: bool) -> Result<String> {
    let model = cfg.model()?;
    let times = cfg.time_points()?;
    let pair = cfg.pair();
    let value = pole_term(&pair, &model)?;
    let coeffs = expansion_coeffs(&pair.phi, &model)?;
    let p0 = value.norm_sqr();
    let rows = times
        .iter()
        .map(|&t| {
            let p = if t == 0.0 { p0 } else { pole_term_probability(&pair, &model, t)? };
            Ok(ProbabilityRow {
                t: Num(t),
                probability: Num(p),
                ratio: Num(if p0 > 0.0 { p / p0 } else { f64::NAN }),
                exponential: Num((-cfg.width * t).exp()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    match format {
        Format::Json => Ok(to_json(&PoleTermOut {
            order: model.order(),
            width: Num(cfg.width),
            pole_term: value.into(),
            expansion_coeffs: coeffs.into_iter().map(Into::into).collect(),
            probability: rows,
        })),
        Format::Csv => {
            let mut s = String::from("t,probability,ratio,exponential\n");
            for row in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt_num(row.t.0),
                    fmt_num(row.probability.0),
                    fmt_num(row.ratio.0),
                    fmt_num(row.exponential.0)
                );
            }
            Ok(s)
        }
        f => Err(format_not_supported("pole-term", f)),
    }
}

#[derive(Serialize)]
struct JordanOut {
    order: usize,
    normalization: String,
    z_r: ComplexOut,
    t: Num,
    hamiltonian: Vec<Vec<ComplexOut>>,
    evolution: Vec<Vec<ComplexOut>>,
    evolution_bra: Vec<Vec<ComplexOut>>,
}

fn rows_out(m: &SquareMatrix<Complex64>) -> Vec<Vec<ComplexOut>> {
    m.rows().map(|row| row.iter().map(|&z| z.into()).collect()).collect()
}

pub fn cmd_jordan_info(cfg: &RunConfig, format: Format, _exact: bool) -> Result<String> {
    let space = cfg.space()?;
    let t = cfg.t_sample;
    let h = hamiltonian_matrix(&space).matrix;
    let ket = evolution_matrix(&space, t)?.matrix;
    let bra = evolution_matrix_bra(&space, t)?.matrix;
    match format {
        Format::Json => Ok(to_json(&JordanOut {
            order: space.dim(),
            normalization: space.normalization.to_string(),
            z_r: space.z_r().into(),
            t: Num(t),
            hamiltonian: rows_out(&h),
            evolution: rows_out(&ket),
            evolution_bra: rows_out(&bra),
        })),
        Format::Csv => {
            let mut s = String::from("matrix,row,col,re,im\n");
            for (name, m) in [("hamiltonian", &h), ("evolution", &ket), ("evolution_bra", &bra)] {
                for ((i, j), z) in m.entries() {
                    let _ = writeln!(s, "{name},{i},{j},{},{}", fmt_num(z.re), fmt_num(z.im));
                }
            }
            Ok(s)
        }
        f => Err(format_not_supported("jordan-info", f)),
    }
}
