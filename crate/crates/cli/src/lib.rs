//! `hammerfix` command-line front end.
//!
//! [`run`] takes the argument vector and two writers so that the whole
//! program can be driven from tests. Exit codes: 0 success, 1 bad input,
//! 2 a check that should hold by construction failed.

mod kernel_file;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use hammerfix_core::gibbs::{analyze, GibbsError, GibbsModel, GibbsReport};
use hammerfix_core::oracle::{cross_check, OracleOptions, OracleReport};
use hammerfix_core::quad::compute_coefficients;
use hammerfix_core::solver::{reconstruct, verify_operator, verify_q, PlanePoint, SolveError, SolveReport, Q_RESIDUAL_TOL};
use hammerfix_core::{KernelSpec, SolveOptions};
use thiserror::Error;

pub use kernel_file::KernelFile;
use report::{to_json, GibbsJson, OracleJson, SolveJson};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Contradiction(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Contradiction(_) => 2,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Contradiction(_) => CliError::Contradiction(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<GibbsError> for CliError {
    fn from(e: GibbsError) -> Self {
        match e {
            GibbsError::Solve(s) => s.into(),
            GibbsError::Contradiction(_) => CliError::Contradiction(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hammerfix", version, about = "Positive fixed points of rank-2 Hammerstein operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count and reconstruct the positive fixed points of a kernel.
    Solve(SolveArgs),
    /// Count translation-invariant Gibbs measures for the kernel a + b·t·u.
    Gibbs(GibbsArgs),
    /// Cross-check a solve with the planar Newton scan and Picard iteration.
    Oracle(OracleArgs),
    /// Recompute the residuals recorded in a JSON solve report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Tolerances {
    #[arg(long, value_name = "X")]
    quad_tol: Option<f64>,
    #[arg(long, value_name = "X")]
    root_tol: Option<f64>,
    #[arg(long, value_name = "X")]
    residual_tol: Option<f64>,
    /// Sample points per reported fixed point.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_name = "FILE")]
    kernel: PathBuf,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    cross_check: bool,
    #[command(flatten)]
    tol: Tolerances,
    #[arg(short = 'o', long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct GibbsArgs {
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    a: Option<f64>,
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    b: Option<f64>,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// `a_lo:a_hi:steps,b_lo:b_hi:steps`, endpoints included.
    #[arg(long, value_name = "SPEC")]
    sweep: Option<Sweep>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_name = "FILE")]
    kernel: PathBuf,
    /// Uniform (and as many log-spaced) Newton starts per axis.
    #[arg(long, value_name = "N", default_value_t = 20)]
    starts: usize,
    #[arg(long, value_name = "N", default_value_t = 3)]
    picard_seeds: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    report: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
struct Axis {
    lo: f64,
    hi: f64,
    steps: usize,
}

impl Axis {
    fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps)
            .map(|j| self.lo + (self.hi - self.lo) * j as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Sweep {
    a: Axis,
    b: Axis,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let axis = |part: &str| -> Result<Axis, String> {
            let f: Vec<&str> = part.split(':').collect();
            let [lo, hi, steps] = f[..] else {
                return Err(format!("expected lo:hi:steps, got `{part}`"));
            };
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| *x > 0.0 && x.is_finite())
                    .ok_or_else(|| format!("`{v}` is not a positive number"))
            };
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(format!("range {lo}:{hi} is reversed"));
            }
            let steps = steps
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| format!("`{steps}` is not a positive step count"))?;
            Ok(Axis { lo, hi, steps })
        };
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| "expected a_lo:a_hi:steps,b_lo:b_hi:steps".to_string())?;
        Ok(Sweep {
            a: axis(a)?,
            b: axis(b)?,
        })
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args, out),
        Command::Gibbs(args) => cmd_gibbs(&args, out),
        Command::Oracle(args) => cmd_oracle(&args, out),
        Command::Verify(args) => cmd_verify(&args, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    }
}

fn load_kernel(path: &Path, tol: &Tolerances) -> Result<(KernelSpec, SolveOptions), CliError> {
    let file = KernelFile::parse(&read_to_string(path)?)?;
    let kernel = KernelSpec::parse(&file.phi1, &file.phi2, &file.psi1, &file.psi2, file.k)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let d = SolveOptions::default();
    let opts = SolveOptions {
        quad_tol: tol.quad_tol.or(file.quad_tol).unwrap_or(d.quad_tol),
        root_tol: tol.root_tol.or(file.root_tol).unwrap_or(d.root_tol),
        residual_tol: tol.residual_tol.or(file.residual_tol).unwrap_or(d.residual_tol),
        grid: tol.grid.or(file.grid).unwrap_or(d.grid),
    };
    Ok((kernel, opts))
}

fn solve_text(kernel: &KernelSpec, r: &SolveReport, oracle: Option<&OracleReport>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "kernel      phi1 = {}, phi2 = {}, psi1 = {}, psi2 = {}, k = {}",
        kernel.phi1.source(),
        kernel.phi2.source(),
        kernel.psi1.source(),
        kernel.psi2.source(),
        kernel.k
    );
    let _ = writeln!(s, "a           {:?}", r.coefficients.a);
    let _ = writeln!(s, "b           {:?}", r.coefficients.b);
    let _ = writeln!(s, "d           {:?}", r.coefficients.d);
    let _ = writeln!(s, "polynomial  {:?} (descending)", r.polynomial.coeffs);
    let _ = writeln!(
        s,
        "bounds      Descartes {}, Cauchy {}",
        r.descartes_bound, r.cauchy_bound
    );
    let _ = writeln!(s, "verdict     {}", r.classification.verdict);
    let _ = writeln!(s, "n_fix       {}", r.n_fix);
    for (i, (f, root)) in r.fixed_points.iter().zip(&r.roots).enumerate() {
        let _ = writeln!(
            s,
            "  [{}] xi = {:.12}  x = {:.12}  y = {:.12}  mult = {}  residual = {:.3e}",
            i + 1,
            root.value,
            f.x0,
            f.y0,
            root.multiplicity,
            f.residual_sup.unwrap_or(f64::NAN)
        );
    }
    if let Some(o) = oracle {
        s.push_str(&oracle_text(o));
    }
    s
}

fn oracle_text(o: &OracleReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "oracle      scan found {} of {} ({} starts, {} dropped, {} excluded), ratio error {:.3e}",
        o.scan.points.len(),
        o.solver_n_fix,
        o.scan.starts,
        o.scan.dropped,
        o.scan.excluded,
        o.max_ratio_error
    );
    for p in &o.picard {
        let mode = if p.projective { "projective" } else { "plain" };
        match (&p.outcome, p.distance_to_solution) {
            (Some(l), Some(d)) => {
                let _ = writeln!(
                    s,
                    "  picard {mode:<10} seed {}: converged in {} steps, distance {d:.3e}",
                    p.seed_value, l.iterations
                );
            }
            _ => {
                let _ = writeln!(s, "  picard {mode:<10} seed {}: no limit", p.seed_value);
            }
        }
    }
    let _ = writeln!(s, "agreement   {}", if o.matches { "yes" } else { "NO" });
    s
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (kernel, opts) = load_kernel(&args.kernel, &args.tol)?;
    let report = hammerfix_core::solve(&kernel, &opts)?;
    let oracle = if args.cross_check {
        Some(cross_check(&report, &OracleOptions::default()).map_err(|e| CliError::Input(e.to_string()))?)
    } else {
        None
    };
    let text = if args.json {
        to_json(&SolveJson::new(&kernel, &report, oracle.as_ref()))
    } else {
        solve_text(&kernel, &report, oracle.as_ref())
    };
    emit(out, args.output.as_deref(), &text)?;
    match oracle {
        Some(o) if !o.matches => Err(CliError::Contradiction(format!(
            "oracle disagrees with the solver: scan found {} fixed points, solver {}",
            o.scan.points.len(),
            o.solver_n_fix
        ))),
        _ => Ok(()),
    }
}

fn gibbs_text(r: &GibbsReport) -> String {
    let m = &r.model;
    let mut s = format!("a = {}, b = {}, k = {}, beta = {}\n", m.a, m.b, m.k, m.beta);
    let _ = writeln!(s, "  d                {:?}", r.d);
    let _ = writeln!(s, "  d nondecreasing  {}", r.d_monotone_nondecreasing);
    let _ = writeln!(s, "  d sign pattern   {}", if r.d_sign_monotone { "- ... - + ... +" } else { "mixed" });
    let _ = writeln!(s, "  min h'           {:.6e}", r.h_derivative_min);
    if let Some(c) = &r.classification {
        let _ = writeln!(s, "  verdict          {}", c.verdict);
    }
    if let Some(f) = &r.fixed_point {
        let _ = writeln!(s, "  fixed point      x = {:.12}, y = {:.12}", f.x0, f.y0);
    }
    match r.n_tigm {
        Some(n) => {
            let _ = writeln!(s, "  n_tigm           {n}");
        }
        None => s.push_str("  n_tigm           not computed (k = 1)\n"),
    }
    s
}

fn cmd_gibbs(args: &GibbsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = SolveOptions::default();
    let pairs: Vec<(f64, f64)> = match (&args.sweep, args.a, args.b) {
        (Some(sw), _, _) => sw
            .a
            .points()
            .into_iter()
            .flat_map(|a| sw.b.points().into_iter().map(move |b| (a, b)))
            .collect(),
        (None, Some(a), Some(b)) => vec![(a, b)],
        _ => return Err(CliError::Input("need --a and --b, or --sweep".into())),
    };
    let mut reports = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let m = GibbsModel::new(a, b, args.k, args.beta)?;
        reports.push(analyze(&m, &opts)?);
    }
    let text = if args.json {
        let views: Vec<GibbsJson> = reports.iter().map(Into::into).collect();
        if args.sweep.is_some() {
            to_json(&views)
        } else {
            to_json(&views[0])
        }
    } else {
        reports.iter().map(gibbs_text).collect::<Vec<_>>().join("\n")
    };
    emit(out, None, &text)
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (kernel, opts) = load_kernel(
        &args.kernel,
        &Tolerances {
            quad_tol: None,
            root_tol: None,
            residual_tol: None,
            grid: None,
        },
    )?;
    let report = hammerfix_core::solve(&kernel, &opts)?;
    let oo = OracleOptions {
        starts_per_axis: args.starts,
        picard_seeds: args.picard_seeds,
        ..OracleOptions::default()
    };
    let o = cross_check(&report, &oo).map_err(|e| CliError::Input(e.to_string()))?;
    let text = if args.json {
        to_json(&OracleJson::from(&o))
    } else {
        format!("n_fix       {}\n{}", report.n_fix, oracle_text(&o))
    };
    emit(out, None, &text)?;
    if o.matches {
        Ok(())
    } else {
        Err(CliError::Contradiction("oracle disagrees with the solver".into()))
    }
}

fn rel_gap(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = read_to_string(&args.report)?;
    let rep: SolveJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{} is not a solve report: {e}", args.report.display())))?;
    let inp = &rep.inputs;
    let kernel = KernelSpec::parse(&inp.phi1, &inp.phi2, &inp.psi1, &inp.psi2, inp.k)
        .map_err(|e| CliError::Input(e.to_string()))?;
    if !(inp.quad_tol > 0.0 && inp.residual_tol > 0.0 && inp.grid >= 2) {
        return Err(CliError::Input("report inputs carry invalid tolerances".into()));
    }

    let mut failures = Vec::new();
    let c = compute_coefficients(&kernel, inp.quad_tol).map_err(|e| CliError::Input(e.to_string()))?;
    let coeff_gap = c
        .a
        .iter()
        .zip(&rep.coefficients.a)
        .chain(c.b.iter().zip(&rep.coefficients.b))
        .map(|(x, y)| rel_gap(*x, *y))
        .fold(0.0, f64::max);
    if rep.coefficients.a.len() != c.a.len() || rep.coefficients.b.len() != c.b.len() || coeff_gap > 1e-9 {
        failures.push(format!("coefficients do not match the kernel (relative gap {coeff_gap:e})"));
    }
    if rep.n_fix != rep.fixed_points.len() || rep.n_fix != rep.roots.len() {
        failures.push(format!(
            "n_fix = {} but the report lists {} roots and {} fixed points",
            rep.n_fix,
            rep.roots.len(),
            rep.fixed_points.len()
        ));
    }

    let mut lines = String::new();
    for (i, fp) in rep.fixed_points.iter().enumerate() {
        let p = PlanePoint::new(fp.x, fp.y);
        if !p.is_positive() {
            failures.push(format!("fixed point {} is not positive", i + 1));
            continue;
        }
        let q = verify_q(&p, &c);
        let q_ok = q <= Q_RESIDUAL_TOL * fp.x.max(fp.y).max(1.0);
        let mut f = reconstruct(&p, &kernel, inp.grid)?;
        let res = verify_operator(&mut f, &kernel, inp.quad_tol)?;
        let scale = f.samples.iter().fold(1.0f64, |m, s| m.max(s.1.abs()));
        let op_ok = res <= inp.residual_tol * scale;
        let ratio_ok = rel_gap(fp.y / fp.x, fp.xi) <= 1e-9;
        let _ = writeln!(
            lines,
            "fixed point {}: q residual {q:.3e} {}, operator residual {res:.3e} {}, ratio {}",
            i + 1,
            if q_ok { "ok" } else { "FAIL" },
            if op_ok { "ok" } else { "FAIL" },
            if ratio_ok { "ok" } else { "FAIL" },
        );
        if !(q_ok && op_ok && ratio_ok) {
            failures.push(format!("fixed point {} fails its residual bounds", i + 1));
        }
    }
    emit(out, None, &lines)?;
    if failures.is_empty() {
        emit(out, None, "report verified\n")
    } else {
        Err(CliError::Contradiction(failures.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "0.5:2:4,1:1:1".parse().unwrap();
        assert_eq!(s.a.points(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(s.b.points(), vec![1.0]);
        for bad in ["1:2", "1:2:3", "0:1:2,1:1:1", "2:1:2,1:1:1", "1:2:0,1:1:1", "x:1:2,1:1:1"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::Input(String::new()).exit_code(), 1);
        assert_eq!(CliError::from(SolveError::Contradiction("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(GibbsError::InvalidModel("x".into())).exit_code(), 1);
    }
}
