//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failing verification checks, 2 configuration errors,
//! 3 numerical failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::born::{born_series, QuadratureConfig, MAX_ORDER};
use crate::error::Error;
use crate::green::{green_closed_form, green_polyrep, green_polyrep_asymmetric, GreenValue, MIN_CUTOFF};
use crate::potential::{PotentialSpec, Wavenumber};
use crate::sl3::green_wronskian;
use crate::transfer::coefficients_between;
use crate::verify::{run_suite_with, Corruption, SuiteConfig};

pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sl3green", version, about = "Green functions of -psi'' + (f^2 + f')psi = k^2 psi")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transmission and reflection coefficients of intervals.
    Coefficients(CoefficientsArgs),
    /// 2ikG(x, y; k) on a grid.
    Green(GreenArgs),
    /// Run the identity suite and report residuals.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum RouteArg {
    #[value(name = "A")]
    A,
    #[default]
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    #[value(name = "C-asym")]
    CAsym,
    #[value(name = "born")]
    Born,
}

impl RouteArg {
    fn label(self) -> &'static str {
        match self {
            RouteArg::A => "A",
            RouteArg::B => "B",
            RouteArg::C => "C",
            RouteArg::CAsym => "C-asym",
            RouteArg::Born => "born",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorruptionArg {
    Generator,
    Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.stop } else { self.start + h * i as f64 }).collect()
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{what}: '{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{what}: '{s}' is not finite"));
    }
    Ok(v)
}

/// `start:stop:n`, strictly increasing when n ≥ 2.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("grid '{s}' must look like start:stop:n"));
    };
    let (start, stop) = (parse_f64(a, "grid start")?, parse_f64(b, "grid stop")?);
    let n: usize = n.trim().parse().map_err(|_| format!("grid count '{n}' is not a positive integer"))?;
    if n == 0 {
        return Err("grid count must be at least 1".into());
    }
    if n >= 2 && !(stop > start) {
        return Err(format!("grid '{s}' must be strictly increasing"));
    }
    Ok(Grid { start, stop, n })
}

/// `x1:x2`
pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let Some((a, b)) = s.split_once(':') else {
        return Err(format!("interval '{s}' must look like x1:x2"));
    };
    Ok((parse_f64(a, "interval start")?, parse_f64(b, "interval end")?))
}

/// `re,im` or `re`
pub fn parse_k(s: &str) -> Result<Wavenumber, String> {
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (parse_f64(a, "k real part")?, parse_f64(b, "k imaginary part")?),
        None => (parse_f64(s, "k")?, 0.0),
    };
    Wavenumber::from_parts(re, im).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Prepend a metadata header (comment lines in CSV, a meta object in JSON lines).
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct CoefficientsArgs {
    /// Potential file (.toml or .json).
    #[arg(long)]
    pub potential: PathBuf,
    /// Wavenumber as re,im; repeatable.
    #[arg(long = "k", value_parser = parse_k, required = true, allow_hyphen_values = true)]
    pub k: Vec<Wavenumber>,
    /// Interval as x1:x2; repeatable.
    #[arg(long, value_parser = parse_interval, required = true, allow_hyphen_values = true)]
    pub interval: Vec<(f64, f64)>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    /// Potential file (.toml or .json).
    #[arg(long)]
    pub potential: PathBuf,
    /// Wavenumber as re,im; repeatable.
    #[arg(long = "k", value_parser = parse_k, required = true, allow_hyphen_values = true)]
    pub k: Vec<Wavenumber>,
    /// Grid for both x and y as start:stop:n.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Grid for x only; overrides --grid.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
    /// Grid for y only; overrides --grid.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub y_grid: Option<Grid>,
    #[arg(long, value_enum, default_value_t)]
    pub route: RouteArg,
    /// Polynomial cutoff for routes C and C-asym.
    #[arg(long = "P", default_value_t = 64)]
    pub cutoff: usize,
    /// Series order for the born route.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Gauss–Legendre nodes per panel for the born route.
    #[arg(long, default_value_t = 32)]
    pub nodes: usize,
    /// Panel budget for the born route.
    #[arg(long, default_value_t = 64)]
    pub max_panels: usize,
    /// Add the column |route − B|.
    #[arg(long)]
    pub cross_check: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Potential file; the vacuum when omitted.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Wavenumbers for the given potential; 1,0.3 when omitted.
    #[arg(long = "k", value_parser = parse_k, allow_hyphen_values = true)]
    pub k: Vec<Wavenumber>,
    /// Polynomial cutoff.
    #[arg(long = "P", default_value_t = 64)]
    pub cutoff: usize,
    /// Seed for the random potentials and k samples.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of seeded random slab potentials.
    #[arg(long, default_value_t = 6)]
    pub random: usize,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, hide = true)]
    pub inject_corruption: Option<CorruptionArg>,
}

enum Failure {
    Config(String),
    Numerical(String),
    ChecksFailed,
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

/// Parses `args` (program name first) and runs the subcommand; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Coefficients(a) => cmd_coefficients(a, stdout),
        Command::Green(a) => cmd_green(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Config(m)) => {
            let _ = writeln!(stderr, "config error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(m)) => {
            let _ = writeln!(stderr, "numerical error: {m}");
            EXIT_NUMERICAL
        }
        Err(Failure::ChecksFailed) => EXIT_CHECKS_FAILED,
    }
}

fn load(path: &PathBuf) -> Result<PotentialSpec, Failure> {
    PotentialSpec::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn numerical(context: String, e: &Error) -> Failure {
    Failure::Numerical(format!("{context}: {}: {e}", e.kind()))
}

fn open_output<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(stdout)),
    }
}

fn write_rows<R: Serialize>(
    output: &OutputArgs,
    meta: &[(&str, String)],
    rows: &[R],
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut w = open_output(&output.out, stdout)?;
    match output.format {
        Format::Csv => {
            if output.header {
                writeln!(w, "# sl3green {}", env!("CARGO_PKG_VERSION"))?;
                for (key, value) in meta {
                    writeln!(w, "# {key}={value}")?;
                }
            }
            let mut csv = csv::Writer::from_writer(&mut w);
            for r in rows {
                csv.serialize(r)?;
            }
            csv.flush()?;
        }
        Format::Jsonl => {
            if output.header {
                let mut m = serde_json::Map::new();
                m.insert("sl3green".into(), env!("CARGO_PKG_VERSION").into());
                for (key, value) in meta {
                    m.insert((*key).into(), value.clone().into());
                }
                writeln!(w, "{}", serde_json::json!({ "meta": m }))?;
            }
            for r in rows {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct CoefficientRow {
    x1: f64,
    x2: f64,
    k_re: f64,
    k_im: f64,
    tau_re: f64,
    tau_im: f64,
    r_right_re: f64,
    r_right_im: f64,
    r_left_re: f64,
    r_left_im: f64,
}

fn cmd_coefficients(a: &CoefficientsArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let spec = load(&a.potential)?;
    let mut rows = Vec::new();
    for &k in &a.k {
        for &(x1, x2) in &a.interval {
            let t = coefficients_between(&spec, x1, x2, k)
                .map_err(|e| numerical(format!("interval [{x1}, {x2}] at k = {}", k.value()), &e))?;
            rows.push(CoefficientRow {
                x1,
                x2,
                k_re: k.value().re,
                k_im: k.value().im,
                tau_re: t.tau.re,
                tau_im: t.tau.im,
                r_right_re: t.r_right.re,
                r_right_im: t.r_right.im,
                r_left_re: t.r_left.re,
                r_left_im: t.r_left.im,
            });
        }
    }
    let meta = [("command", "coefficients".to_string()), ("potential", a.potential.display().to_string())];
    write_rows(&a.output, &meta, &rows, stdout)
}

#[derive(Debug, Serialize)]
struct GreenRow {
    x: f64,
    y: f64,
    k_re: f64,
    k_im: f64,
    value_re: f64,
    value_im: f64,
    route: &'static str,
    truncation_loss: f64,
    #[serde(rename = "abs_diff_vs_B", skip_serializing_if = "Option::is_none")]
    abs_diff_vs_b: Option<f64>,
    status: &'static str,
}

fn evaluate(spec: &PotentialSpec, a: &GreenArgs, x: f64, y: f64, k: Wavenumber) -> Result<GreenValue, Error> {
    match a.route {
        RouteArg::A => green_wronskian(spec, x, y, k),
        RouteArg::B => green_closed_form(spec, x, y, k),
        RouteArg::C => green_polyrep(spec, x, y, k, a.cutoff),
        RouteArg::CAsym => green_polyrep_asymmetric(spec, x, y, k, a.cutoff),
        RouteArg::Born => {
            let quad = QuadratureConfig { nodes_per_panel: a.nodes, max_panels: a.max_panels };
            born_series(spec, x, y, k, a.order, &quad).map(|(g, _)| g)
        }
    }
}

fn green_row(spec: &PotentialSpec, a: &GreenArgs, x: f64, y: f64, k: Wavenumber) -> Result<GreenRow, Failure> {
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let flagged = |e: &Error| matches!(e, Error::DenominatorZero { .. });
    let context = || format!("route {} at x = {x}, y = {y}, k = {}", a.route.label(), k.value());
    let (value, loss, status) = match evaluate(spec, a, x, y, k) {
        Ok(g) => (g.value, g.truncation_loss, "ok"),
        Err(e) if flagged(&e) => (nan, f64::NAN, "DenominatorZero"),
        Err(e) => return Err(numerical(context(), &e)),
    };
    let abs_diff_vs_b = if a.cross_check {
        Some(match green_closed_form(spec, x, y, k) {
            Ok(b) => (value - b.value).norm(),
            Err(e) if flagged(&e) => f64::NAN,
            Err(e) => return Err(numerical(context(), &e)),
        })
    } else {
        None
    };
    Ok(GreenRow {
        x,
        y,
        k_re: k.value().re,
        k_im: k.value().im,
        value_re: value.re,
        value_im: value.im,
        route: a.route.label(),
        truncation_loss: loss,
        abs_diff_vs_b,
        status,
    })
}

fn cmd_green(a: &GreenArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let spec = load(&a.potential)?;
    let (Some(xg), Some(yg)) = (a.x_grid.or(a.grid), a.y_grid.or(a.grid)) else {
        return Err(Failure::Config("give --grid, or both --x-grid and --y-grid".into()));
    };
    if matches!(a.route, RouteArg::C | RouteArg::CAsym) && a.cutoff < MIN_CUTOFF {
        return Err(Failure::Config(format!("--P must be at least {MIN_CUTOFF}")));
    }
    if a.route == RouteArg::Born && a.order > MAX_ORDER {
        return Err(Failure::Config(format!("--order must be at most {MAX_ORDER}")));
    }
    let (xs, ys) = (xg.points(), yg.points());
    let mut points = Vec::with_capacity(a.k.len() * xs.len() * ys.len());
    for &k in &a.k {
        for &x in &xs {
            for &y in &ys {
                points.push((x, y, k));
            }
        }
    }
    // Collected in grid order whatever the completion order.
    let rows: Vec<GreenRow> =
        points.par_iter().map(|&(x, y, k)| green_row(&spec, a, x, y, k)).collect::<Result<_, _>>()?;
    let mut meta = vec![
        ("command", "green".to_string()),
        ("potential", a.potential.display().to_string()),
        ("route", a.route.label().to_string()),
    ];
    match a.route {
        RouteArg::C | RouteArg::CAsym => meta.push(("P", a.cutoff.to_string())),
        RouteArg::Born => meta.push(("order", a.order.to_string())),
        _ => {}
    }
    write_rows(&a.output, &meta, &rows, stdout)
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let spec = match &a.potential {
        Some(p) => load(p)?,
        None => PotentialSpec::vacuum(),
    };
    if a.cutoff < MIN_CUTOFF {
        return Err(Failure::Config(format!("--P must be at least {MIN_CUTOFF}")));
    }
    let ks = if a.k.is_empty() {
        vec![Wavenumber::from_parts(1.0, 0.3).expect("valid default")]
    } else {
        a.k.clone()
    };
    let config = SuiteConfig {
        random_potentials: a.random,
        corruption: a.inject_corruption.map(|c| match c {
            CorruptionArg::Generator => Corruption::Generator,
            CorruptionArg::Coefficient => Corruption::Coefficient,
        }),
        ..SuiteConfig::default()
    };
    let report = run_suite_with(&spec, &ks, a.cutoff, a.seed, &config);
    match a.output.format {
        Format::Csv => {
            let mut w = open_output(&a.output.out, stdout)?;
            if a.output.header {
                writeln!(w, "# sl3green {} verify seed={} P={}", env!("CARGO_PKG_VERSION"), a.seed, a.cutoff)?;
            }
            w.write_all(report.render().as_bytes())?;
            w.flush()?;
        }
        Format::Jsonl => {
            let meta = [("command", "verify".to_string()), ("seed", a.seed.to_string()), ("P", a.cutoff.to_string())];
            write_rows(&a.output, &meta, &report.entries, stdout)?;
        }
    }
    let failed = report.failures().count();
    let _ = writeln!(stderr, "{} checks, {failed} failed", report.entries.len());
    if failed > 0 {
        return Err(Failure::ChecksFailed);
    }
    Ok(())
}
