//! Command-line front end: shifts, scans, fits, critical regulator values and
//! figure data.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fitting::{self, FitResult};
use crate::params::NonlinearityParams;
use crate::perturbation::{self, Nonlinearity, ScanRow, ScanSpec};
use crate::result::ShiftResult;
use crate::wavefunctions::{QuantumState, System, WallModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const CSV_HEADER: [&str; 14] =
    ["system", "n", "l", "m", "a", "L", "eta", "nonlinearity", "delta_e", "delta_e_dimless", "err", "method", "seed", "status"];

/// Version string: crate version plus the git revision when it was known at build time.
pub fn version() -> String {
    match option_env!("NLSE_GIT_REV") {
        Some(rev) if !rev.is_empty() => format!("{}-g{rev}", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "nlse", version, about = "First-order energy shifts from a regularized nonlinear Schrodinger term")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    /// `key = value` run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub mc_samples: Option<String>,
    /// Override any configuration key, e.g. `--set tail_cutoff=1e-20`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Well,
    Sho,
    Hydrogen,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Well => System::InfiniteWell,
            SystemArg::Sho => System::Oscillator,
            SystemArg::Hydrogen => System::Hydrogen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NonlinearityArg {
    Info,
    Gp,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WallArg {
    Continued,
    Hard,
}

impl From<WallArg> for WallModel {
    fn from(w: WallArg) -> Self {
        match w {
            WallArg::Continued => WallModel::Continued,
            WallArg::Hard => WallModel::Hard,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long = "L", alias = "length", default_value_t = 1.0, allow_hyphen_values = true)]
    pub length: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = NonlinearityArg::Info)]
    pub nonlinearity: NonlinearityArg,
    /// Gross-Pitaevskii coupling.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Pseudo-model strength.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Average the operator over `L -> -L`.
    #[arg(long)]
    pub symmetrized: bool,
    #[arg(long, value_enum, default_value_t = WallArg::Continued)]
    pub wall: WallArg,
    #[arg(long)]
    pub json: bool,
}

impl ModelArgs {
    fn nonlinearity(&self) -> Result<Nonlinearity> {
        let missing = |what: &str| Error::InvalidArgument(format!("--nonlinearity needs {what}"));
        Ok(match self.nonlinearity {
            NonlinearityArg::Info => Nonlinearity::InfoTheoretic,
            NonlinearityArg::Gp => Nonlinearity::Gp { g: self.g.ok_or_else(|| missing("--g"))? },
            NonlinearityArg::Pseudo => Nonlinearity::Pseudo { eps: self.eps.ok_or_else(|| missing("--eps"))? },
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One shift, printed as a CSV row or a JSON object.
    Shift {
        #[arg(value_enum)]
        system: SystemArg,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        l: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        m: i32,
        #[arg(long)]
        a: f64,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Shifts over a grid of states and length scales.
    Scan {
        #[arg(value_enum)]
        system: SystemArg,
        /// `lo..hi` (inclusive) or a comma list.
        #[arg(long, default_value = "1")]
        n_range: String,
        /// Fixed `l`, or `max` for `l = n - 1`.
        #[arg(long, default_value = "0")]
        l: String,
        /// Fixed `m`, or `max` for `m = l`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        m: String,
        /// Explicit `n,l,m` triples separated by `;` (overrides the ranges).
        #[arg(long)]
        states: Option<String>,
        /// Comma list of length scales.
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
        /// `lo:hi` for a geometric grid of `--a-points` values.
        #[arg(long)]
        a_range: Option<String>,
        #[arg(long, default_value_t = 8)]
        a_points: usize,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Power-law fit of two columns of a scan CSV.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = "a")]
        x_col: String,
        #[arg(long, default_value = "delta_e_dimless")]
        y_col: String,
        /// Weight points by this error column.
        #[arg(long)]
        err_col: Option<String>,
        /// Keep only rows with `column=value` (repeatable).
        #[arg(long = "where", value_name = "COL=VALUE")]
        filters: Vec<String>,
    },
    /// Regulator value where the shift changes sign.
    CriticalEta {
        #[arg(value_enum)]
        system: SystemArg,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        l: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        m: i32,
        #[arg(long)]
        a: f64,
        #[arg(long = "L", alias = "length", default_value_t = 1.0, allow_hyphen_values = true)]
        length: f64,
    },
    /// Data behind the figures, as CSV with natural-log columns.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// Print the power-law fit of the plotted points to stderr.
        #[arg(long)]
        fit: bool,
    },
}

/// Run configuration from defaults, `--config` and flag overrides.
pub fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut set = |k: &str, v: &str| cfg.set(k, v).map_err(Error::Config);
    if let Some(seed) = args.seed {
        set("rng_seed", &seed.to_string())?;
    }
    if let Some(t) = args.rel_tol {
        set("rel_tol", &t.to_string())?;
    }
    if let Some(n) = &args.mc_samples {
        set("mc_samples", n)?;
    }
    for o in &args.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{o}'")))?;
        set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Self-describing record of one shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub system: String,
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub a: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub eta: f64,
    pub nonlinearity: String,
    pub wall: WallModel,
    pub symmetrized: bool,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub mc_samples: usize,
    pub version: String,
    pub status: String,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub result: Option<ShiftResult>,
}

impl OutputRecord {
    pub fn csv_fields(&self) -> Vec<String> {
        let (de, ded, err, method) = match &self.result {
            Some(r) => (num(r.delta_e), num(r.delta_e_dimensionless), num(r.err_estimate), r.method.as_str().to_string()),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        vec![
            self.system.clone(),
            self.n.to_string(),
            self.l.to_string(),
            self.m.to_string(),
            num(self.a),
            num(self.length),
            num(self.eta),
            self.nonlinearity.clone(),
            de,
            ded,
            err,
            method,
            self.seed.to_string(),
            self.status.clone(),
        ]
    }
}

/// 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Echo<'a> {
    cfg: &'a RunConfig,
    wall: WallModel,
    symmetrized: bool,
}

fn record(echo: &Echo, row: &ScanRow) -> OutputRecord {
    let (status, result) = match &row.result {
        Ok(r) => ("ok".to_string(), Some(r.clone())),
        Err(e) => (format!("error: {e}"), None),
    };
    OutputRecord {
        system: row.system.as_str().to_string(),
        n: row.n,
        l: row.l,
        m: row.m,
        a: row.a,
        length: row.length,
        eta: row.eta,
        nonlinearity: row.nonlinearity.tag(),
        wall: echo.wall,
        symmetrized: echo.symmetrized,
        seed: row.seed,
        rel_tol: echo.cfg.rel_tol,
        abs_tol: echo.cfg.abs_tol,
        mc_samples: echo.cfg.mc_samples,
        version: version(),
        status,
        result,
    }
}

fn write_records(out: &mut dyn Write, records: &[OutputRecord], json: bool) -> Result<()> {
    if json {
        for r in records {
            let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out, "{line}")?;
        }
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.csv_fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn shift_result(system: System, (n, l, m): (u32, u32, i32), a: f64, model: &ModelArgs, cfg: &RunConfig) -> Result<ShiftResult> {
    let nl = model.nonlinearity()?;
    let state = QuantumState::from_parts(system, n, l, m, a)?.with_wall(model.wall.into());
    let mut params = if state.is_1d() {
        NonlinearityParams::new(model.length, model.eta)
    } else {
        NonlinearityParams::three_d(model.length, model.eta)
    };
    params.symmetrized = model.symmetrized;
    perturbation::delta_e_for(&state, nl, &params, cfg)
}

fn row_from(system: System, (n, l, m): (u32, u32, i32), a: f64, model: &ModelArgs, cfg: &RunConfig, result: &Result<ShiftResult>) -> ScanRow {
    ScanRow {
        system,
        n,
        l,
        m,
        a,
        length: model.length,
        eta: model.eta,
        nonlinearity: model.nonlinearity().unwrap_or(Nonlinearity::InfoTheoretic),
        seed: cfg.rng_seed,
        result: result.clone().map_err(|e| e.to_string()),
    }
}

/// `lo..hi` inclusive, or a comma list.
pub fn parse_range(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::InvalidArgument(format!("bad range '{text}'"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn parse_states(text: &str) -> Result<Vec<(u32, u32, i32)>> {
    let bad = || Error::InvalidArgument(format!("bad state list '{text}'"));
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let q: Vec<&str> = t.split(',').map(str::trim).collect();
            match q.as_slice() {
                [n, l, m] => Ok((n.parse().map_err(|_| bad())?, l.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)),
                [n] => Ok((n.parse().map_err(|_| bad())?, 0, 0)),
                _ => Err(bad()),
            }
        })
        .collect()
}

fn quantum_number(text: &str, max: u32) -> Result<u32> {
    if text == "max" {
        return Ok(max);
    }
    text.parse().map_err(|_| Error::InvalidArgument(format!("bad quantum number '{text}'")))
}

fn m_value(text: &str, l: u32) -> Result<i32> {
    if text == "max" {
        return Ok(l as i32);
    }
    text.parse().map_err(|_| Error::InvalidArgument(format!("bad quantum number '{text}'")))
}

/// The `a` grid of a scan: an explicit list or a geometric range.
pub fn a_grid(list: &[f64], range: Option<&str>, points: usize) -> Result<Vec<f64>> {
    match (list.is_empty(), range) {
        (false, None) => Ok(list.to_vec()),
        (true, Some(r)) => {
            let (lo, hi) = r.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("bad a range '{r}'")))?;
            let lo: f64 = lo.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad a range '{r}'")))?;
            let hi: f64 = hi.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad a range '{r}'")))?;
            perturbation::geometric_grid(lo, hi, points)
        }
        (true, None) => Err(Error::InvalidArgument("give --a or --a-range".into())),
        (false, Some(_)) => Err(Error::InvalidArgument("give only one of --a and --a-range".into())),
    }
}

fn filtered_points(
    path: &PathBuf,
    x_col: &str,
    y_col: &str,
    err_col: Option<&str>,
    filters: &[String],
) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut rdr = csv::Reader::from_path(path).map_err(io)?;
    let headers = rdr.headers().map_err(io)?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::InvalidArgument(format!("no column '{name}'")))
    };
    let (xi, yi) = (col(x_col)?, col(y_col)?);
    let ei = err_col.map(col).transpose()?;
    let status = headers.iter().position(|h| h == "status");
    let conds = filters
        .iter()
        .map(|f| {
            let (k, v) = f.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("bad filter '{f}'")))?;
            Ok((col(k.trim())?, v.trim().to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("not a number: '{s}'")));
    let (mut points, mut errs) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(io)?;
        if status.is_some_and(|s| &rec[s] != "ok") {
            continue;
        }
        if !conds.iter().all(|(i, v)| rec[*i] == *v || matches!((number(&rec[*i]), number(v)), (Ok(a), Ok(b)) if a == b)) {
            continue;
        }
        points.push((number(&rec[xi])?, number(&rec[yi])?));
        if let Some(e) = ei {
            errs.push(number(&rec[e])?);
        }
    }
    Ok((points, errs))
}

#[derive(Debug, Serialize)]
struct FitRecord<'a> {
    csv: String,
    x_col: &'a str,
    y_col: &'a str,
    weighted: bool,
    filters: &'a [String],
    version: String,
    #[serde(flatten)]
    fit: FitResult,
}

#[derive(Debug, Serialize)]
struct CriticalRecord {
    system: String,
    n: u32,
    l: u32,
    m: i32,
    a: f64,
    #[serde(rename = "L")]
    length: f64,
    seed: u64,
    rel_tol: f64,
    version: String,
    #[serde(flatten)]
    result: perturbation::CriticalEta,
}

/// Figure 1: well `n = 1` against `a`.
pub fn figure_1(eta: f64, cfg: &RunConfig) -> Result<Vec<Vec<String>>> {
    let grid = perturbation::geometric_grid(1000.0, 10000.0, 10)?;
    let spec = ScanSpec::one_d(System::InfiniteWell, [1], grid, 1.0, eta);
    let rows = perturbation::scan(&spec, cfg)?;
    log_rows(&rows, |r| r.a)
}

/// Figure 2: oscillator `n = 1..18` at `a = 1000`.
pub fn figure_2(eta: f64, cfg: &RunConfig) -> Result<Vec<Vec<String>>> {
    let spec = ScanSpec::one_d(System::Oscillator, 1..=18, vec![1000.0], 1.0, eta);
    let rows = perturbation::scan(&spec, cfg)?;
    log_rows(&rows, |r| f64::from(r.n))
}

pub const FIGURE_1_HEADER: [&str; 7] = ["n", "a", "delta_e_dimless", "err", "abs_delta_e_dimless", "ln_x", "ln_abs_delta_e_dimless"];

fn log_rows(rows: &[ScanRow], x: impl Fn(&ScanRow) -> f64) -> Result<Vec<Vec<String>>> {
    rows.iter()
        .map(|row| {
            let r = row.result.as_ref().map_err(|e| Error::RowFailed(e.clone()))?;
            let d = r.delta_e_dimensionless;
            Ok(vec![
                row.n.to_string(),
                num(row.a),
                num(d),
                num(r.err_dimensionless),
                num(d.abs()),
                num(x(row).ln()),
                num(d.abs().ln()),
            ])
        })
        .collect()
}

pub const FIGURE_3_HEADER: [&str; 9] = ["n", "a", "delta_e", "e0", "ratio", "std_error", "abs_ratio", "ln_a", "ln_abs_ratio"];

/// Figure 3: hydrogen `l = 0`, `n = 2..4`, relative shifts at several `a`.
pub fn figure_3(eta: f64, cfg: &RunConfig) -> Result<Vec<Vec<String>>> {
    let spec = ScanSpec {
        system: System::Hydrogen,
        states: (2..=4).map(|n| (n, 0, 0)).collect(),
        a_values: vec![100.0, 300.0, 1000.0],
        length: 1.0,
        eta,
        nonlinearity: Nonlinearity::InfoTheoretic,
    };
    let rows = perturbation::scan(&spec, cfg)?;
    rows.iter()
        .map(|row| {
            let r = row.result.as_ref().map_err(|e| Error::RowFailed(e.clone()))?;
            let e0 = QuantumState::hydrogen(row.n, 0, 0, row.a)?.energy();
            let ratio = r.delta_e / e0;
            Ok(vec![
                row.n.to_string(),
                num(row.a),
                num(r.delta_e),
                num(e0),
                num(ratio),
                num(r.err_estimate / e0.abs()),
                num(ratio.abs()),
                num(row.a.ln()),
                num(ratio.abs().ln()),
            ])
        })
        .collect()
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_USAGE
    } else {
        EXIT_NUMERICAL
    }
}

/// Execute a parsed command, writing results to `out` and diagnostics to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = run_config(&cli.run)?;
    match &cli.command {
        Command::Shift { system, n, l, m, a, model } => {
            let echo = Echo { cfg: &cfg, wall: model.wall.into(), symmetrized: model.symmetrized };
            let (system, q) = ((*system).into(), (*n, *l, *m));
            let result = shift_result(system, q, *a, model, &cfg);
            if let Err(e) = &result {
                if e.is_validation() {
                    return Err(e.clone());
                }
            }
            let rec = record(&echo, &row_from(system, q, *a, model, &cfg, &result));
            write_records(out, std::slice::from_ref(&rec), model.json)?;
            match result {
                Ok(_) => Ok(EXIT_OK),
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    Ok(exit_code(&e))
                }
            }
        }
        Command::Scan { system, n_range, l, m, states, a, a_range, a_points, model } => {
            let nl = model.nonlinearity()?;
            let system: System = (*system).into();
            let states = match states {
                Some(s) => parse_states(s)?,
                None => parse_range(n_range)?
                    .into_iter()
                    .map(|n| {
                        let lv = quantum_number(l, n.saturating_sub(1))?;
                        Ok((n, lv, m_value(m, lv)?))
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            let a_values = a_grid(a, a_range.as_deref(), *a_points)?;
            let spec = ScanSpec { system, states, a_values, length: model.length, eta: model.eta, nonlinearity: nl };
            spec.validate()?;
            let rows = scan_rows(&spec, model, &cfg)?;
            let echo = Echo { cfg: &cfg, wall: model.wall.into(), symmetrized: model.symmetrized };
            let records: Vec<_> = rows.iter().map(|r| record(&echo, r)).collect();
            write_records(out, &records, model.json)?;
            let failed = rows.iter().filter(|r| r.result.is_err()).count();
            if failed > 0 {
                writeln!(err, "{failed} of {} rows failed", rows.len())?;
            }
            Ok(if failed == rows.len() { EXIT_NUMERICAL } else { EXIT_OK })
        }
        Command::Fit { csv, x_col, y_col, err_col, filters } => {
            let (points, errs) = filtered_points(csv, x_col, y_col, err_col.as_deref(), filters)?;
            let fit = match err_col {
                Some(_) => fitting::power_law_fit_weighted(&points, &errs)?,
                None => fitting::power_law_fit(&points)?,
            };
            let rec = FitRecord {
                csv: csv.display().to_string(),
                x_col,
                y_col,
                weighted: err_col.is_some(),
                filters,
                version: version(),
                fit,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&rec).map_err(|e| Error::Io(e.to_string()))?)?;
            Ok(EXIT_OK)
        }
        Command::CriticalEta { system, n, l, m, a, length } => {
            let state = QuantumState::from_parts((*system).into(), *n, *l, *m, *a)?;
            let result = perturbation::critical_eta(&state, *length, &cfg)?;
            let rec = CriticalRecord {
                system: state.system().as_str().to_string(),
                n: *n,
                l: *l,
                m: *m,
                a: *a,
                length: *length,
                seed: cfg.rng_seed,
                rel_tol: cfg.rel_tol,
                version: version(),
                result,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&rec).map_err(|e| Error::Io(e.to_string()))?)?;
            Ok(EXIT_OK)
        }
        Command::Figure { which, eta, fit } => {
            let (header, rows): (&[&str], _) = match which {
                1 => (&FIGURE_1_HEADER, figure_1(*eta, &cfg)?),
                2 => (&FIGURE_1_HEADER, figure_2(*eta, &cfg)?),
                _ => {
                    if cli.run.mc_samples.is_none() {
                        return Err(Error::InvalidArgument(
                            "figure 3 runs long Monte Carlo jobs; pass --mc-samples explicitly".into(),
                        ));
                    }
                    (&FIGURE_3_HEADER, figure_3(*eta, &cfg)?)
                }
            };
            let io = |e: csv::Error| Error::Io(e.to_string());
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(header).map_err(io)?;
            for r in &rows {
                w.write_record(r).map_err(io)?;
            }
            w.flush()?;
            drop(w);
            if *fit {
                let (xi, yi) = if *which == 3 { (7, 6) } else { (5, 4) };
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter_map(|r| Some((r[xi].parse::<f64>().ok()?.exp(), r[yi].parse::<f64>().ok()?)))
                    .collect();
                let f = fitting::power_law_fit(&pts)?;
                writeln!(err, "{}", serde_json::to_string(&f).map_err(|e| Error::Io(e.to_string()))?)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn scan_rows(spec: &ScanSpec, model: &ModelArgs, cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    let wall: WallModel = model.wall.into();
    if wall == WallModel::default() && !model.symmetrized {
        return perturbation::scan(spec, cfg);
    }
    // non-default model options are applied row by row, in grid order
    Ok(spec
        .states
        .iter()
        .flat_map(|&q| spec.a_values.iter().map(move |&a| (q, a)))
        .map(|(q, a)| row_from(spec.system, q, a, model, cfg, &shift_result(spec.system, q, a, model, cfg)))
        .collect())
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute(&cli, &mut stdout.lock(), &mut stderr.lock())
}
