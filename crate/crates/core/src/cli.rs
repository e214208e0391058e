//! Command-line driver: sweeps, fits, off-critical scans, oracle validation
//! and the prefactor integrals.
//!
//! Every flag can also be given in a flat `key = value` config file passed
//! with `--config`; flags on the command line take precedence.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::cft::{fisher_hartwig_integrals, fit_scaling, BasisTerm, Quantity, ScalingFit};
use crate::corr::{block_spectrum_with, SymbolTable};
use crate::error::Error;
use crate::model::ModelSpec;
use crate::offcritical::{closed_forms, epsilon_of};
use crate::oracle::cross_validate;
use crate::spectra::{report, EntanglementReport};

pub const CSV_HEADER: [&str; 5] = ["L", "entropy", "log_inv_lambda1", "e1_floored", "lambda1"];

/// Models checked by `validate`.
pub const VALIDATION_BATTERY: [(f64, f64); 6] = [
    (0.0, 0.0),
    (0.0, 0.5),
    (1.0, 1.0),
    (1.0, 0.5),
    (1.0, 2.0),
    (0.5, 1.2),
];
pub const VALIDATION_TOLERANCE: f64 = 1e-8;

/// Default lower edge of the fit window.
pub const DEFAULT_FIT_MIN: f64 = 20.0;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files: exit code 2.
    Usage(String),
    /// Numerical failure or failed validation: exit code 1.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::QuadratureFailure { .. }
            | Error::EigensolveFailure(_)
            | Error::SpectrumOutOfRange { .. }
            | Error::SingularDesign
            | Error::DivisionByZero { .. }
            | Error::Truncation { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "singlecopy", version, about = "Entropy and single-copy entanglement of XY chain blocks")]
pub struct Cli {
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement of blocks of increasing length in the infinite chain.
    Sweep(SweepArgs),
    /// Fit a sweep column to a log-L scaling form.
    Fit(FitArgs),
    /// Elliptic level spacing and closed forms in the gapped phase.
    Offcritical(OffcriticalArgs),
    /// Compare free-fermion results against exact diagonalization.
    Validate(ValidateArgs),
    /// Evaluate the log-L prefactor integrals.
    Integrals(IntegralsArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub l_min: Option<usize>,
    #[arg(long)]
    pub l_max: Option<usize>,
    #[arg(long, conflicts_with = "l_list")]
    pub l_ratio: Option<f64>,
    /// Explicit comma-separated block lengths.
    #[arg(long)]
    pub l_list: Option<String>,
    /// Round geometric schedules to even, odd or any L.
    #[arg(long)]
    pub l_parity: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subset of entropy,log_inv_lambda1,e1_floored,lambda1.
    #[arg(long)]
    pub quantities: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write a gnuplot script plotting the output file.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV written by `sweep`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// entropy or log_inv_lambda1.
    #[arg(long)]
    pub quantity: Option<String>,
    /// Comma-separated subset of log,const,invlog.
    #[arg(long)]
    pub basis: Option<String>,
    /// Inclusive L range `min:max`; either side may be empty.
    #[arg(long)]
    pub fit_window: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OffcriticalArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Comma-separated list of fields.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Chain length.
    #[arg(long, short = 'n')]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IntegralsArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed `key = value` file. Keys are normalized to the flag spelling.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(usage(format!("config line {}: empty key", i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    /// Flag value if given, else the config value.
    fn pick<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        let from_file = self.get(key)?;
        Ok(flag.or(from_file))
    }

    fn finish(self) -> CliResult<()> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(usage(format!("unknown config key '{k}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LParity {
    Any,
    Even,
    Odd,
}

impl FromStr for LParity {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "any" => Ok(LParity::Any),
            "even" => Ok(LParity::Even),
            "odd" => Ok(LParity::Odd),
            other => Err(usage(format!("l-parity must be any, even or odd, got '{other}'"))),
        }
    }
}

/// `round(l_min · r^i)` up to `l_max`, with `l_max` appended, each value
/// moved to the nearest L of the requested parity and duplicates dropped.
pub fn geometric_schedule(
    l_min: usize,
    l_max: usize,
    ratio: f64,
    parity: LParity,
) -> CliResult<Vec<usize>> {
    if l_min < 1 || l_max < l_min {
        return Err(usage(format!("need 1 <= l-min <= l-max, got {l_min}..{l_max}")));
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(usage(format!("l-ratio must be > 1, got {ratio}")));
    }
    let snap = |l: usize| match parity {
        LParity::Any => l,
        LParity::Even if l % 2 == 1 => l + 1,
        LParity::Odd if l % 2 == 0 => l + 1,
        _ => l,
    };
    let mut out: Vec<usize> = Vec::new();
    let mut x = l_min as f64;
    while x.round() as usize <= l_max {
        let l = snap(x.round() as usize);
        if l <= l_max && out.last().is_none_or(|&last| l > last) {
            out.push(l);
        }
        x *= ratio;
    }
    let last = snap(l_max);
    let last = if last > l_max { l_max - 1 } else { last };
    if last >= 1 && out.last().is_none_or(|&prev| last > prev) {
        out.push(last);
    }
    Ok(out)
}

pub fn parse_l_list(text: &str) -> CliResult<Vec<usize>> {
    let ls: Vec<usize> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad block length '{}'", s.trim())))
        })
        .collect::<CliResult<_>>()?;
    if ls.is_empty() || ls[0] < 1 || ls.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("l-list must be strictly increasing block lengths >= 1"));
    }
    Ok(ls)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Column {
    Entropy,
    LogInvLambda1,
    E1Floored,
    Lambda1,
}

impl Column {
    pub const ALL: [Column; 4] = [
        Column::Entropy,
        Column::LogInvLambda1,
        Column::E1Floored,
        Column::Lambda1,
    ];

    pub fn name(self) -> &'static str {
        CSV_HEADER[self as usize + 1]
    }

    fn value(self, r: &EntanglementReport) -> f64 {
        match self {
            Column::Entropy => r.entropy,
            Column::LogInvLambda1 => r.log_inv_lambda1,
            Column::E1Floored => r.e1_floored,
            Column::Lambda1 => r.lambda1,
        }
    }
}

pub fn parse_columns(text: &str) -> CliResult<Vec<Column>> {
    let mut cols = Vec::new();
    for name in text.split(',').map(str::trim) {
        let col = Column::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| usage(format!("unknown quantity '{name}'")))?;
        if !cols.contains(&col) {
            cols.push(col);
        }
    }
    cols.sort();
    Ok(cols)
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reports for every block length, computed in parallel from one shared
/// symbol table and returned in the order of `ls`.
pub fn sweep_reports(model: &ModelSpec, ls: &[usize]) -> crate::Result<Vec<EntanglementReport>> {
    let max = ls.iter().copied().max().unwrap_or(1);
    let table = SymbolTable::build(*model, max.saturating_sub(1))?;
    ls.par_iter()
        .map(|&l| report(&block_spectrum_with(&table, l)?))
        .collect()
}

pub fn sweep_csv(reports: &[EntanglementReport], columns: &[Column]) -> String {
    let mut out = String::from("L");
    for c in columns {
        out.push(',');
        out.push_str(c.name());
    }
    out.push('\n');
    for r in reports {
        write!(out, "{}", r.block_len).expect("write to string");
        for c in columns {
            out.push(',');
            out.push_str(&format_float(c.value(r)));
        }
        out.push('\n');
    }
    out
}

fn gnuplot_script(data: &Path, columns: &[Column]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key top left\nset logscale x\nset xlabel 'L'\n");
    let plots: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            format!(
                "'{}' using 1:{} skip 1 with linespoints title '{}'",
                data.display(),
                i + 2,
                c.name()
            )
        })
        .collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).expect("write to string");
    s
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Numerical(format!("cannot write to stdout: {e}"))),
    }
}

fn model_from(gamma: Option<f64>, lambda: Option<f64>) -> CliResult<ModelSpec> {
    let gamma = gamma.ok_or_else(|| usage("--gamma is required"))?;
    let lambda = lambda.ok_or_else(|| usage("--lambda is required"))?;
    Ok(ModelSpec::new(gamma, lambda)?)
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> CliResult<T> + Send,
) -> CliResult<T> {
    match workers {
        None => job(),
        Some(0) => Err(usage("--workers must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Numerical(format!("cannot start worker pool: {e}")))?
            .install(job),
    }
}

fn cmd_sweep(args: SweepArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let gamma = cfg.pick(args.gamma, "gamma")?;
    let lambda = cfg.pick(args.lambda, "lambda")?;
    let l_min = cfg.pick(args.l_min, "l-min")?;
    let l_max = cfg.pick(args.l_max, "l-max")?;
    let l_ratio = cfg.pick(args.l_ratio, "l-ratio")?;
    let l_list: Option<String> = cfg.pick(args.l_list, "l-list")?;
    let parity: Option<String> = cfg.pick(args.l_parity, "l-parity")?;
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    let quantities: Option<String> = cfg.pick(args.quantities, "quantities")?;
    let workers = cfg.pick(args.workers, "workers")?;
    let plot: Option<PathBuf> = cfg.pick(args.plot, "plot")?;
    std::mem::take(cfg).finish()?;

    let model = model_from(gamma, lambda)?;
    let ls = match (args_l_list_explicit(l_list.as_deref(), l_ratio)?, l_list) {
        (true, Some(list)) => parse_l_list(&list)?,
        _ => {
            let parity = parity.as_deref().unwrap_or("even").parse()?;
            geometric_schedule(
                l_min.ok_or_else(|| usage("--l-min is required without --l-list"))?,
                l_max.ok_or_else(|| usage("--l-max is required without --l-list"))?,
                l_ratio.unwrap_or(1.25),
                parity,
            )?
        }
    };
    let columns = match quantities {
        Some(q) => parse_columns(&q)?,
        None => Column::ALL.to_vec(),
    };
    if plot.is_some() && out.is_none() {
        return Err(usage("--plot needs --out so the script can refer to the data file"));
    }

    let reports = with_workers(workers, || Ok(sweep_reports(&model, &ls)?))?;
    emit(out.as_deref(), &sweep_csv(&reports, &columns))?;
    if let (Some(script), Some(data)) = (plot, out) {
        emit(Some(&script), &gnuplot_script(&data, &columns))?;
    }
    Ok(())
}

/// Whether the explicit list wins; a list together with a ratio is ambiguous.
fn args_l_list_explicit(list: Option<&str>, ratio: Option<f64>) -> CliResult<bool> {
    match (list, ratio) {
        (Some(_), Some(_)) => Err(usage("give either --l-list or --l-ratio, not both")),
        (Some(_), None) => Ok(true),
        _ => Ok(false),
    }
}

/// Fit output: the fit itself plus the window it was restricted to.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub input: String,
    pub fit_window: [Option<f64>; 2],
    #[serde(flatten)]
    pub fit: ScalingFit,
}

pub fn parse_window(text: &str) -> CliResult<(Option<f64>, Option<f64>)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("fit window must be min:max, got '{text}'")))?;
    let side = |s: &str| -> CliResult<Option<f64>> {
        let s = s.trim();
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| usage(format!("bad fit window bound '{s}'")))
        }
    };
    let (lo, hi) = (side(lo)?, side(hi)?);
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            return Err(usage(format!("empty fit window {a}:{b}")));
        }
    }
    Ok((lo, hi))
}

/// `(L, value)` pairs of one column of a sweep CSV.
pub fn read_sweep_column(path: &Path, column: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| usage(format!("malformed CSV header: {e}")))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| usage(format!("CSV has no '{name}' column")))
    };
    let (li, vi) = (find("L")?, find(column)?);
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(format!("malformed CSV row {}: {e}", row + 2)))?;
        let parse = |i: usize| -> CliResult<f64> {
            let cell = record.get(i).unwrap_or("").trim();
            cell.parse()
                .map_err(|_| usage(format!("row {}: cannot parse '{cell}'", row + 2)))
        };
        points.push((parse(li)?, parse(vi)?));
    }
    Ok(points)
}

fn cmd_fit(args: FitArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let input: Option<PathBuf> = cfg.pick(args.input, "input")?;
    let quantity: Option<String> = cfg.pick(args.quantity, "quantity")?;
    let basis: Option<String> = cfg.pick(args.basis, "basis")?;
    let window: Option<String> = cfg.pick(args.fit_window, "fit-window")?;
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    std::mem::take(cfg).finish()?;

    let input = input.ok_or_else(|| usage("--input is required"))?;
    let quantity: Quantity = quantity.as_deref().unwrap_or("entropy").parse()?;
    let basis: Vec<BasisTerm> = basis
        .as_deref()
        .unwrap_or("log,const")
        .split(',')
        .map(str::parse)
        .collect::<crate::Result<_>>()?;
    let (lo, hi) = match window {
        Some(w) => parse_window(&w)?,
        None => (Some(DEFAULT_FIT_MIN), None),
    };

    let points: Vec<(f64, f64)> = read_sweep_column(&input, &quantity.to_string())?
        .into_iter()
        .filter(|(l, _)| lo.is_none_or(|a| *l >= a) && hi.is_none_or(|b| *l <= b))
        .collect();
    if points.len() < 5 {
        return Err(usage(format!(
            "need at least 5 rows inside the fit window, got {}",
            points.len()
        )));
    }
    let fit = fit_scaling(&points, &basis, quantity)?;
    let report = FitReport {
        input: input.display().to_string(),
        fit_window: [lo, hi],
        fit,
    };
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Numerical(format!("cannot serialize fit: {e}")))?;
    json.push('\n');
    emit(out.as_deref(), &json)
}

pub const OFFCRITICAL_HEADER: [&str; 12] = [
    "lambda",
    "x",
    "epsilon",
    "branch",
    "log_inv_lambda1_closed",
    "log_inv_lambda1_sum",
    "entropy_closed",
    "entropy_sum",
    "ratio",
    "log_inv_lambda1_phase",
    "entropy_phase",
    "ratio_phase",
];

pub fn offcritical_csv(gamma: f64, lambdas: &[f64]) -> crate::Result<String> {
    let mut out = OFFCRITICAL_HEADER.join(",");
    out.push('\n');
    for &lambda in lambdas {
        let point = epsilon_of(&ModelSpec::new(gamma, lambda)?)?;
        let r = closed_forms(&point)?;
        let ratio_phase = if r.entropy_phase > 0.0 {
            format_float(r.log_inv_lambda1_phase / r.entropy_phase)
        } else {
            "nan".to_string()
        };
        let cells = [
            format_float(lambda),
            format_float(point.x),
            format_float(point.epsilon),
            point.branch.to_string(),
            format_float(r.log_inv_lambda1_closed),
            format_float(r.log_inv_lambda1_sum),
            format_float(r.entropy_closed),
            format_float(r.entropy_sum),
            format_float(r.ratio),
            format_float(r.log_inv_lambda1_phase),
            format_float(r.entropy_phase),
            ratio_phase,
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn cmd_offcritical(args: OffcriticalArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let gamma: Option<f64> = cfg.pick(args.gamma, "gamma")?;
    let lambda: Option<String> = cfg.pick(args.lambda, "lambda")?;
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    std::mem::take(cfg).finish()?;

    let gamma = gamma.ok_or_else(|| usage("--gamma is required"))?;
    let lambdas: Vec<f64> = lambda
        .ok_or_else(|| usage("--lambda is required"))?
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| usage(format!("bad field value '{}'", s.trim())))
        })
        .collect::<CliResult<_>>()?;
    emit(out.as_deref(), &offcritical_csv(gamma, &lambdas)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationLine {
    pub gamma: f64,
    pub lambda: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

pub fn validate_battery(n_sites: usize) -> crate::Result<Vec<ValidationLine>> {
    VALIDATION_BATTERY
        .iter()
        .map(|&(gamma, lambda)| {
            let dev = cross_validate(&ModelSpec::new(gamma, lambda)?, n_sites)?;
            Ok(ValidationLine {
                gamma,
                lambda,
                max_deviation: dev,
                pass: dev <= VALIDATION_TOLERANCE,
            })
        })
        .collect()
}

fn cmd_validate(args: ValidateArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let n: Option<usize> = cfg.pick(args.n, "n")?;
    std::mem::take(cfg).finish()?;
    let n = n.unwrap_or(12);
    if n < 2 {
        return Err(usage(format!("validate needs N >= 2, got {n}")));
    }

    let lines = validate_battery(n)?;
    let mut text = String::new();
    for l in &lines {
        writeln!(
            text,
            "gamma={} lambda={} N={n} max_deviation={:.3e} {}",
            l.gamma,
            l.lambda,
            l.max_deviation,
            if l.pass { "PASS" } else { "FAIL" }
        )
        .expect("write to string");
    }
    emit(None, &text)?;
    if lines.iter().all(|l| l.pass) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "deviation above {VALIDATION_TOLERANCE:e}"
        )))
    }
}

fn cmd_integrals(args: IntegralsArgs, cfg: &mut ConfigFile) -> CliResult<()> {
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    std::mem::take(cfg).finish()?;

    #[derive(Serialize)]
    struct IntegralsReport {
        i_entropy: f64,
        i_single: f64,
        quotient: f64,
        abs_error: f64,
    }
    let fh = fisher_hartwig_integrals()?;
    let r = IntegralsReport {
        i_entropy: fh.i_entropy,
        i_single: fh.i_single,
        quotient: fh.i_entropy / fh.i_single,
        abs_error: fh.abs_error,
    };
    let mut json = serde_json::to_string_pretty(&r)
        .map_err(|e| CliError::Numerical(format!("cannot serialize: {e}")))?;
    json.push('\n');
    emit(out.as_deref(), &json)
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Sweep(a) => cmd_sweep(a, &mut cfg),
        Command::Fit(a) => cmd_fit(a, &mut cfg),
        Command::Offcritical(a) => cmd_offcritical(a, &mut cfg),
        Command::Validate(a) => cmd_validate(a, &mut cfg),
        Command::Integrals(a) => cmd_integrals(a, &mut cfg),
    }
}

/// Parses `std::env::args`, runs the command, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedules() {
        let ls = geometric_schedule(10, 1000, 1.25, LParity::Any).unwrap();
        assert_eq!(ls[0], 10);
        assert_eq!(*ls.last().unwrap(), 1000);
        assert!(ls.windows(2).all(|w| w[0] < w[1]));
        assert!((20..=24).contains(&ls.len()), "{}", ls.len());

        let even = geometric_schedule(50, 1000, 1.25, LParity::Even).unwrap();
        assert!(even.iter().all(|l| l % 2 == 0));
        assert_eq!((even[0], *even.last().unwrap()), (50, 1000));

        let odd = geometric_schedule(50, 1000, 1.25, LParity::Odd).unwrap();
        assert!(odd.iter().all(|l| l % 2 == 1));
        assert_eq!(*odd.last().unwrap(), 999);

        assert_eq!(geometric_schedule(7, 7, 2.0, LParity::Any).unwrap(), vec![7]);
        assert!(geometric_schedule(10, 5, 1.25, LParity::Any).is_err());
        assert!(geometric_schedule(10, 50, 1.0, LParity::Any).is_err());
        assert!(geometric_schedule(0, 50, 1.5, LParity::Any).is_err());
    }

    #[test]
    fn l_lists() {
        assert_eq!(parse_l_list("1, 2,10").unwrap(), vec![1, 2, 10]);
        assert!(parse_l_list("3,2").is_err());
        assert!(parse_l_list("0,2").is_err());
        assert!(parse_l_list("a").is_err());
    }

    #[test]
    fn config_file_parsing() {
        let mut cfg = ConfigFile::parse("# sweep\ngamma = 1\nl_max=40\n\nout = a.csv\n").unwrap();
        assert_eq!(cfg.pick::<f64>(None, "gamma").unwrap(), Some(1.0));
        assert_eq!(cfg.pick(Some(80usize), "l-max").unwrap(), Some(80));
        assert!(std::mem::take(&mut cfg).finish().is_err());
        assert!(ConfigFile::parse("novalue").is_err());
        let mut bad = ConfigFile::parse("gamma = x").unwrap();
        assert!(bad.get::<f64>("gamma").is_err());
    }

    #[test]
    fn columns_follow_header_order() {
        let cols = parse_columns("lambda1, entropy").unwrap();
        assert_eq!(cols, vec![Column::Entropy, Column::Lambda1]);
        assert!(parse_columns("purity").is_err());
        let names: Vec<_> = Column::ALL.iter().map(|c| c.name()).collect();
        assert_eq!(names, &CSV_HEADER[1..]);
    }

    #[test]
    fn floats_round_trip() {
        for x in [std::f64::consts::LN_2, 1e-300, 0.1, 123456.789, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn windows() {
        assert_eq!(parse_window("20:").unwrap(), (Some(20.0), None));
        assert_eq!(parse_window(":100").unwrap(), (None, Some(100.0)));
        assert!(parse_window("5").is_err());
        assert!(parse_window("9:3").is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(Error::SingularDesign).exit_code(), 1);
        assert_eq!(
            CliError::from(Error::SizeLimit { n: 13, max: 12 }).exit_code(),
            2
        );
        assert_eq!(CliError::from(Error::ZeroAnisotropy).exit_code(), 2);
    }
}
