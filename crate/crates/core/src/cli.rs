//! Command-line front end: `points`, `transform`, `polar`, `ungm`, `reentry`.
//!
//! Configuration comes from flags, optionally preceded by a plain
//! `key = value` file given with `--config`; flags on the command line win.
//! Output goes to `--out`, else to `$GPQUAD_OUTPUT_DIR/<subcommand>.csv`,
//! else to stdout.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};

use crate::benchmarks::models::{
    reentry_discrete_dynamics, reentry_range, ungm_dynamics, ungm_observation,
};
use crate::benchmarks::polar::{polar_experiment, PolarConfig};
use crate::benchmarks::reentry::reentry_benchmark;
use crate::benchmarks::ungm::{ungm_benchmark, ungm_default_specs, ungm_full_specs};
use crate::benchmarks::{BenchmarkReport, FilterSpec, ReentryConfig, UngmConfig};
use crate::error::Error;
use crate::gpq::{GpqTransform, RbfKernelParams};
use crate::sigma_points::{Rule, UnitPointSet};
use crate::transform::{
    mc_transform, ClassicalTransform, GaussianDensity, MomentTransform,
    MomentTransformResult, VectorFunction,
};

pub const OUTPUT_DIR_ENV: &str = "GPQUAD_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gpquad",
    version,
    about = "Gaussian process quadrature moment transforms and sigma-point filter benchmarks",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Master random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path (default: $GPQUAD_OUTPUT_DIR/<subcommand>.csv, else stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent runs (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// key = value file with default flag values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Ut,
    UtScaled,
    Sr,
    Gh,
}

#[derive(Debug, Args, Clone)]
pub struct RuleArgs {
    /// Quadrature rule
    #[arg(long, value_enum, default_value_t = RuleArg::Ut)]
    pub rule: RuleArg,
    /// UT kappa
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Gauss-Hermite order
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Scaled-UT spread alpha
    #[arg(long, default_value_t = 1.0)]
    pub ut_alpha: f64,
    /// Scaled-UT beta
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub ut_beta: f64,
}

impl RuleArgs {
    pub fn rule(&self) -> Rule {
        match self.rule {
            RuleArg::Ut => Rule::Unscented { kappa: self.kappa },
            RuleArg::UtScaled => Rule::ScaledUnscented {
                kappa: self.kappa,
                alpha: self.ut_alpha,
                beta: self.ut_beta,
            },
            RuleArg::Sr => Rule::SphericalRadial,
            RuleArg::Gh => Rule::GaussHermite { order: self.order },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FuncArg {
    Polar,
    UngmDyn,
    UngmObs,
    ReentryDyn,
    ReentryObs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Classical,
    Gpq,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a unit sigma-point set as CSV (index, xi_1..xi_D, w_mean, w_cov)
    Points {
        #[command(flatten)]
        rule: RuleArgs,
        /// Input dimension
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Push a Gaussian through a benchmark nonlinearity (quantity, row, col, value)
    Transform {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, value_enum)]
        func: FuncArg,
        /// Input mean, comma separated
        #[arg(long, allow_hyphen_values = true)]
        mean: String,
        /// Input covariance: D diagonal entries or D*D row-major entries (',' or ';')
        #[arg(long, allow_hyphen_values = true)]
        cov: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Classical)]
        method: MethodArg,
        /// GPQ kernel scaling
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// GPQ lengthscales, comma separated (one value is broadcast)
        #[arg(long, default_value = "1")]
        lengthscale: String,
        /// Monte Carlo sample count
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Time index for time-varying dynamics
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Polar-to-Cartesian SKL grid (position_index, sigma_theta_deg, transform, skl)
    Polar {
        /// Spiral positions
        #[arg(long, default_value_t = 10)]
        positions: usize,
        /// Azimuth deviations per position
        #[arg(long, default_value_t = 10)]
        sigmas: usize,
        /// Range standard deviation [m] (benchmark setting)
        #[arg(long, default_value_t = 0.5)]
        sigma_r: f64,
        /// Smallest azimuth standard deviation [deg] (benchmark setting)
        #[arg(long, default_value_t = 6.0)]
        sigma_theta_min: f64,
        /// Largest azimuth standard deviation [deg] (benchmark setting)
        #[arg(long, default_value_t = 36.0)]
        sigma_theta_max: f64,
        /// GPQ scaling (benchmark setting)
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// GPQ lengthscales for (range, azimuth) (benchmark setting)
        #[arg(long, default_value = "60,6")]
        lengthscale: String,
        /// Monte Carlo samples for the reference moments (benchmark setting)
        #[arg(long, default_value_t = 10_000)]
        mc_samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// UNGM filtering benchmark, per-run metrics (run, filter, rmse, nll, nci)
    Ungm {
        /// Monte Carlo runs (benchmark setting: 100; desk default 25)
        #[arg(long, default_value_t = 25, value_parser = at_least_two_runs)]
        runs: usize,
        /// Time steps per run (benchmark setting)
        #[arg(long, default_value_t = 500)]
        steps: usize,
        /// Use the full 100-run ensemble
        #[arg(long)]
        full_scale: bool,
        /// Compare every rule pair (UT, SR, GH-5/7/10/15/20) instead of UKF vs GPQKF-UT
        #[arg(long)]
        all_filters: bool,
        /// Observe x_k instead of x_{k-1}
        #[arg(long)]
        observe_current_state: bool,
        /// Per-step curves CSV (t, filter, component, rmse, nu)
        #[arg(long)]
        curves: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Reentry tracking benchmark, per-run metrics (run, filter, rmse, nll, nci)
    Reentry {
        /// Monte Carlo runs (benchmark setting: 100; desk default 20)
        #[arg(long, default_value_t = 20, value_parser = at_least_two_runs)]
        runs: usize,
        /// Use the full 100-run ensemble
        #[arg(long)]
        full_scale: bool,
        /// Simulated time [s] (benchmark setting)
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
        /// Filter step and measurement period [s] (benchmark setting)
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Process noise variance on altitude [km^2]
        #[arg(long, default_value_t = 1e-10)]
        q_position: f64,
        /// Process noise variance on velocity [km^2/s^2]
        #[arg(long, default_value_t = 1e-10)]
        q_velocity: f64,
        /// Process noise variance on the ballistic parameter
        #[arg(long, default_value_t = 1e-8)]
        q_ballistic: f64,
        /// GPQ scaling for the dynamics (benchmark setting)
        #[arg(long, default_value_t = 0.5)]
        alpha_dyn: f64,
        /// GPQ lengthscales for the dynamics (benchmark setting)
        #[arg(long, default_value = "10,10,10")]
        lengthscale_dyn: String,
        /// GPQ scaling for the range measurement (benchmark setting)
        #[arg(long, default_value_t = 0.5)]
        alpha_obs: f64,
        /// GPQ lengthscales for the range measurement (benchmark setting)
        #[arg(long, default_value = "15,20,20")]
        lengthscale_obs: String,
        /// Per-step curves CSV (t, filter, component, rmse, nu)
        #[arg(long)]
        curves: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Points { .. } => "points",
            Command::Transform { .. } => "transform",
            Command::Polar { .. } => "polar",
            Command::Ungm { .. } => "ungm",
            Command::Reentry { .. } => "reentry",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Points { common, .. }
            | Command::Transform { common, .. }
            | Command::Polar { common, .. }
            | Command::Ungm { common, .. }
            | Command::Reentry { common, .. } => common,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

/// Formats with 12 significant digits, plain decimal where reasonable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split([',', ';'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: '{t}'")))
        })
        .collect()
}

fn parse_density(mean: &str, cov: &str) -> Result<GaussianDensity, CliError> {
    let m = parse_list(mean)?;
    let c = parse_list(cov)?;
    let d = m.len();
    let cov = if c.len() == d {
        DMatrix::from_diagonal(&DVector::from_vec(c))
    } else if c.len() == d * d {
        DMatrix::from_row_slice(d, d, &c)
    } else {
        return Err(CliError::Usage(format!(
            "covariance needs {d} or {} entries, got {}",
            d * d,
            c.len()
        )));
    };
    Ok(GaussianDensity::new(DVector::from_vec(m), cov)?)
}

fn kernel(alpha: f64, lengthscale: &str) -> Result<RbfKernelParams, CliError> {
    Ok(RbfKernelParams::new(alpha, parse_list(lengthscale)?)?)
}

/// Expands `--config` files into flags placed right after the subcommand.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].split_once('=') {
        Some((_, p)) => p.to_string(),
        None => argv
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| CliError::Usage("--config needs a path".into()))?,
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config '{path}': {e}")))?;
    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{path}:{}: expected key = value", n + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        match value.trim() {
            "true" => injected.push(format!("--{key}")),
            "false" => {}
            v => {
                injected.push(format!("--{key}"));
                injected.push(v.to_string());
            }
        }
    }
    let sub = argv
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(1, |i| i + 2);
    let mut out = argv[..sub.min(argv.len())].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[sub.min(argv.len())..]);
    Ok(out)
}

fn destination(common: &Common, name: &str) -> Option<PathBuf> {
    common.out.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|dir| Path::new(&dir).join(format!("{name}.csv")))
    })
}

fn emit(path: Option<&Path>, csv: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, csv)
            .map_err(|e| CliError::Usage(format!("cannot write '{}': {e}", p.display()))),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}"))),
    }
}

pub fn points_csv(set: &UnitPointSet) -> String {
    let mut s = String::from("index");
    for d in 1..=set.dim() {
        write!(s, ",xi_{d}").unwrap();
    }
    s.push_str(",w_mean,w_cov\n");
    for i in 0..set.len() {
        write!(s, "{i}").unwrap();
        for d in 0..set.dim() {
            write!(s, ",{}", fmt_num(set.points[(d, i)])).unwrap();
        }
        writeln!(
            s,
            ",{},{}",
            fmt_num(set.mean_weights[i]),
            fmt_num(set.cov_weights[i])
        )
        .unwrap();
    }
    s
}

pub fn transform_csv(r: &MomentTransformResult) -> String {
    let mut s = String::from("quantity,row,col,value\n");
    for (i, v) in r.out_mean.iter().enumerate() {
        writeln!(s, "mean,{i},0,{}", fmt_num(*v)).unwrap();
    }
    for (name, m) in [("cov", &r.out_cov), ("cross_cov", &r.cross_cov)] {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                writeln!(s, "{name},{i},{j},{}", fmt_num(m[(i, j)])).unwrap();
            }
        }
    }
    if let Some(v) = r.extra.sigma_bar_sq {
        writeln!(s, "sigma_bar_sq,0,0,{}", fmt_num(v)).unwrap();
    }
    s
}

fn at_least_two_runs(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("not a count: '{s}'"))?;
    if n < 2 {
        return Err("ensemble metrics need at least 2 runs".into());
    }
    Ok(n)
}

pub fn runs_csv(report: &BenchmarkReport) -> String {
    let mut s = String::from("run,filter,rmse,nll,nci\n");
    for r in &report.runs {
        writeln!(
            s,
            "{},{},{},{},{}",
            r.run,
            r.filter,
            fmt_num(r.rmse),
            fmt_num(r.nll),
            fmt_num(r.nci)
        )
        .unwrap();
    }
    s
}

pub fn curves_csv(report: &BenchmarkReport) -> String {
    let mut s = String::from("t,filter,component,rmse,nu\n");
    for c in &report.curves {
        writeln!(
            s,
            "{},{},{},{},{}",
            fmt_num(c.time),
            c.filter,
            c.component,
            fmt_num(c.rmse),
            fmt_num(c.nu)
        )
        .unwrap();
    }
    s
}

fn print_summary(report: &BenchmarkReport) {
    for s in &report.summary {
        eprintln!(
            "{}: rmse {} ± {}, nll {} ± {}, nci {} ± {}",
            s.filter,
            fmt_num(s.rmse.mean),
            fmt_num(s.rmse.band),
            fmt_num(s.nll.mean),
            fmt_num(s.nll.band),
            fmt_num(s.nci.mean),
            fmt_num(s.nci.band)
        );
    }
}

struct Func {
    d: usize,
    e: usize,
    kind: FuncArg,
    step: usize,
}

impl VectorFunction for Func {
    fn input_dim(&self) -> usize {
        self.d
    }

    fn output_dim(&self) -> usize {
        self.e
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let defaults = ReentryConfig::default();
        match self.kind {
            FuncArg::Polar => crate::benchmarks::polar2cartesian(x),
            FuncArg::UngmDyn => DVector::from_element(1, ungm_dynamics(x[0], self.step)),
            FuncArg::UngmObs => DVector::from_element(1, ungm_observation(x[0])),
            FuncArg::ReentryDyn => {
                reentry_discrete_dynamics(x, defaults.dt, defaults.gamma, &DVector::zeros(3))
            }
            FuncArg::ReentryObs => DVector::from_element(1, reentry_range(x, defaults.radar)),
        }
    }
}

fn func(kind: FuncArg, step: usize) -> Func {
    let (d, e) = match kind {
        FuncArg::Polar => (2, 2),
        FuncArg::UngmDyn | FuncArg::UngmObs => (1, 1),
        FuncArg::ReentryDyn => (3, 3),
        FuncArg::ReentryObs => (3, 1),
    };
    Func { d, e, kind, step }
}

fn run_command(cmd: &Command) -> Result<(), CliError> {
    let common = cmd.common();
    let out = destination(common, cmd.name());
    match cmd {
        Command::Points { rule, dim, .. } => {
            let set = rule.rule().points(*dim)?;
            emit(out.as_deref(), &points_csv(&set))
        }
        Command::Transform {
            rule,
            func: kind,
            mean,
            cov,
            method,
            alpha,
            lengthscale,
            samples,
            step,
            ..
        } => {
            let input = parse_density(mean, cov)?;
            let g = func(*kind, *step);
            let result = match method {
                MethodArg::Mc => mc_transform(&g, &input, *samples, common.seed)?,
                MethodArg::Classical => {
                    ClassicalTransform::new(rule.rule().points(input.dim())?).apply(&g, &input)?
                }
                MethodArg::Gpq => {
                    let pts = rule.rule().points(input.dim())?;
                    GpqTransform::new(&pts, &kernel(*alpha, lengthscale)?)?.apply(&g, &input)?
                }
            };
            emit(out.as_deref(), &transform_csv(&result))
        }
        Command::Polar {
            positions,
            sigmas,
            sigma_r,
            sigma_theta_min,
            sigma_theta_max,
            alpha,
            lengthscale,
            mc_samples,
            ..
        } => {
            let config = PolarConfig {
                n_positions: *positions,
                n_sigmas: *sigmas,
                sigma_r: *sigma_r,
                sigma_theta_deg: (*sigma_theta_min, *sigma_theta_max),
                lengthscales: parse_list(lengthscale)?,
                alpha: *alpha,
                mc_samples: *mc_samples,
                seed: common.seed,
            };
            let report = polar_experiment(&config)?;
            let mut s = String::from("position_index,sigma_theta_deg,transform,skl\n");
            for c in &report.cells {
                writeln!(
                    s,
                    "{},{},{},{}",
                    c.position_index,
                    fmt_num(c.sigma_theta_deg),
                    c.transform,
                    fmt_num(c.skl)
                )
                .unwrap();
            }
            for t in &report.transforms {
                eprintln!("{t}: mean SKL {}", fmt_num(report.overall_mean(t)));
            }
            emit(out.as_deref(), &s)
        }
        Command::Ungm {
            runs,
            steps,
            full_scale,
            all_filters,
            observe_current_state,
            curves,
            ..
        } => {
            let config = UngmConfig {
                steps: *steps,
                n_runs: if *full_scale { 100 } else { *runs },
                observe_previous_state: !observe_current_state,
                seed: common.seed,
                ..UngmConfig::default()
            };
            let specs = if *all_filters {
                ungm_full_specs()
            } else {
                ungm_default_specs()
            };
            let report = ungm_benchmark(&config, &specs)?;
            finish_benchmark(&report, out.as_deref(), curves.clone(), "ungm")
        }
        Command::Reentry {
            runs,
            full_scale,
            duration,
            dt,
            q_position,
            q_velocity,
            q_ballistic,
            alpha_dyn,
            lengthscale_dyn,
            alpha_obs,
            lengthscale_obs,
            curves,
            ..
        } => {
            let config = ReentryConfig {
                n_runs: if *full_scale { 100 } else { *runs },
                duration: *duration,
                dt: *dt,
                process_noise_var: [*q_position, *q_velocity, *q_ballistic],
                seed: common.seed,
                ..ReentryConfig::default()
            };
            let specs = vec![
                FilterSpec::classical(
                    "UKF",
                    Rule::ScaledUnscented {
                        kappa: 0.0,
                        alpha: 1.0,
                        beta: 2.0,
                    },
                ),
                FilterSpec::gpq(
                    "GPQKF-UT",
                    Rule::Unscented { kappa: 0.0 },
                    kernel(*alpha_dyn, lengthscale_dyn)?,
                    kernel(*alpha_obs, lengthscale_obs)?,
                ),
            ];
            let report = reentry_benchmark(&config, &specs)?;
            finish_benchmark(&report, out.as_deref(), curves.clone(), "reentry")
        }
    }
}

fn finish_benchmark(
    report: &BenchmarkReport,
    out: Option<&Path>,
    curves: Option<PathBuf>,
    name: &str,
) -> Result<(), CliError> {
    print_summary(report);
    emit(out, &runs_csv(report))?;
    let curves = curves.or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|d| Path::new(&d).join(format!("{name}_curves.csv")))
    });
    if let Some(path) = curves {
        emit(Some(&path), &curves_csv(report))?;
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn parse_and_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => return report_error(e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{e}");
                return EXIT_USAGE;
            }
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    let jobs = cli.command.common().jobs;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => return report_error(CliError::Usage(format!("cannot start worker pool: {e}"))),
    };
    match pool.install(|| run_command(&cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(e),
    }
}

fn report_error(e: CliError) -> i32 {
    match e {
        CliError::Usage(m) => {
            eprintln!("gpquad: {m}");
            EXIT_USAGE
        }
        CliError::Numerical(m) => {
            eprintln!("gpquad: numerical failure: {m}");
            EXIT_NUMERICAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2f64.sqrt() * 1000.0), "1414.21356237");
        assert_eq!(fmt_num(1e-10), "1e-10");
        assert_eq!(fmt_num(1.23456789012345e-7), "1.23456789012e-7");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(100.0), "100");
    }

    #[test]
    fn list_and_density_parsing() {
        assert_eq!(parse_list("1, 2;3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_list("1,x").is_err());
        let g = parse_density("1,0", "0.25,0.01").unwrap();
        assert_eq!(g.cov[(1, 1)], 0.01);
        let g = parse_density("0,0", "2,1;1,2").unwrap();
        assert_eq!(g.cov[(0, 1)], 1.0);
        assert!(parse_density("0,0", "1,2,3").is_err());
    }

    #[test]
    fn config_lines_are_injected_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        fs::write(&p, "# comment\nruns = 3\nsteps=10\nall_filters = true\nfull-scale = false\n").unwrap();
        let argv: Vec<String> = ["gpquad", "ungm", "--config", p.to_str().unwrap(), "--runs", "4"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = expand_config(argv).unwrap();
        assert_eq!(&out[..2], &["gpquad", "ungm"]);
        assert_eq!(&out[2..7], &["--runs", "3", "--steps", "10", "--all-filters"]);
        let cli = Cli::try_parse_from(&out).unwrap();
        match cli.command {
            Command::Ungm { runs, steps, .. } => assert_eq!((runs, steps), (4, 10)),
            _ => unreachable!(),
        }
    }
}
