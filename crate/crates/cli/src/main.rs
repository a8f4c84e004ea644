//! Command-line front end: panel estimation, the lognormal test case, the
//! synthetic panel generator and the consistency experiment.
//!
//! Exit codes: 0 success, 1 input error, 2 numeric failure. Log verbosity is
//! read from `LOCALDEP_LOG` (env_logger syntax, default `warn`).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use localdep::pipeline::{
    emit_series, read_panel, run_expanding, simulate_panel, LevelPair, RunManifest, RunOptions,
    SyntheticPanelConfig, WindowPlan,
};
use localdep::simulation::{
    consistency_experiment, run_test_case, ConsistencyConfig, TestCaseConfig,
};
use localdep::{Error, Execution, QuantileLevels, ReferenceKind};

#[derive(Parser, Debug)]
#[command(
    name = "localdep",
    version,
    about = "Local copula-based dependence measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expanding-window estimation over a return panel.
    Estimate(EstimateArgs),
    /// Lognormal test case sweep over the second volatility.
    Testcase(TestcaseArgs),
    /// Writes a seeded synthetic 5-minute panel.
    SimulatePanel(SimulateArgs),
    /// Monte Carlo RMSE of the estimated tail level across sample sizes.
    Consistency(ConsistencyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PanelCopula {
    Gaussian,
    Comonotone,
    Independence,
    Countermonotone,
}

impl From<PanelCopula> for ReferenceKind {
    fn from(c: PanelCopula) -> Self {
        match c {
            PanelCopula::Gaussian => ReferenceKind::Gaussian,
            PanelCopula::Comonotone => ReferenceKind::Comonotone,
            PanelCopula::Independence => ReferenceKind::Independence,
            PanelCopula::Countermonotone => ReferenceKind::Countermonotone,
        }
    }
}

#[derive(clap::Args, Debug)]
struct EstimateArgs {
    /// Panel CSV: `timestamp,market,<assets…>`.
    #[arg(long)]
    panel: PathBuf,
    #[arg(long, default_value_t = 30)]
    burn_in_days: usize,
    /// Lower-tail levels p; each is paired with 1-p.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1, 0.5])]
    levels: Vec<f64>,
    /// Bar size to estimate at; coarser than the input is compounded.
    #[arg(long, default_value_t = 5, value_parser = bar_minutes)]
    bar_minutes: u32,
    /// Bar size of the input panel.
    #[arg(long, default_value_t = 5, value_parser = bar_minutes)]
    input_bar_minutes: u32,
    /// Output series CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    baseline: Switch,
    /// Bars between estimates.
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Optional JSON run manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Seed that generated the panel, recorded in the manifest.
    #[arg(long)]
    seed: Option<u64>,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
}

#[derive(clap::Args, Debug)]
struct TestcaseArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 0.95)]
    rho: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma1: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma2_from: f64,
    #[arg(long, default_value_t = 2.0)]
    sigma2_to: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma2_step: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 40)]
    assets: usize,
    #[arg(long, default_value_t = 36)]
    days: usize,
    #[arg(long, value_enum, default_value_t = PanelCopula::Gaussian)]
    copula: PanelCopula,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Bar-return standard deviation.
    #[arg(long, default_value_t = 1e-3)]
    volatility: f64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct ConsistencyArgs {
    #[arg(long, value_enum, default_value_t = PanelCopula::Gaussian)]
    copula: PanelCopula,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Sample sizes, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [500, 2000, 8000])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    replications: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn bar_minutes(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(m) if localdep::pipeline::BAR_MINUTES.contains(&m) => Ok(m),
        _ => Err(format!(
            "expected one of {:?}",
            localdep::pipeline::BAR_MINUTES
        )),
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_numeric() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", p.display()),
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let bytes = std::fs::read(&args.panel).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", args.panel.display()),
    })?;
    let panel =
        read_panel(bytes.as_slice(), args.input_bar_minutes)?.aggregate(args.bar_minutes)?;
    let pairs = args
        .levels
        .iter()
        .map(|&p| LevelPair::symmetric(p))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = WindowPlan {
        burn_in_days: args.burn_in_days,
        step: args.step,
    };
    let options = RunOptions {
        baseline: args.baseline == Switch::On,
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        },
    };
    log::info!(
        "{} assets, {} bars of {} minutes, {} level pairs",
        panel.n_assets(),
        panel.n_bars(),
        panel.bar_minutes(),
        pairs.len()
    );
    let series = run_expanding(&panel, plan, &pairs, options)?;
    emit_series(&series, &args.out)?;
    if let Some(path) = &args.manifest {
        RunManifest::new(&series, &bytes, args.seed).write(path)?;
    }
    Ok(())
}

fn testcase(args: TestcaseArgs) -> Result<(), Failure> {
    if !(args.sigma2_step > 0.0) {
        return Err(Error::InvalidParameter("sigma2 step must be positive".into()).into());
    }
    let steps = ((args.sigma2_to - args.sigma2_from) / args.sigma2_step + 1e-9).floor();
    if !(steps >= 0.0) {
        return Err(Error::InvalidParameter("sigma2 range is empty".into()).into());
    }
    let config = TestCaseConfig {
        n: args.n,
        rho: args.rho,
        sigma1: args.sigma1,
        sigma2_grid: (0..=steps as usize)
            .map(|i| ((args.sigma2_from + i as f64 * args.sigma2_step) * 1e12).round() / 1e12)
            .collect(),
        levels: QuantileLevels::new(args.alpha, args.beta)?,
        seed: args.seed,
    };
    let result = run_test_case(&config)?;
    result.write_csv(output(args.out.as_deref())?)?;
    for (name, r) in [
        ("iota_L", &result.iota_regression),
        ("delta_L", &result.delta_regression),
    ] {
        eprintln!(
            "{name} on sigma2: slope {:.6} (robust se {:.6}, p = {:.4})",
            r.slope, r.slope_se, r.p_value
        );
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let panel = simulate_panel(&SyntheticPanelConfig {
        assets: args.assets,
        days: args.days,
        copula: args.copula.into(),
        rho: args.rho,
        rho_by_day: None,
        volatility: args.volatility,
        seed: args.seed,
    })?;
    panel.write_csv(output(args.out.as_deref())?)?;
    Ok(())
}

fn consistency(args: ConsistencyArgs) -> Result<(), Failure> {
    let config = ConsistencyConfig {
        kind: args.copula.into(),
        rho: args.rho,
        levels: QuantileLevels::new(args.alpha, args.beta)?,
        n_grid: args.n,
        replications: args.replications,
        seed: args.seed,
    };
    let table = consistency_experiment(&config, Execution::default())?;
    table.write_csv(output(args.out.as_deref())?)?;
    eprintln!(
        "omega = {}, iota = {}, successive RMSE ratios {:?}",
        table.omega_true,
        table.iota_true,
        table.rmse_ratios()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LOCALDEP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Testcase(a) => testcase(a),
        Command::SimulatePanel(a) => simulate(a),
        Command::Consistency(a) => consistency(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
