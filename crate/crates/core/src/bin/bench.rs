//! Command-line experiment runner.
//!
//! Exit status: 0 when every run converged, 1 when some run failed, 2 on
//! usage or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use aadfpm::bench::{
    emit_profile, emit_rows, format_residual, format_sig6, parse_solver_list, performance_profile,
    run_experiment, DataSource, ExperimentSpec, Metric, OutputFormat, ProblemSelector, ResultRow,
    StartPoint,
};
use aadfpm::{AaParams, Error};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bench", version, about = "Run solver comparison sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem family from random starts with several solvers.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem id 1-4, or `logistic`.
    #[arg(long)]
    problem: String,
    /// Comma-separated dimensions (benchmark problems only).
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,50000,100000")]
    n: Vec<usize>,
    /// Comma-separated solvers, e.g. `httcgp,aa-httcgp`, or `all`.
    #[arg(long, default_value = "all")]
    solvers: String,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// LIBSVM file for the logistic problem.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Synthetic logistic data as `M,n`, e.g. `2000,100`.
    #[arg(long, conflicts_with = "dataset")]
    synth: Option<String>,
    #[arg(long, default_value_t = 0)]
    synth_seed: u64,
    /// Logistic starting point: `random` or `zero`.
    #[arg(long, default_value = "random")]
    start: String,
    /// Parameter override `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Build a performance profile on `iter`, `nf` or `tcpu`.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, requires = "profile")]
    profile_out: Option<PathBuf>,
}

fn parse_synth(s: &str, seed: u64) -> Result<DataSource, Error> {
    let bad = || Error::InvalidArgument(format!("bad --synth value {s:?}, expected M,n"));
    let (m, n) = s.split_once(['x', 'X', ',']).ok_or_else(bad)?;
    Ok(DataSource::Synth {
        m: m.trim().parse().map_err(|_| bad())?,
        n: n.trim().parse().map_err(|_| bad())?,
        seed,
    })
}

fn build_spec(args: &RunArgs) -> Result<ExperimentSpec, Error> {
    let solvers = parse_solver_list(&args.solvers)?;
    let problem = if args.problem.eq_ignore_ascii_case("logistic") {
        let source = match (&args.dataset, &args.synth) {
            (Some(path), _) => DataSource::File(path.clone()),
            (None, Some(s)) => parse_synth(s, args.synth_seed)?,
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "logistic needs --dataset or --synth".into(),
                ))
            }
        };
        let start = match args.start.to_ascii_lowercase().as_str() {
            "zero" => StartPoint::Zero,
            "random" => StartPoint::Random,
            other => return Err(Error::InvalidArgument(format!("unknown start {other:?}"))),
        };
        ProblemSelector::Logistic {
            source,
            tau: 0.01,
            start,
        }
    } else {
        let id = args
            .problem
            .trim_start_matches(['p', 'P'])
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("unknown problem {:?}", args.problem)))?;
        ProblemSelector::Benchmark {
            id,
            dims: args.n.clone(),
        }
    };
    let mut spec = ExperimentSpec::benchmark(1, vec![1], solvers);
    spec.problem = problem;
    spec.repeats = args.repeats;
    spec.seed = args.seed;
    spec.config.epsilon = args.tol;
    spec.config.max_iter = args.max_iter;
    spec.aa = AaParams::with_tolerance(args.tol);
    for item in &args.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("override {item:?} is not key=value")))?;
        spec.set(key, value)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn print_table(rows: &[ResultRow]) {
    println!(
        "{:<12} {:>8} {:<11} {:>10} {:>10} {:>10} {:>10} {:>8} {:>5}",
        "problem", "n", "solver", "iter", "nf", "tcpu", "residual", "aa", "fail"
    );
    for r in rows {
        println!(
            "{:<12} {:>8} {:<11} {:>10} {:>10} {:>10} {:>10} {:>8} {:>5}",
            r.problem,
            r.n,
            r.solver,
            format_sig6(r.mean_iter),
            format_sig6(r.mean_nf),
            format_sig6(r.mean_tcpu_seconds),
            format_residual(r.mean_final_residual),
            format_sig6(r.mean_aa_steps),
            r.failures
        );
    }
}

fn run(args: RunArgs) -> Result<bool, Error> {
    let format: OutputFormat = args.format.parse()?;
    let metric: Option<Metric> = args.profile.as_deref().map(str::parse).transpose()?;
    let spec = build_spec(&args)?;
    let rows = run_experiment(&spec)?;
    print_table(&rows);
    if let Some(path) = &args.out {
        emit_rows(&rows, format, path)?;
    }
    if let Some(metric) = metric {
        let profile = performance_profile(&rows, metric)?;
        match &args.profile_out {
            Some(path) => emit_profile(&profile, format, path)?,
            None => {
                for c in &profile.curves {
                    let at_one = profile.rho_at(&c.solver, 1.0).unwrap_or(0.0);
                    println!("profile {}: {} best on {}", metric.name(), c.solver, format_sig6(at_one));
                }
            }
        }
    }
    Ok(rows.iter().all(|r| r.failures == 0))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
