//! Experiment runner: random-start sweeps over problems and solvers,
//! Dolan–Moré performance profiles, and CSV/JSON output.

mod emit;
mod profile;

pub use emit::{
    emit_profile, emit_rows, format_residual, format_sig6, profile_to_csv, profile_to_json,
    rows_to_csv, rows_to_json, OutputFormat, RESULT_HEADER,
};
pub use profile::{performance_profile, Metric, PerformanceProfile, ProfileCurve};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::distributions::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anderson::{solve_aa_dfpm, AaParams};
use crate::dfpm::{solve_dfpm, ProblemDef, SolveReport, SolverConfig};
use crate::directions::{DirectionRule, HttcgpParams, MsttcgpParams, ScgpParams};
use crate::error::{invalid, Result};
use crate::problems::{make_problem, read_libsvm, synth_dataset, LogisticProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    Scgp,
    Httcgp,
    Msttcgp,
}

/// A direction rule, optionally with Anderson acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolverTag {
    pub rule: RuleKind,
    pub accelerated: bool,
}

impl SolverTag {
    /// The six solvers in table order.
    pub fn all() -> Vec<SolverTag> {
        let mut out = Vec::with_capacity(6);
        for rule in [RuleKind::Msttcgp, RuleKind::Httcgp, RuleKind::Scgp] {
            for accelerated in [false, true] {
                out.push(SolverTag { rule, accelerated });
            }
        }
        out
    }

    pub fn plain(rule: RuleKind) -> Self {
        Self {
            rule,
            accelerated: false,
        }
    }

    pub fn aa(rule: RuleKind) -> Self {
        Self {
            rule,
            accelerated: true,
        }
    }
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.rule {
            RuleKind::Scgp => "SCGP",
            RuleKind::Httcgp => "HTTCGP",
            RuleKind::Msttcgp => "MSTTCGP",
        };
        if self.accelerated {
            write!(f, "AA-{name}")
        } else {
            f.write_str(name)
        }
    }
}

impl FromStr for SolverTag {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (accelerated, base) = match lower.strip_prefix("aa-") {
            Some(rest) => (true, rest),
            None => (false, lower.as_str()),
        };
        let rule = match base {
            "scgp" => RuleKind::Scgp,
            "httcgp" => RuleKind::Httcgp,
            "msttcgp" => RuleKind::Msttcgp,
            _ => return Err(invalid(format!("unknown solver {s:?}"))),
        };
        Ok(SolverTag { rule, accelerated })
    }
}

/// Parses a comma-separated solver list; `all` expands to the six solvers.
pub fn parse_solver_list(s: &str) -> Result<Vec<SolverTag>> {
    let mut out = Vec::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        if item.trim().eq_ignore_ascii_case("all") {
            out.extend(SolverTag::all());
        } else {
            out.push(item.parse()?);
        }
    }
    if out.is_empty() {
        return Err(invalid("empty solver list"));
    }
    Ok(out)
}

/// Parameters of all three direction rules, so a sweep can switch between them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DirectionParams {
    pub scgp: ScgpParams,
    pub httcgp: HttcgpParams,
    pub msttcgp: MsttcgpParams,
}

impl DirectionParams {
    pub fn rule(&self, kind: RuleKind) -> DirectionRule {
        match kind {
            RuleKind::Scgp => DirectionRule::Scgp(self.scgp),
            RuleKind::Httcgp => DirectionRule::Httcgp(self.httcgp),
            RuleKind::Msttcgp => DirectionRule::Msttcgp(self.msttcgp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    File(PathBuf),
    Synth { m: usize, n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartPoint {
    Zero,
    /// Uniform in `(-1, 1)^n`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProblemSelector {
    /// Problems 1–4 from uniform random starts in `(0, 1)^n`.
    Benchmark { id: u32, dims: Vec<usize> },
    Logistic {
        source: DataSource,
        tau: f64,
        start: StartPoint,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSelector,
    pub solvers: Vec<SolverTag>,
    pub repeats: usize,
    pub seed: u64,
    /// Base solver settings; the direction rule is replaced per solver.
    pub config: SolverConfig,
    pub directions: DirectionParams,
    pub aa: AaParams,
}

impl ExperimentSpec {
    pub fn benchmark(id: u32, dims: Vec<usize>, solvers: Vec<SolverTag>) -> Self {
        Self {
            problem: ProblemSelector::Benchmark { id, dims },
            solvers,
            repeats: 10,
            seed: 0,
            config: SolverConfig::default(),
            directions: DirectionParams::default(),
            aa: AaParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(invalid("repeats must be at least 1"));
        }
        if self.solvers.is_empty() {
            return Err(invalid("no solvers selected"));
        }
        self.config.validate()?;
        self.aa.validate()?;
        for kind in [RuleKind::Scgp, RuleKind::Httcgp, RuleKind::Msttcgp] {
            self.directions.rule(kind).validate()?;
        }
        match &self.problem {
            ProblemSelector::Benchmark { id, dims } => {
                if !(1..=4).contains(id) {
                    return Err(invalid(format!("unknown problem id {id}")));
                }
                if dims.is_empty() || dims.contains(&0) {
                    return Err(invalid("dimensions must be positive"));
                }
            }
            ProblemSelector::Logistic { tau, source, .. } => {
                if !(*tau > 0.0) {
                    return Err(invalid("logistic tau must be positive"));
                }
                if let DataSource::Synth { m, n, .. } = source {
                    if *m == 0 || *n == 0 {
                        return Err(invalid("synthetic dataset needs M, n >= 1"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies a `key=value` override such as `aa.m=3` or `ls.sigma=0.01`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad value {value:?} for {key}")))
        }
        let ls = &mut self.config.line_search;
        let d = &mut self.directions;
        match key.trim() {
            "ls.gamma" => ls.gamma = num(key, value)?,
            "ls.rho" => ls.rho = num(key, value)?,
            "ls.sigma" => ls.sigma = num(key, value)?,
            "ls.t1" => ls.t1 = num(key, value)?,
            "ls.t2" => ls.t2 = num(key, value)?,
            "ls.max_backtracks" => ls.max_backtracks = num(key, value)?,
            "zeta" => self.config.zeta = num(key, value)?,
            "tol" | "epsilon" => self.config.epsilon = num(key, value)?,
            "max_iter" => self.config.max_iter = num(key, value)?,
            "aa.m" => self.aa.m = num(key, value)?,
            "aa.c" => self.aa.c = num(key, value)?,
            "aa.b" => self.aa.b = num(key, value)?,
            "aa.lambda" => self.aa.lambda = num(key, value)?,
            "aa.decay_eps" => self.aa.decay_eps = num(key, value)?,
            "scgp.chi" => d.scgp.chi = num(key, value)?,
            "scgp.zeta" => d.scgp.zeta_dir = num(key, value)?,
            "scgp.tau" => d.scgp.tau = num(key, value)?,
            "scgp.theta_lo" => d.scgp.theta_lo = num(key, value)?,
            "scgp.theta_hi" => d.scgp.theta_hi = num(key, value)?,
            "httcgp.mu" => d.httcgp.mu = num(key, value)?,
            "httcgp.delta" => d.httcgp.delta = num(key, value)?,
            "msttcgp.mu" => d.msttcgp.mu = num(key, value)?,
            "msttcgp.theta_lo" => d.msttcgp.theta_lo = num(key, value)?,
            "msttcgp.theta_hi" => d.msttcgp.theta_hi = num(key, value)?,
            "logistic.tau" => match &mut self.problem {
                ProblemSelector::Logistic { tau, .. } => *tau = num(key, value)?,
                _ => return Err(invalid("logistic.tau applies to logistic problems only")),
            },
            other => return Err(invalid(format!("unknown parameter {other:?}"))),
        }
        Ok(())
    }
}

/// Aggregated metrics of one `(problem, n, solver)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub n: usize,
    pub solver: String,
    pub mean_iter: f64,
    pub mean_nf: f64,
    pub mean_tcpu_seconds: f64,
    pub mean_final_residual: f64,
    pub mean_aa_steps: f64,
    /// Runs that did not converge; means are over the others.
    pub failures: usize,
}

impl ResultRow {
    fn aggregate(problem: &str, n: usize, solver: SolverTag, runs: &[Option<SolveReport>]) -> Self {
        let ok: Vec<&SolveReport> = runs
            .iter()
            .flatten()
            .filter(|r| r.converged())
            .collect();
        let mean = |f: &dyn Fn(&SolveReport) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        ResultRow {
            problem: problem.to_string(),
            n,
            solver: solver.to_string(),
            mean_iter: mean(&|r| r.iterations as f64),
            mean_nf: mean(&|r| r.f_evals as f64),
            mean_tcpu_seconds: mean(&|r| r.wall_seconds),
            mean_final_residual: mean(&|r| r.final_residual_norm),
            mean_aa_steps: mean(&|r| r.aa_steps as f64),
            failures: runs.len() - ok.len(),
        }
    }
}

/// One prepared problem instance of a sweep.
struct Instance {
    tag: String,
    problem: ProblemDef,
    start: StartKind,
    key: u64,
}

#[derive(Clone, Copy)]
enum StartKind {
    UnitCube,
    Zero,
    Symmetric,
}

/// SplitMix64 finalizer, used to derive independent per-cell seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Starting point of repeat `repeat` on an instance. Independent of the
/// solver so every solver sees the same starts.
fn start_point(inst: &Instance, seed: u64, repeat: usize) -> Vec<f64> {
    let n = inst.problem.dim;
    let cell_seed = mix(mix(seed ^ inst.key).wrapping_add(repeat as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
    match inst.start {
        StartKind::Zero => vec![0.0; n],
        StartKind::UnitCube => (0..n).map(|_| Open01.sample(&mut rng)).collect(),
        StartKind::Symmetric => (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(&mut rng);
                2.0 * (u - 0.5)
            })
            .collect(),
    }
}

fn instances(spec: &ExperimentSpec) -> Result<Vec<Instance>> {
    match &spec.problem {
        ProblemSelector::Benchmark { id, dims } => dims
            .iter()
            .map(|&n| {
                Ok(Instance {
                    tag: format!("P{id}"),
                    problem: make_problem(*id, n)?,
                    start: StartKind::UnitCube,
                    key: mix(u64::from(*id)) ^ mix(n as u64 + 0x1000),
                })
            })
            .collect(),
        ProblemSelector::Logistic { source, tau, start } => {
            let (tag, data) = match source {
                DataSource::File(path) => (
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "dataset".into()),
                    read_libsvm(path, None)?,
                ),
                DataSource::Synth { m, n, seed } => {
                    (format!("synth-{m}x{n}"), synth_dataset(*m, *n, *seed))
                }
            };
            let n = data.n;
            let logistic = LogisticProblem::new(data, *tau)?;
            Ok(vec![Instance {
                tag,
                problem: logistic.to_problem(),
                start: match start {
                    StartPoint::Zero => StartKind::Zero,
                    StartPoint::Random => StartKind::Symmetric,
                },
                key: mix(0xABCD) ^ mix(n as u64),
            }])
        }
    }
}

fn run_single(
    spec: &ExperimentSpec,
    problem: &ProblemDef,
    solver: SolverTag,
    x0: &[f64],
) -> Option<SolveReport> {
    let config = SolverConfig {
        direction: spec.directions.rule(solver.rule),
        ..spec.config
    };
    let result = if solver.accelerated {
        solve_aa_dfpm(problem, &config, &spec.aa, x0)
    } else {
        solve_dfpm(problem, &config, x0)
    };
    match result {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("{} with {solver}: {e}", problem.name);
            None
        }
    }
}

/// Runs every `(instance, solver, repeat)` cell and aggregates one row per
/// `(instance, solver)`. Cells run in parallel; results do not depend on
/// scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let instances = instances(spec)?;
    let cells: Vec<(usize, usize, usize)> = (0..instances.len())
        .flat_map(|i| {
            (0..spec.solvers.len()).flat_map(move |s| (0..spec.repeats).map(move |r| (i, s, r)))
        })
        .collect();
    let reports: Vec<Option<SolveReport>> = cells
        .par_iter()
        .map(|&(i, s, r)| {
            let inst = &instances[i];
            let x0 = start_point(inst, spec.seed, r);
            run_single(spec, &inst.problem, spec.solvers[s], &x0)
        })
        .collect();

    let mut rows = Vec::with_capacity(instances.len() * spec.solvers.len());
    for (chunk_index, chunk) in reports.chunks(spec.repeats).enumerate() {
        let i = chunk_index / spec.solvers.len();
        let s = chunk_index % spec.solvers.len();
        let inst = &instances[i];
        rows.push(ResultRow::aggregate(
            &inst.tag,
            inst.problem.dim,
            spec.solvers[s],
            chunk,
        ));
    }
    Ok(rows)
}
