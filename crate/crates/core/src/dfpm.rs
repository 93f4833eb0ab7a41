//! The derivative-free projection method.
//!
//! Each iteration computes a direction `d_k` from the residual history, finds
//! a trial point `z_k = x_k + alpha_k d_k` by backtracking, and then projects
//! `x_k` toward the hyperplane `{x : F(z_k)^T (x - z_k) = 0}`, which separates
//! `x_k` from every solution when `F` is monotone:
//!
//! ```text
//! x_{k+1} = P_C[x_k - zeta * u_k * F(z_k)],   u_k = F(z_k)^T (x_k - z_k) / ||F(z_k)||^2
//! ```

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anderson::AndersonRecord;
use crate::directions::{DirectionRule, DirectionState};
use crate::error::{invalid, Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::{all_finite, dist, norm, norm_sq};
use crate::linesearch::{line_search, LineSearchParams};

/// Vector-valued mapping `F : R^n -> R^n`.
pub type Mapping = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A constrained monotone equation `F(x) = 0, x in C`.
#[derive(Clone)]
pub struct ProblemDef {
    pub name: String,
    pub dim: usize,
    pub mapping: Mapping,
    pub feasible: FeasibleSet,
    pub known_solution: Option<Vec<f64>>,
    /// Lipschitz constant of `F`, when known.
    pub lipschitz: Option<f64>,
    /// Strong monotonicity modulus of `F`, when known.
    pub strong_monotone_mu: Option<f64>,
}

impl ProblemDef {
    pub fn new<F>(name: impl Into<String>, dim: usize, feasible: FeasibleSet, mapping: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            mapping: Arc::new(mapping),
            feasible,
            known_solution: None,
            lipschitz: None,
            strong_monotone_mu: None,
        }
    }

    pub fn with_known_solution(mut self, x: Vec<f64>) -> Self {
        self.known_solution = Some(x);
        self
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.mapping)(x)
    }
}

impl fmt::Debug for ProblemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDef")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("feasible", &self.feasible)
            .field("lipschitz", &self.lipschitz)
            .field("strong_monotone_mu", &self.strong_monotone_mu)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub line_search: LineSearchParams,
    /// Relaxation factor of the projection step, in `(0, 2)`.
    pub zeta: f64,
    /// Stop once `||F_k|| <= epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    pub direction: DirectionRule,
    /// Keep a per-iteration trace in the report.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            line_search: LineSearchParams::default(),
            zeta: 1.7,
            epsilon: 1e-6,
            max_iter: 2000,
            direction: DirectionRule::httcgp(),
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_direction(direction: DirectionRule) -> Self {
        Self {
            direction,
            ..Self::default()
        }
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.line_search.validate()?;
        self.direction.validate()?;
        if !(self.zeta > 0.0 && self.zeta < 2.0) {
            return Err(invalid("zeta must lie in (0, 2)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    LineSearchFailure,
    /// The direction formula hit a degenerate history.
    Breakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    /// `x_{k+1} = v_k`, the projection-step point.
    Projection,
    /// The accelerated candidate passed the safeguard.
    Anderson,
    /// The accelerated candidate was formed but rejected.
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub residual_norm: f64,
    pub alpha: f64,
    pub direction_norm: f64,
    /// `F(z_k)^T (x_k - z_k)`.
    pub separation: f64,
    /// `||x_k - x*||` when the problem carries a known solution.
    pub distance_to_solution: Option<f64>,
    pub step: StepKind,
    pub anderson: Option<AndersonRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub f_evals: usize,
    pub wall_seconds: f64,
    pub final_residual_norm: f64,
    pub aa_steps: usize,
    /// Last iterate.
    pub x: Vec<f64>,
    pub trace: Option<Vec<IterationRecord>>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// `P_C[x - zeta * u * F(z)]` with `u = F(z)^T (x - z) / ||F(z)||^2`.
///
/// Returns [`Error::SolutionFound`] when `F(z) = 0`.
pub fn hyperplane_step(
    x: &[f64],
    z: &[f64],
    f_z: &[f64],
    zeta: f64,
    set: &FeasibleSet,
) -> Result<Vec<f64>> {
    if x.len() != z.len() || x.len() != f_z.len() {
        return Err(invalid("hyperplane step: dimension mismatch"));
    }
    let f_sq = norm_sq(f_z);
    if f_sq == 0.0 {
        return Err(Error::SolutionFound);
    }
    let u = f_z
        .iter()
        .zip(x.iter().zip(z))
        .map(|(f, (a, b))| f * (a - b))
        .sum::<f64>()
        / f_sq;
    let mut next: Vec<f64> = x.iter().zip(f_z).map(|(a, f)| a - zeta * u * f).collect();
    set.project_in_place(&mut next)?;
    Ok(next)
}

/// Counts every evaluation of the mapping.
pub(crate) struct Evaluator<'a> {
    problem: &'a ProblemDef,
    pub evals: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a ProblemDef) -> Self {
        Self { problem, evals: 0 }
    }

    pub fn eval(&mut self, x: &[f64]) -> Vec<f64> {
        self.evals += 1;
        self.problem.eval(x)
    }
}

/// One direction / line search / projection pass.
pub(crate) struct ProjectionStep {
    pub d: Vec<f64>,
    pub alpha: f64,
    pub separation: f64,
    /// `v_k`
    pub next: Vec<f64>,
}

pub(crate) enum StepFailure {
    LineSearch,
    Breakdown,
}

pub(crate) fn projection_step(
    problem: &ProblemDef,
    config: &SolverConfig,
    evaluator: &mut Evaluator<'_>,
    x: &[f64],
    f_x: &[f64],
    state: &DirectionState,
) -> std::result::Result<ProjectionStep, StepFailure> {
    let d = match config.direction.direction(x, f_x, state) {
        Ok(d) if all_finite(&d) => d,
        Ok(_) => {
            log::warn!("{}: non-finite direction at k = {}", problem.name, state.k);
            return Err(StepFailure::Breakdown);
        }
        Err(e) => {
            log::warn!("{}: direction breakdown at k = {}: {e}", problem.name, state.k);
            return Err(StepFailure::Breakdown);
        }
    };
    let ls = match line_search(|z| evaluator.eval(z), x, &d, f_x, &config.line_search) {
        Ok(ls) => ls,
        Err(e) => {
            log::warn!("{}: {e} at k = {}", problem.name, state.k);
            return Err(StepFailure::LineSearch);
        }
    };
    let separation = ls
        .f_z
        .iter()
        .zip(x.iter().zip(&ls.z))
        .map(|(f, (a, b))| f * (a - b))
        .sum();
    let next = match hyperplane_step(x, &ls.z, &ls.f_z, config.zeta, &problem.feasible) {
        Ok(v) => v,
        // z_k is a zero of F; its projection is the natural next iterate.
        Err(Error::SolutionFound) => problem
            .feasible
            .project(&ls.z)
            .map_err(|_| StepFailure::Breakdown)?,
        Err(_) => return Err(StepFailure::Breakdown),
    };
    Ok(ProjectionStep {
        d,
        alpha: ls.alpha,
        separation,
        next,
    })
}

pub(crate) fn prepare_start(
    problem: &ProblemDef,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<Vec<f64>> {
    config.validate()?;
    if x0.len() != problem.dim {
        return Err(invalid(format!(
            "initial point has dimension {}, problem has {}",
            x0.len(),
            problem.dim
        )));
    }
    let mut x = x0.to_vec();
    if !problem.feasible.contains(&x) {
        log::warn!("{}: initial point is infeasible; projecting onto C", problem.name);
        problem.feasible.project_in_place(&mut x)?;
    } else if !all_finite(&x) {
        return Err(invalid("initial point is not finite"));
    }
    Ok(x)
}

pub(crate) fn distance_to_solution(problem: &ProblemDef, x: &[f64]) -> Option<f64> {
    problem.known_solution.as_deref().map(|s| dist(x, s))
}

/// Runs the plain projection method from `x0`.
///
/// `f_evals` counts one evaluation for each `F(x_k)` and one per line-search
/// trial; the projection step reuses `F(z_k)`.
pub fn solve_dfpm(problem: &ProblemDef, config: &SolverConfig, x0: &[f64]) -> Result<SolveReport> {
    let mut x = prepare_start(problem, config, x0)?;
    let start = Instant::now();
    let mut evaluator = Evaluator::new(problem);
    let mut f_x = evaluator.eval(&x);
    if !all_finite(&f_x) {
        return Err(invalid("F(x0) is not finite"));
    }
    let mut state = DirectionState::initial();
    let mut trace = config.record_trace.then(Vec::new);
    let mut k = 0;

    let status = loop {
        let f_norm = norm(&f_x);
        if f_norm <= config.epsilon {
            break SolveStatus::Converged;
        }
        if k >= config.max_iter {
            break SolveStatus::MaxIter;
        }
        let step = match projection_step(problem, config, &mut evaluator, &x, &f_x, &state) {
            Ok(s) => s,
            Err(StepFailure::LineSearch) => break SolveStatus::LineSearchFailure,
            Err(StepFailure::Breakdown) => break SolveStatus::Breakdown,
        };
        if let Some(t) = trace.as_mut() {
            t.push(IterationRecord {
                k,
                residual_norm: f_norm,
                alpha: step.alpha,
                direction_norm: norm(&step.d),
                separation: step.separation,
                distance_to_solution: distance_to_solution(problem, &x),
                step: StepKind::Projection,
                anderson: None,
            });
        }
        state.advance(&x, &f_x, &step.d);
        x = step.next;
        f_x = evaluator.eval(&x);
        k += 1;
    };

    Ok(SolveReport {
        status,
        iterations: k,
        f_evals: evaluator.evals,
        wall_seconds: start.elapsed().as_secs_f64(),
        final_residual_norm: norm(&f_x),
        aa_steps: 0,
        x,
        trace,
    })
}

/// Monotonicity gap `(F(x) - F(y))^T (x - y)`.
pub fn monotonicity_gap(problem: &ProblemDef, x: &[f64], y: &[f64]) -> f64 {
    let fx = problem.eval(x);
    let fy = problem.eval(y);
    fx.iter()
        .zip(&fy)
        .zip(x.iter().zip(y))
        .map(|((a, b), (p, q))| (a - b) * (p - q))
        .sum()
}
