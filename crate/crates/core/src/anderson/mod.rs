//! Safeguarded Anderson acceleration of the projection method.
//!
//! After the projection step produces `v_k`, the last `m_k + 1` iterates and
//! their images are combined with weights `a` that minimize the combined
//! residual `||sum_j a_j (v_j - x_j)||`. The weights are kept on the simplex,
//! so the averages
//!
//! ```text
//! x_a = sum_j a_j x_j,   v_a = sum_j a_j v_j
//! ```
//!
//! are convex combinations of feasible points. The candidate
//! `x_AA = x_a + b_k (v_a - x_a)` replaces `v_k` only when
//! `||x_a - v_k|| <= c k^{-(1+eps)}`, and the mixing weight
//! `b_k = min{b, 1 / (k^{1+eps} ||v_a - x_a||)}` keeps the accelerated
//! perturbations summable. Both bounds are what carry the global convergence
//! of the plain method over to the accelerated one.
//!
//! On an unconstrained problem the sign constraint is dropped and the
//! weights come from a least-squares solve maintained by [`IncrementalQr`].

mod qp;
mod qr;

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use qp::{gram, objective, solve_simplex_gram, MAX_SIMPLEX_WINDOW};
pub use qr::{differences_to_coefficients, lstsq_min_norm, IncrementalQr};

use crate::dfpm::{
    distance_to_solution, prepare_start, projection_step, Evaluator, IterationRecord, ProblemDef,
    SolveReport, SolveStatus, SolverConfig, StepFailure, StepKind,
};
use crate::directions::DirectionState;
use crate::error::{invalid, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::{all_finite, dist, norm, sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AaParams {
    /// Window size.
    pub m: usize,
    /// Safeguard constant.
    pub c: f64,
    /// Cap on the mixing weight, in `(0, 1)`.
    pub b: f64,
    /// Tikhonov weight of the coefficient problem.
    pub lambda: f64,
    /// Exponent `eps` of the decay `k^{-(1+eps)}`.
    pub decay_eps: f64,
}

impl Default for AaParams {
    fn default() -> Self {
        Self {
            m: 3,
            c: 10.0,
            b: 0.1,
            lambda: 1e-10,
            decay_eps: 1e-6,
        }
    }
}

impl AaParams {
    /// Defaults with the decay exponent tied to a stopping tolerance.
    pub fn with_tolerance(epsilon: f64) -> Self {
        Self {
            decay_eps: epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m + 1 > MAX_SIMPLEX_WINDOW {
            return Err(invalid(format!(
                "aa: window size must lie in 1..={}",
                MAX_SIMPLEX_WINDOW - 1
            )));
        }
        if !(self.c > 0.0) {
            return Err(invalid("aa: safeguard constant must be positive"));
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(invalid("aa: mixing cap must lie in (0, 1)"));
        }
        if !(self.lambda >= 0.0) {
            return Err(invalid("aa: lambda must be nonnegative"));
        }
        if !(self.decay_eps > 0.0) {
            return Err(invalid("aa: decay exponent must be positive"));
        }
        Ok(())
    }
}

/// Combination weights over the window, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AaCoefficients {
    pub a: Vec<f64>,
}

impl AaCoefficients {
    /// `sum_j a_j rows_j`
    pub fn combine<'a, I>(&self, rows: I) -> Vec<f64>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut out: Vec<f64> = Vec::new();
        for (row, a) in rows.into_iter().zip(&self.a) {
            if out.is_empty() {
                out = vec![0.0; row.len()];
            }
            for (o, v) in out.iter_mut().zip(row) {
                *o += a * v;
            }
        }
        out
    }
}

/// Minimizes `||R^T a||^2 + lambda ||a||^2` over the probability simplex.
/// `rows` are the window residuals, oldest first.
pub fn solve_coefficients_simplex(rows: &[&[f64]], lambda: f64) -> AaCoefficients {
    solve_simplex_gram(&gram(rows), lambda)
}

/// Minimizes `||r_k + sum_{j<k} a_j (r_j - r_k)||` with `a_k = 1 - sum_{j<k} a_j`.
/// Rank-deficient differences resolve to the minimum-norm free weights.
pub fn solve_coefficients_unconstrained(rows: &[&[f64]]) -> AaCoefficients {
    assert!(!rows.is_empty(), "coefficient problem needs at least one residual");
    let newest = rows[rows.len() - 1];
    let diffs: Vec<Vec<f64>> = rows[..rows.len() - 1]
        .iter()
        .map(|r| sub(r, newest))
        .collect();
    let rhs: Vec<f64> = newest.iter().map(|v| -v).collect();
    let free = lstsq_min_norm(&diffs, &rhs);
    let mut a = free;
    let last = 1.0 - a.iter().sum::<f64>();
    a.push(last);
    AaCoefficients { a }
}

/// `k^{-(1+eps)}`
pub fn decay(k: usize, decay_eps: f64) -> f64 {
    (k as f64).powf(-(1.0 + decay_eps))
}

/// `b_k = min{b, 1 / (k^{1+eps} drift)}`, with `drift = ||v_a - x_a||`.
///
/// The result satisfies `b_k * drift <= k^{-(1+eps)}` in floating point, not
/// just in exact arithmetic.
pub fn compute_bk(b: f64, k: usize, decay_eps: f64, drift: f64) -> f64 {
    if drift == 0.0 {
        return b;
    }
    let bound = decay(k, decay_eps);
    let mut bk = b.min(bound / drift);
    while bk > 0.0 && bk * drift > bound {
        bk = bk.next_down();
    }
    bk
}

/// `||x_avg - v_k|| <= c k^{-(1+eps)}`
pub fn safeguard_accept(x_avg: &[f64], v_k: &[f64], c: f64, k: usize, decay_eps: f64) -> bool {
    dist(x_avg, v_k) <= c * decay(k, decay_eps)
}

/// `(1 - b_k) x_avg + b_k v_avg`
pub fn aa_mix(x_avg: &[f64], v_avg: &[f64], b_k: f64) -> Vec<f64> {
    if b_k == 1.0 {
        return v_avg.to_vec();
    }
    x_avg
        .iter()
        .zip(v_avg)
        .map(|(x, v)| (1.0 - b_k) * x + b_k * v)
        .collect()
}

/// Sliding window of `(x_j, v_j, r_j = v_j - x_j)`, oldest first.
#[derive(Debug, Clone)]
pub struct AaWindow {
    m: usize,
    xs: VecDeque<Vec<f64>>,
    vs: VecDeque<Vec<f64>>,
    rs: VecDeque<Vec<f64>>,
}

impl AaWindow {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            xs: VecDeque::with_capacity(m + 1),
            vs: VecDeque::with_capacity(m + 1),
            rs: VecDeque::with_capacity(m + 1),
        }
    }

    /// Records iterate `x_k` and its projection-step image `v_k`.
    pub fn push(&mut self, x: &[f64], v: &[f64]) {
        if self.xs.len() == self.m + 1 {
            self.xs.pop_front();
            self.vs.pop_front();
            self.rs.pop_front();
        }
        self.rs.push_back(sub(v, x));
        self.xs.push_back(x.to_vec());
        self.vs.push_back(v.to_vec());
    }

    /// `m_k + 1`
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn residuals(&self) -> Vec<&[f64]> {
        self.rs.iter().map(Vec::as_slice).collect()
    }

    pub fn iterates(&self) -> impl Iterator<Item = &[f64]> {
        self.xs.iter().map(Vec::as_slice)
    }

    pub fn images(&self) -> impl Iterator<Item = &[f64]> {
        self.vs.iter().map(Vec::as_slice)
    }

    /// Newest residual minus the one before it.
    fn newest_difference(&self) -> Option<Vec<f64>> {
        let n = self.rs.len();
        (n >= 2).then(|| sub(&self.rs[n - 1], &self.rs[n - 2]))
    }
}

/// Per-iteration acceleration diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AndersonRecord {
    pub k: usize,
    pub m_k: usize,
    pub coefficients: Vec<f64>,
    /// `||x_a - v_k||`
    pub deviation: f64,
    /// `c k^{-(1+eps)}`
    pub threshold: f64,
    /// `||v_a - x_a||`
    pub drift: f64,
    pub b_k: f64,
    /// `k^{-(1+eps)}`
    pub decay: f64,
    pub accepted: bool,
    /// The candidate lies in the feasible set.
    pub candidate_feasible: bool,
}

/// Coefficient backend chosen from the feasible set.
enum CoefficientSolver {
    Simplex { lambda: f64 },
    LeastSquares(IncrementalQr),
}

impl CoefficientSolver {
    fn for_problem(problem: &ProblemDef, aa: &AaParams) -> Self {
        match problem.feasible {
            FeasibleSet::WholeSpace => CoefficientSolver::LeastSquares(IncrementalQr::new(aa.m)),
            _ => CoefficientSolver::Simplex { lambda: aa.lambda },
        }
    }

    fn observe(&mut self, window: &AaWindow) {
        if let CoefficientSolver::LeastSquares(qr) = self {
            if let Some(diff) = window.newest_difference() {
                qr.push(diff);
            }
        }
    }

    fn solve(&self, window: &AaWindow) -> AaCoefficients {
        let rows = window.residuals();
        match self {
            CoefficientSolver::Simplex { lambda } => solve_coefficients_simplex(&rows, *lambda),
            CoefficientSolver::LeastSquares(qr) => {
                let newest = rows[rows.len() - 1];
                match qr.solve(newest) {
                    Some(gamma) if qr.len() + 1 == rows.len() => AaCoefficients {
                        a: differences_to_coefficients(&gamma),
                    },
                    _ => solve_coefficients_unconstrained(&rows),
                }
            }
        }
    }
}

/// Runs the accelerated method from `x0`.
///
/// Evaluation accounting matches [`crate::dfpm::solve_dfpm`], plus one
/// evaluation of `F(v_k)` per iteration and one of `F(x_AA)` per accepted
/// acceleration. When `v_k` becomes the next iterate its residual is reused.
pub fn solve_aa_dfpm(
    problem: &ProblemDef,
    config: &SolverConfig,
    aa: &AaParams,
    x0: &[f64],
) -> Result<SolveReport> {
    aa.validate()?;
    let mut x = prepare_start(problem, config, x0)?;
    let start = Instant::now();
    let mut evaluator = Evaluator::new(problem);
    let mut f_x = evaluator.eval(&x);
    if !all_finite(&f_x) {
        return Err(invalid("F(x0) is not finite"));
    }
    let mut state = DirectionState::initial();
    let mut window = AaWindow::new(aa.m);
    let mut coefficients = CoefficientSolver::for_problem(problem, aa);
    let mut trace = config.record_trace.then(Vec::new);
    let mut aa_steps = 0;
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
        let v = step.next;
        let f_v = evaluator.eval(&v);
        window.push(&x, &v);
        coefficients.observe(&window);

        let mut record = trace.as_ref().map(|_| IterationRecord {
            k,
            residual_norm: f_norm,
            alpha: step.alpha,
            direction_norm: norm(&step.d),
            separation: step.separation,
            distance_to_solution: distance_to_solution(problem, &x),
            step: StepKind::Projection,
            anderson: None,
        });

        if norm(&f_v) <= config.epsilon {
            if let (Some(t), Some(r)) = (trace.as_mut(), record) {
                t.push(r);
            }
            x = v;
            f_x = f_v;
            k += 1;
            break SolveStatus::Converged;
        }

        state.advance(&x, &f_x, &step.d);

        let mut accepted = false;
        if k >= 1 {
            let coeffs = coefficients.solve(&window);
            let x_avg = coeffs.combine(window.iterates());
            let v_avg = coeffs.combine(window.images());
            let drift = dist(&v_avg, &x_avg);
            let b_k = compute_bk(aa.b, k, aa.decay_eps, drift);
            let candidate = aa_mix(&x_avg, &v_avg, b_k);
            let deviation = dist(&x_avg, &v);
            let decay_k = decay(k, aa.decay_eps);
            let threshold = aa.c * decay_k;
            accepted = deviation <= threshold && all_finite(&candidate);

            if let Some(r) = record.as_mut() {
                r.step = if accepted {
                    StepKind::Anderson
                } else {
                    StepKind::Rejected
                };
                r.anderson = Some(AndersonRecord {
                    k,
                    m_k: window.len() - 1,
                    coefficients: coeffs.a.clone(),
                    deviation,
                    threshold,
                    drift,
                    b_k,
                    decay: decay_k,
                    accepted,
                    candidate_feasible: problem.feasible.contains(&candidate),
                });
            }
            if accepted {
                x = candidate;
                f_x = evaluator.eval(&x);
                aa_steps += 1;
            }
        }
        if !accepted {
            x = v;
            f_x = f_v;
        }
        if let (Some(t), Some(r)) = (trace.as_mut(), record) {
            t.push(r);
        }
        k += 1;
    };

    Ok(SolveReport {
        status,
        iterations: k,
        f_evals: evaluator.evals,
        wall_seconds: start.elapsed().as_secs_f64(),
        final_residual_norm: norm(&f_x),
        aa_steps,
        x,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::DirectionRule;
    use crate::problems::make_problem;

    fn grid_min_1d<F: Fn(f64) -> f64>(f: F) -> f64 {
        (0..=1000)
            .map(|i| i as f64 / 1000.0)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    }

    #[test]
    fn simplex_orthogonal_residuals() {
        // a0^2 + (1 - a0)^2 is minimized at a0 = 1/2
        let oracle = grid_min_1d(|t| t * t + (1.0 - t) * (1.0 - t));
        assert_eq!(oracle, 0.5);
        let a = solve_coefficients_simplex(&[&[1.0, 0.0], &[0.0, 1.0]], 0.0).a;
        assert!((a[0] - 0.5).abs() < 1e-14 && (a[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simplex_collinear_residuals_hit_the_boundary() {
        // (a0 + 2 (1 - a0))^2 = (2 - a0)^2 on [0, 1] is smallest at a0 = 1
        let oracle = grid_min_1d(|t| (2.0 - t).powi(2));
        assert_eq!(oracle, 1.0);
        let a = solve_coefficients_simplex(&[&[1.0, 0.0], &[2.0, 0.0]], 0.0).a;
        assert_eq!(a, vec![1.0, 0.0]);
    }

    #[test]
    fn single_residual() {
        assert_eq!(solve_coefficients_simplex(&[&[3.0, 4.0]], 1e-10).a, vec![1.0]);
        assert_eq!(solve_coefficients_unconstrained(&[&[3.0, 4.0]]).a, vec![1.0]);
    }

    #[test]
    fn unconstrained_examples() {
        let oracle = grid_min_1d(|t| (1.0 - t).powi(2) + t * t);
        assert_eq!(oracle, 0.5);
        let a = solve_coefficients_unconstrained(&[&[0.0, 1.0], &[1.0, 0.0]]).a;
        assert!((a[0] - 0.5).abs() < 1e-14 && (a[1] - 0.5).abs() < 1e-14, "{a:?}");
        let a = solve_coefficients_unconstrained(&[&[1.0, 2.0], &[1.0, 2.0]]).a;
        assert_eq!(a, vec![0.0, 1.0]);
    }

    #[test]
    fn mixing_weight() {
        let expected = 1.0 / (2f64.powf(1.000001) * 100.0);
        let bk = compute_bk(0.1, 2, 1e-6, 100.0);
        assert!((bk - 0.005).abs() < 1e-6);
        assert!((bk - expected).abs() <= expected * 1e-15);
        assert_eq!(compute_bk(0.1, 5, 1e-6, 0.0), 0.1);
        assert_eq!(compute_bk(0.1, 1, 1e-6, 1.0), 0.1);
    }

    #[test]
    fn safeguard() {
        assert!(safeguard_accept(&[5.0], &[0.0], 10.0, 1, 1e-6));
        assert!(!safeguard_accept(&[10.5], &[0.0], 10.0, 1, 1e-6));
        for k in [1, 10, 1000] {
            assert!(safeguard_accept(&[1.0, 2.0], &[1.0, 2.0], 10.0, k, 1e-6));
        }
    }

    #[test]
    fn mixing() {
        assert_eq!(aa_mix(&[0.3, 0.1], &[1.7, -2.0], 1.0), vec![1.7, -2.0]);
        let out = aa_mix(&[0.0, 0.0], &[1.0, 1.0], 0.1);
        assert!((out[0] - 0.1).abs() < 1e-16 && (out[1] - 0.1).abs() < 1e-16);
        assert_eq!(aa_mix(&[0.25, 4.0], &[0.25, 4.0], 0.37), vec![0.25, 4.0]);
    }

    #[test]
    fn window_keeps_m_plus_one_entries() {
        let mut w = AaWindow::new(2);
        for i in 0..5 {
            let x = [i as f64, 0.0];
            let v = [i as f64 + 0.5, 1.0];
            w.push(&x, &v);
            assert_eq!(w.len(), (i + 1).min(3));
        }
        for ((x, v), r) in w.iterates().zip(w.images()).zip(w.residuals()) {
            assert_eq!(sub(v, x), r.to_vec());
        }
        assert_eq!(w.iterates().next().unwrap(), &[2.0, 0.0]);
    }

    #[test]
    fn zero_iteration_at_solution() {
        let p = make_problem(1, 4).unwrap();
        let r = solve_aa_dfpm(&p, &SolverConfig::default(), &AaParams::default(), &[0.0; 4])
            .unwrap();
        assert!(r.converged());
        assert_eq!((r.iterations, r.f_evals, r.aa_steps), (0, 1, 0));
    }

    #[test]
    fn first_iteration_never_accelerates() {
        let p = make_problem(3, 50).unwrap();
        let x0: Vec<f64> = (0..50).map(|i| 0.1 + 0.8 * (i as f64) / 50.0).collect();
        let cfg = SolverConfig::with_direction(DirectionRule::scgp()).traced();
        let r = solve_aa_dfpm(&p, &cfg, &AaParams::default(), &x0).unwrap();
        let trace = r.trace.as_ref().unwrap();
        assert_eq!(trace[0].step, StepKind::Projection);
        assert!(trace[0].anderson.is_none());
        assert!(r.converged());
    }

    #[test]
    fn invalid_params() {
        let bad = AaParams {
            b: 1.0,
            ..AaParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(AaParams {
            m: 0,
            ..AaParams::default()
        }
        .validate()
        .is_err());
    }
}
