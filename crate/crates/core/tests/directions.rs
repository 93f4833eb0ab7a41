mod common;

use aadfpm::linalg::{dot, norm, norm_sq};
use aadfpm::{
    make_problem, solve_dfpm, DirectionRule, DirectionState, HttcgpParams, MsttcgpParams,
    ScgpParams, SolverConfig,
};
use common::{rng, sample_state};

const STATES: usize = 5000;

fn descent_ratio(f: &[f64], d: &[f64]) -> f64 {
    -dot(f, d) / norm_sq(f)
}

#[test]
fn first_iteration_is_steepest_descent() {
    let f = vec![1.0, -2.0, 0.5];
    for rule in [DirectionRule::scgp(), DirectionRule::httcgp(), DirectionRule::msttcgp()] {
        let d = rule.direction(&[0.0; 3], &f, &DirectionState::initial()).unwrap();
        assert_eq!(d, vec![-1.0, 2.0, -0.5], "{}", rule.name());
    }
}

#[test]
fn scgp_sufficient_descent() {
    let p = ScgpParams::default();
    let s1 = p.descent_constant();
    let mut r = rng(11);
    let mut worst = f64::INFINITY;
    for _ in 0..STATES {
        let s = sample_state(&mut r);
        let d = DirectionRule::Scgp(p).direction(&s.x, &s.f, &s.state).unwrap();
        let ratio = descent_ratio(&s.f, &d);
        worst = worst.min(ratio);
        assert!(ratio >= s1 - 1e-12, "ratio {ratio} below {s1}");
    }
    assert!(worst >= 0.01);
}

#[test]
fn httcgp_descent_constant_is_tight() {
    let p = HttcgpParams::default();
    let s1 = p.descent_constant();
    let mut r = rng(12);
    for _ in 0..STATES {
        let s = sample_state(&mut r);
        let d = DirectionRule::Httcgp(p).direction(&s.x, &s.f, &s.state).unwrap();
        let ratio = descent_ratio(&s.f, &d);
        assert!(ratio >= s1 - 1e-12, "ratio {ratio} below {s1}");
    }

    // F = e1, y = e1 and F^T d_{k-1} / tau_k = (1 + delta) / 2 maximize the
    // positive part of F^T d_k, which then equals -(1 - (1 + delta)^2/4).
    let scale = (1.0 + p.delta) / 2.0;
    let d_norm = 1.0 / (scale * p.mu);
    let state = DirectionState::new(
        1,
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        vec![1.0, (d_norm * d_norm - 1.0).sqrt()],
    );
    let f = [1.0, 0.0];
    let d = DirectionRule::Httcgp(p).direction(&[1.0, 0.0], &f, &state).unwrap();
    assert!((descent_ratio(&f, &d) - s1).abs() < 1e-12);
    assert!(s1 < 1.0 - p.delta);
}

#[test]
fn httcgp_direction_bound() {
    let p = HttcgpParams::default();
    let s2 = p.bound_constant();
    let mut r = rng(13);
    for _ in 0..STATES {
        let s = sample_state(&mut r);
        let d = DirectionRule::Httcgp(p).direction(&s.x, &s.f, &s.state).unwrap();
        assert!(norm(&d) <= s2 * norm(&s.f) * (1.0 + 1e-10));
    }
}

#[test]
fn msttcgp_descent_and_bound() {
    let p = MsttcgpParams::default();
    let s1 = p.descent_constant();
    let s2 = p.bound_constant();
    assert!((s2 - 210.0).abs() < 1e-12);
    let mut r = rng(14);
    for _ in 0..STATES {
        let s = sample_state(&mut r);
        let d = DirectionRule::Msttcgp(p).direction(&s.x, &s.f, &s.state).unwrap();
        assert!(descent_ratio(&s.f, &d) >= s1 - 1e-12);
        assert!(norm(&d) <= s2 * norm(&s.f) * (1.0 + 1e-10));
    }
}

/// Along actual solver runs the SCGP and HTTCGP directions stay within a
/// modest multiple of the residual, far below the worst-case constants.
#[test]
fn direction_growth_along_runs() {
    for rule in [DirectionRule::scgp(), DirectionRule::httcgp()] {
        let mut worst = 0.0f64;
        for id in 1..=4 {
            let problem = make_problem(id, 500).unwrap();
            let config = SolverConfig::with_direction(rule).traced();
            let report = solve_dfpm(&problem, &config, &vec![0.7; 500]).unwrap();
            assert!(report.converged());
            for rec in report.trace.unwrap() {
                worst = worst.max(rec.direction_norm / rec.residual_norm);
            }
        }
        assert!(worst.is_finite() && worst < 50.0, "{}: {worst}", rule.name());
    }
}
