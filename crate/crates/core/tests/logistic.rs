mod common;

use aadfpm::linalg::{dist, dot, norm, sub};
use aadfpm::problems::{logistic_f, logistic_loss, read_libsvm, synth_dataset, write_libsvm};
use aadfpm::{solve_aa_dfpm, solve_dfpm, AaParams, DirectionRule, Error, LogisticProblem, SolverConfig};
use common::{gaussian, rng};

fn problem() -> LogisticProblem {
    LogisticProblem::new(synth_dataset(200, 10, 1), 0.01).unwrap()
}

#[test]
fn mapping_is_the_gradient() {
    let prob = problem();
    let mut r = rng(41);
    let h = 1e-5;
    for _ in 0..20 {
        let x = gaussian(&mut r, 10, 1.0);
        let grad: Vec<f64> = (0..10)
            .map(|i| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                (logistic_loss(&xp, &prob) - logistic_loss(&xm, &prob)) / (2.0 * h)
            })
            .collect();
        let f = logistic_f(&x, &prob);
        assert!(dist(&f, &grad) <= 1e-5 * norm(&f), "{f:?} vs {grad:?}");
    }
}

#[test]
fn strongly_monotone_with_modulus_tau() {
    let prob = problem();
    let mut r = rng(42);
    for _ in 0..500 {
        let x = gaussian(&mut r, 10, 2.0);
        let y = gaussian(&mut r, 10, 2.0);
        let diff = sub(&x, &y);
        let gap = dot(&sub(&logistic_f(&x, &prob), &logistic_f(&y, &prob)), &diff);
        assert!(gap >= (prob.tau_reg - 1e-10) * dot(&diff, &diff));
    }
}

#[test]
fn accelerated_solution_matches_long_plain_run() {
    let prob = problem().to_problem();
    let x0 = vec![0.0; 10];
    let config = SolverConfig::with_direction(DirectionRule::scgp());
    let aa = solve_aa_dfpm(&prob, &config, &AaParams::default(), &x0).unwrap();
    assert!(aa.converged() && aa.final_residual_norm <= 1e-6);

    let long = SolverConfig {
        epsilon: 1e-11,
        max_iter: 100_000,
        ..config
    };
    let reference = solve_dfpm(&prob, &long, &x0).unwrap();
    assert!(reference.converged());
    assert!(dist(&aa.x, &reference.x) <= 1e-5);
}

#[test]
fn libsvm_file_round_trip() {
    let data = synth_dataset(30, 6, 7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synth.libsvm");
    std::fs::write(&path, write_libsvm(&data)).unwrap();
    let back = read_libsvm(&path, Some(6)).unwrap();
    assert_eq!(back.labels, data.labels);
    assert_eq!(back.rows.len(), data.rows.len());
    for (a, b) in back.rows.iter().zip(&data.rows) {
        assert_eq!(a.indices, b.indices);
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u - v).abs() <= 1e-15 * v.abs().max(1.0));
        }
    }
    match read_libsvm(&dir.path().join("missing.libsvm"), None) {
        Err(Error::Io { path, .. }) => assert!(path.ends_with("missing.libsvm")),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}
