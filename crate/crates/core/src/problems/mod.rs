//! Benchmark mappings and the regularized logistic-regression application.

mod libsvm;
mod logistic;
mod synth;

pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm};
pub use logistic::{logistic_f, logistic_loss, Dataset, LogisticProblem, SparseRow};
pub use synth::synth_dataset;

use crate::dfpm::ProblemDef;
use crate::error::{invalid, Result};
use crate::geometry::FeasibleSet;

/// Builds benchmark Problem 1–4 in dimension `n` on the nonnegative orthant:
///
/// | id | `f_i(x)` |
/// |----|----------|
/// | 1  | `e^{x_i} - 1` |
/// | 2  | `ln(x_i + 1) - x_i / n` |
/// | 3  | `e^{x_1} - 1`, then `e^{x_i} + x_i - 1` for `i >= 2` |
/// | 4  | `2 x_i - sin(x_i)` |
///
/// Problems 1, 3 and 4 carry the known solution `x* = 0`. Problem 4 is
/// Lipschitz with constant 3 and strongly monotone with modulus 1.
pub fn make_problem(id: u32, n: usize) -> Result<ProblemDef> {
    if n == 0 {
        return Err(invalid("problem dimension must be positive"));
    }
    let zero = vec![0.0; n];
    let orthant = FeasibleSet::NonnegativeOrthant;
    let problem = match id {
        1 => ProblemDef::new("P1", n, orthant, |x: &[f64]| {
            x.iter().map(|v| v.exp_m1()).collect()
        })
        .with_known_solution(zero),
        2 => {
            let inv_n = 1.0 / n as f64;
            ProblemDef::new("P2", n, orthant, move |x: &[f64]| {
                x.iter().map(|v| v.ln_1p() - v * inv_n).collect()
            })
        }
        3 => ProblemDef::new("P3", n, orthant, |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { v.exp_m1() } else { v.exp_m1() + v })
                .collect()
        })
        .with_known_solution(zero),
        4 => {
            let mut p = ProblemDef::new("P4", n, orthant, |x: &[f64]| {
                x.iter().map(|v| 2.0 * v - v.sin()).collect()
            })
            .with_known_solution(zero);
            p.lipschitz = Some(3.0);
            p.strong_monotone_mu = Some(1.0);
            p
        }
        other => return Err(invalid(format!("unknown problem id {other}"))),
    };
    Ok(problem)
}
