//! Derivative-free projection methods for constrained monotone nonlinear
//! equations
//!
//! ```text
//! find x in C with F(x) = 0
//! ```
//!
//! where `F` is continuous and monotone and `C` is a closed convex set with a
//! cheap projection. Each iteration picks a conjugate-gradient-type search
//! direction, backtracks along it to find a point `z` whose residual
//! separates the current iterate from the solution set, and projects onto
//! that separating hyperplane. [`solve_aa_dfpm`] adds a safeguarded Anderson
//! acceleration step on top.
//!
//! ```
//! use aadfpm::{make_problem, solve_aa_dfpm, solve_dfpm, AaParams, SolverConfig};
//!
//! let problem = make_problem(1, 1000).unwrap();
//! let x0 = vec![0.5; 1000];
//! let config = SolverConfig::default();
//!
//! let plain = solve_dfpm(&problem, &config, &x0).unwrap();
//! let accelerated = solve_aa_dfpm(&problem, &config, &AaParams::default(), &x0).unwrap();
//! assert!(plain.converged() && accelerated.converged());
//! assert!(accelerated.final_residual_norm <= 1e-6);
//! ```

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anderson;
pub mod bench;
pub mod dfpm;
pub mod directions;
mod error;
pub mod geometry;
pub mod linalg;
pub mod linesearch;
pub mod problems;

pub use anderson::{solve_aa_dfpm, AaCoefficients, AaParams, AndersonRecord};
pub use dfpm::{
    hyperplane_step, monotonicity_gap, solve_dfpm, IterationRecord, Mapping, ProblemDef,
    SolveReport, SolveStatus, SolverConfig, StepKind,
};
pub use directions::{DirectionRule, DirectionState, HttcgpParams, MsttcgpParams, ScgpParams};
pub use error::{Error, Result};
pub use geometry::{clamp_scalar, project, FeasibleSet};
pub use linesearch::{line_search, LineSearchParams, LineSearchResult};
pub use problems::{make_problem, LogisticProblem};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projection-method.md")]
    mod projection_method {}
    #[doc = include_str!("../../../book/src/directions.md")]
    mod directions {}
    #[doc = include_str!("../../../book/src/anderson.md")]
    mod anderson {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
}
