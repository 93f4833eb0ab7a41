//! Derivative-free backtracking line search.
//!
//! The step `alpha = gamma * rho^i` is accepted for the smallest `i >= 0` with
//!
//! ```text
//! -F(x + alpha d)^T d >= sigma * alpha * clamp(||F(x + alpha d)||, t1, t2) * ||d||^2
//! ```
//!
//! Clamping the residual norm keeps the right-hand side from collapsing far
//! from the solution or exploding near it.

use crate::error::{invalid, Error, Result};
use crate::geometry::clamp_scalar;
use crate::linalg::{dot, norm, norm_sq};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    /// Initial trial step.
    pub gamma: f64,
    /// Backtracking factor in `(0, 1)`.
    pub rho: f64,
    pub sigma: f64,
    pub t1: f64,
    pub t2: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            rho: 0.6,
            sigma: 0.01,
            t1: 0.001,
            t2: 0.4,
            max_backtracks: 60,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(invalid("line search: gamma must be positive"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(invalid("line search: rho must lie in (0, 1)"));
        }
        if !(self.sigma > 0.0) {
            return Err(invalid("line search: sigma must be positive"));
        }
        if !(self.t1 >= 0.0 && self.t2 >= self.t1) {
            return Err(invalid("line search: need 0 <= t1 <= t2"));
        }
        if self.max_backtracks == 0 {
            return Err(invalid("line search: max_backtracks must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    /// Trial point `x + alpha d`.
    pub z: Vec<f64>,
    /// `F(z)`, kept so the projection step does not evaluate it again.
    pub f_z: Vec<f64>,
    /// Number of mapping evaluations spent, `i + 1`.
    pub trials: usize,
}

/// Runs the backtracking search from `x` along `d`.
///
/// `f_x` is the already-known residual at `x`; it is only used for dimension
/// checks. Every call to `mapping` is one trial. More than `max_backtracks`
/// reductions yields [`Error::LineSearchFailure`].
pub fn line_search<M>(
    mut mapping: M,
    x: &[f64],
    d: &[f64],
    f_x: &[f64],
    p: &LineSearchParams,
) -> Result<LineSearchResult>
where
    M: FnMut(&[f64]) -> Vec<f64>,
{
    if x.len() != d.len() || x.len() != f_x.len() {
        return Err(invalid("line search: dimension mismatch"));
    }
    let d_sq = norm_sq(d);
    if !(d_sq > 0.0) {
        return Err(invalid("line search: zero search direction"));
    }

    let mut alpha = p.gamma;
    let mut z = vec![0.0; x.len()];
    for i in 0..=p.max_backtracks {
        for ((zi, xi), di) in z.iter_mut().zip(x).zip(d) {
            *zi = xi + alpha * di;
        }
        let f_z = mapping(&z);
        let lhs = -dot(&f_z, d);
        let rhs = p.sigma * alpha * clamp_scalar(norm(&f_z), p.t1, p.t2)? * d_sq;
        if lhs >= rhs {
            return Ok(LineSearchResult {
                alpha,
                z,
                f_z,
                trials: i + 1,
            });
        }
        if i < p.max_backtracks {
            alpha *= p.rho;
        }
    }
    Err(Error::LineSearchFailure {
        trials: p.max_backtracks + 1,
        last_alpha: alpha,
        last_z: z,
    })
}
