//! Conjugate-gradient-type search directions.
//!
//! Every rule returns `d_0 = -F_0` on the first iteration and afterwards
//! combines `F_k` with the history `s_{k-1} = x_k - x_{k-1}`,
//! `y_{k-1} = F_k - F_{k-1}` and `d_{k-1}`. All rules satisfy
//!
//! ```text
//! F_k^T d_k <= -s1 ||F_k||^2      (sufficient descent)
//! ||d_k||   <=  s2 ||F_k||        (bounded by the residual)
//! ```
//!
//! for rule-specific constants, which is what the line search and the
//! convergence theory rely on. The functions are pure: updating the history
//! is the solver's job.

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm, norm_sq, sub};
use serde::{Deserialize, Serialize};

/// History carried between iterations.
///
/// At `k = 0` the vectors are ignored (and may be empty).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectionState {
    pub k: usize,
    pub x_prev: Vec<f64>,
    pub f_prev: Vec<f64>,
    pub d_prev: Vec<f64>,
}

impl DirectionState {
    pub fn initial() -> Self {
        Self::default()
    }

    pub fn new(k: usize, x_prev: Vec<f64>, f_prev: Vec<f64>, d_prev: Vec<f64>) -> Self {
        Self {
            k,
            x_prev,
            f_prev,
            d_prev,
        }
    }

    /// Stores iteration `k`'s point, residual and direction and advances to `k + 1`.
    pub fn advance(&mut self, x: &[f64], f: &[f64], d: &[f64]) {
        copy_into(&mut self.x_prev, x);
        copy_into(&mut self.f_prev, f);
        copy_into(&mut self.d_prev, d);
        self.k += 1;
    }

    fn check(&self, x: &[f64], f: &[f64]) -> Result<()> {
        let n = f.len();
        if x.len() != n || self.x_prev.len() != n || self.f_prev.len() != n || self.d_prev.len() != n
        {
            return Err(Error::InvalidState(format!(
                "direction history has inconsistent dimensions at k = {}",
                self.k
            )));
        }
        Ok(())
    }
}

fn copy_into(dst: &mut Vec<f64>, src: &[f64]) {
    dst.clear();
    dst.extend_from_slice(src);
}

/// Spectral conjugate gradient projection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScgpParams {
    /// Weight of the safeguarding `beta` branch, in `(0, 1/4)`.
    pub chi: f64,
    /// Fallback-branch coefficient, in `[0, 1)`.
    pub zeta_dir: f64,
    /// Scale of the `eta` shift, `> 0`.
    pub tau: f64,
    /// Spectral window lower end, `> 1/4`.
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl Default for ScgpParams {
    fn default() -> Self {
        Self {
            chi: 0.2,
            zeta_dir: 0.5,
            tau: 1.0,
            theta_lo: 0.3,
            theta_hi: 10.0,
        }
    }
}

impl ScgpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0 && self.chi < 0.25) {
            return Err(invalid("scgp: chi must lie in (0, 1/4)"));
        }
        if !(0.0..1.0).contains(&self.zeta_dir) {
            return Err(invalid("scgp: zeta must lie in [0, 1)"));
        }
        if !(self.tau > 0.0) {
            return Err(invalid("scgp: tau must be positive"));
        }
        if !(self.theta_lo > 0.25 && self.theta_hi > self.theta_lo) {
            return Err(invalid("scgp: need 1/4 < theta_lo < theta_hi"));
        }
        Ok(())
    }

    /// Descent constant implied by the formula:
    /// `beta_k F_k^T d_{k-1} <= ||F_k||^2 / 4` on both `beta` branches.
    pub fn descent_constant(&self) -> f64 {
        (self.theta_lo - 0.25).min(1.0 - self.zeta_dir)
    }
}

/// Hybrid three-term conjugate gradient projection parameters.
/// The scaling `delta_k` is held at the constant `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HttcgpParams {
    pub mu: f64,
    /// In `[0, 1)`.
    pub delta: f64,
}

impl Default for HttcgpParams {
    fn default() -> Self {
        Self {
            mu: 0.01,
            delta: 0.5,
        }
    }
}

impl HttcgpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(invalid("httcgp: mu must be positive"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(invalid("httcgp: delta must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Tight descent constant `1 - (1 + delta)^2 / 4` of the printed formula.
    pub fn descent_constant(&self) -> f64 {
        1.0 - (1.0 + self.delta).powi(2) / 4.0
    }

    /// `1 + (1 + delta)/mu + 1/mu^2`, from `tau_k >= mu ||d_{k-1}|| ||y_{k-1}||`.
    pub fn bound_constant(&self) -> f64 {
        1.0 + (1.0 + self.delta) / self.mu + 1.0 / (self.mu * self.mu)
    }
}

/// Modified spectral three-term conjugate gradient parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsttcgpParams {
    pub mu: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl Default for MsttcgpParams {
    fn default() -> Self {
        Self {
            mu: 0.01,
            theta_lo: 0.3,
            theta_hi: 10.0,
        }
    }
}

impl MsttcgpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(invalid("msttcgp: mu must be positive"));
        }
        if !(self.theta_lo > 0.0 && self.theta_hi > self.theta_lo) {
            return Err(invalid("msttcgp: need 0 < theta_lo < theta_hi"));
        }
        Ok(())
    }

    /// `F_k^T d_k = -theta_k ||F_k||^2` or `-||F_k||^2` exactly.
    pub fn descent_constant(&self) -> f64 {
        self.theta_lo.min(1.0)
    }

    /// `s2 = max{1, theta_hi} + 2/mu`.
    pub fn bound_constant(&self) -> f64 {
        self.theta_hi.max(1.0) + 2.0 / self.mu
    }
}

/// Selects one of the three direction formulas together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DirectionRule {
    Scgp(ScgpParams),
    Httcgp(HttcgpParams),
    Msttcgp(MsttcgpParams),
}

impl DirectionRule {
    pub fn scgp() -> Self {
        DirectionRule::Scgp(ScgpParams::default())
    }

    pub fn httcgp() -> Self {
        DirectionRule::Httcgp(HttcgpParams::default())
    }

    pub fn msttcgp() -> Self {
        DirectionRule::Msttcgp(MsttcgpParams::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DirectionRule::Scgp(_) => "SCGP",
            DirectionRule::Httcgp(_) => "HTTCGP",
            DirectionRule::Msttcgp(_) => "MSTTCGP",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DirectionRule::Scgp(p) => p.validate(),
            DirectionRule::Httcgp(p) => p.validate(),
            DirectionRule::Msttcgp(p) => p.validate(),
        }
    }

    /// Evaluates `d_k` at the current point `x` with residual `f`.
    pub fn direction(&self, x: &[f64], f: &[f64], state: &DirectionState) -> Result<Vec<f64>> {
        match self {
            DirectionRule::Scgp(p) => direction_scgp(x, f, state, p),
            DirectionRule::Httcgp(p) => direction_httcgp(x, f, state, p),
            DirectionRule::Msttcgp(p) => direction_msttcgp(x, f, state, p),
        }
    }

    /// Documented descent constant used by tests and the stepsize floor.
    pub fn descent_constant(&self) -> f64 {
        match self {
            DirectionRule::Scgp(p) => p.descent_constant(),
            DirectionRule::Httcgp(p) => p.descent_constant(),
            DirectionRule::Msttcgp(p) => p.descent_constant(),
        }
    }
}

fn negated(f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| -v).collect()
}

/// Spectral conjugate gradient direction.
///
/// ```text
/// d_k = -theta_k F_k + beta_k d_{k-1}                         theta_k in [theta_lo, theta_hi]
/// d_k = -F_k + zeta (||F_k|| / ||d_{k-1}||) d_{k-1}           otherwise
/// ```
///
/// A vanishing `F_k^T y_{k-1}` is treated as an out-of-window `theta_k`.
pub fn direction_scgp(
    x: &[f64],
    f: &[f64],
    state: &DirectionState,
    p: &ScgpParams,
) -> Result<Vec<f64>> {
    if state.k == 0 {
        return Ok(negated(f));
    }
    state.check(x, f)?;
    let d_prev = &state.d_prev;
    let d_norm = norm(d_prev);
    if !(d_norm > 0.0) {
        return Err(Error::InvalidState("previous direction is zero".into()));
    }
    let f_norm = norm(f);
    if !(f_norm > 0.0) {
        return Err(Error::InvalidState("residual is zero".into()));
    }
    let y = sub(f, &state.f_prev);
    let s = sub(x, &state.x_prev);

    let f_y = dot(f, &y);
    let spectral = if f_y != 0.0 && f_y.is_finite() {
        let beta = scgp_beta(f, f_norm, &y, d_prev, d_norm, p);
        let theta = (dot(&s, f) + beta * dot(&y, d_prev)) / f_y;
        (theta.is_finite() && theta >= p.theta_lo && theta <= p.theta_hi).then_some((theta, beta))
    } else {
        None
    };

    let mut d = negated(f);
    match spectral {
        Some((theta, beta)) => {
            for v in d.iter_mut() {
                *v *= theta;
            }
            axpy(beta, d_prev, &mut d);
        }
        None => axpy(p.zeta_dir * f_norm / d_norm, d_prev, &mut d),
    }
    Ok(d)
}

fn scgp_beta(
    f: &[f64],
    f_norm: f64,
    y: &[f64],
    d_prev: &[f64],
    d_norm: f64,
    p: &ScgpParams,
) -> f64 {
    let y_norm = norm(y);
    let f_y = dot(f, y);
    let d_y = dot(d_prev, y);
    let f_d = dot(f, d_prev);

    let tau_k = p.tau * y_norm / f_norm + (-f_y / (f_norm * f_norm)).min(0.0);
    let lambda_k = y_norm / d_norm + (-d_y / (d_norm * d_norm)).max(0.0);

    // eta = y + tau_k F, v = y + lambda_k d_{k-1}; only inner products are needed.
    let f_eta = f_y + tau_k * f_norm * f_norm;
    let eta_sq = y_norm * y_norm + 2.0 * tau_k * f_y + tau_k * tau_k * f_norm * f_norm;
    let d_v = d_y + lambda_k * d_norm * d_norm;

    let hz = f_eta / d_v - eta_sq * f_d / (d_v * d_v);
    let floor = p.chi * f_d / (d_norm * d_norm);
    hz.max(floor)
}

fn three_term_tau(f_prev: &[f64], y: &[f64], d_prev: &[f64], mu: f64) -> Result<f64> {
    let tau = (mu * norm(d_prev) * norm(y))
        .max(dot(d_prev, y))
        .max(norm_sq(f_prev));
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidState(format!(
            "three-term scaling tau_k = {tau} is not positive"
        )));
    }
    Ok(tau)
}

/// Hybrid three-term direction `d_k = -F_k + beta_k d_{k-1} + upsilon_k y_{k-1}`.
pub fn direction_httcgp(
    x: &[f64],
    f: &[f64],
    state: &DirectionState,
    p: &HttcgpParams,
) -> Result<Vec<f64>> {
    if state.k == 0 {
        return Ok(negated(f));
    }
    state.check(x, f)?;
    let d_prev = &state.d_prev;
    let y = sub(f, &state.f_prev);
    let tau = three_term_tau(&state.f_prev, &y, d_prev, p.mu)?;

    let f_d = dot(f, d_prev);
    let beta = dot(f, &y) / tau - norm_sq(&y) * f_d / (tau * tau);
    let upsilon = p.delta * f_d / tau;

    let mut d = negated(f);
    axpy(beta, d_prev, &mut d);
    axpy(upsilon, &y, &mut d);
    Ok(d)
}

/// Modified spectral three-term direction
///
/// ```text
/// d_k = -theta_k F_k + beta_k d_{k-1} - upsilon_k y_{k-1}     theta_k in [theta_lo, theta_hi]
/// d_k = -F_k + beta_k d_{k-1} - upsilon_k y_{k-1}             otherwise
/// ```
pub fn direction_msttcgp(
    x: &[f64],
    f: &[f64],
    state: &DirectionState,
    p: &MsttcgpParams,
) -> Result<Vec<f64>> {
    if state.k == 0 {
        return Ok(negated(f));
    }
    state.check(x, f)?;
    let d_prev = &state.d_prev;
    let y = sub(f, &state.f_prev);
    let s = sub(x, &state.x_prev);
    let tau = three_term_tau(&state.f_prev, &y, d_prev, p.mu)?;

    let f_y = dot(f, &y);
    let beta = f_y / tau;
    let upsilon = dot(f, d_prev) / tau;

    let theta = if f_y != 0.0 {
        (dot(&s, f) + beta * dot(&y, d_prev) - upsilon * norm_sq(&y)) / f_y
    } else {
        f64::NAN
    };
    let scale = if theta.is_finite() && theta >= p.theta_lo && theta <= p.theta_hi {
        theta
    } else {
        1.0
    };

    let mut d: Vec<f64> = f.iter().map(|v| -scale * v).collect();
    axpy(beta, d_prev, &mut d);
    axpy(-upsilon, &y, &mut d);
    Ok(d)
}
