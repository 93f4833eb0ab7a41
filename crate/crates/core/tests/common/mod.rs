//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use aadfpm::anderson::objective;
use aadfpm::DirectionState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// A direction-history state at `k >= 1` with independent Gaussian pieces of
/// random scales, plus the current point and residual.
pub struct SampledState {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub state: DirectionState,
}

pub fn sample_state(rng: &mut ChaCha8Rng) -> SampledState {
    let n = rng.gen_range(2..=12);
    let mut scale = || 10f64.powf(rng.gen_range(-2.0..2.0));
    let (sx, sxp, sf, sfp, sd) = (scale(), scale(), scale(), scale(), scale());
    let x = gaussian(rng, n, sx);
    let x_prev = gaussian(rng, n, sxp);
    let f = gaussian(rng, n, sf);
    let f_prev = gaussian(rng, n, sfp);
    let d_prev = gaussian(rng, n, sd);
    SampledState {
        x,
        f,
        state: DirectionState::new(rng.gen_range(1..50), x_prev, f_prev, d_prev),
    }
}

/// Brute-force minimum of `a^T (G + lambda I) a` over the simplex.
///
/// All but the last two coordinates run over the grid `{0, h, 2h, ...}`; the
/// remaining one-dimensional quadratic is minimized in closed form. The
/// returned value is within `grid_gap` of the true minimum.
pub fn simplex_grid_oracle(gram: &[Vec<f64>], lambda: f64, h: f64) -> (f64, Vec<f64>) {
    let p = gram.len();
    let steps = (1.0 / h).round() as usize;
    let mut best = (f64::INFINITY, vec![0.0; p]);
    let mut a = vec![0.0; p];
    if p == 1 {
        a[0] = 1.0;
        return (objective(gram, lambda, &a), a);
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        gram: &[Vec<f64>],
        lambda: f64,
        steps: usize,
        h: f64,
        idx: usize,
        used: usize,
        a: &mut Vec<f64>,
        best: &mut (f64, Vec<f64>),
    ) {
        let p = a.len();
        if idx == p - 2 {
            let rest = 1.0 - used as f64 * h;
            line_minimum(gram, lambda, rest.max(0.0), a, best);
            return;
        }
        for i in 0..=(steps - used) {
            a[idx] = i as f64 * h;
            rec(gram, lambda, steps, h, idx + 1, used + i, a, best);
        }
        a[idx] = 0.0;
    }
    rec(gram, lambda, steps, h, 0, 0, &mut a, &mut best);
    best
}

/// Minimizes over `a[p-2] = t, a[p-1] = rest - t`, `t in [0, rest]`.
fn line_minimum(gram: &[Vec<f64>], lambda: f64, rest: f64, a: &mut [f64], best: &mut (f64, Vec<f64>)) {
    let p = a.len();
    let (i, j) = (p - 2, p - 1);
    // q(t) = q0 + q1 t + q2 t^2 along direction e_i - e_j from t = 0
    a[i] = 0.0;
    a[j] = rest;
    let q0 = objective(gram, lambda, a);
    let mut e = vec![0.0; p];
    e[i] = 1.0;
    e[j] = -1.0;
    let q2 = objective(gram, lambda, &e);
    let cross: f64 = (0..p)
        .map(|r| e[r] * (0..p).map(|c| gram[r][c] * a[c]).sum::<f64>())
        .sum::<f64>()
        + lambda * (e[i] * a[i] + e[j] * a[j]);
    let q1 = 2.0 * cross;
    let mut candidates = vec![0.0, rest];
    if q2 > 0.0 {
        candidates.push((-q1 / (2.0 * q2)).clamp(0.0, rest));
    }
    for t in candidates {
        let v = q0 + q1 * t + q2 * t * t;
        if v < best.0 {
            a[i] = t;
            a[j] = rest - t;
            best.0 = objective(gram, lambda, a);
            best.1 = a.to_vec();
        }
    }
}

/// Bound on `oracle - true minimum` for the grid oracle. Rounding a
/// minimizer's leading coordinates down to the grid and moving the deficit
/// onto the free pair displaces it by at most `h p`.
pub fn grid_gap(gram: &[Vec<f64>], lambda: f64, h: f64) -> f64 {
    let p = gram.len() as f64;
    let hess_norm: f64 = gram
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
        + lambda;
    // |grad| <= 2 ||H|| on the simplex
    let r = h * p;
    2.0 * hess_norm * r + hess_norm * r * r
}
