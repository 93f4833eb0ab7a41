//! Simplex-constrained coefficient problem
//!
//! ```text
//! minimize ||R^T a||^2 + lambda ||a||^2   subject to  sum(a) = 1, a >= 0
//! ```
//!
//! The window holds at most a handful of residuals, so the problem is solved
//! exactly by enumerating every nonempty support set: on a fixed support the
//! inequality constraints drop out and the KKT system
//!
//! ```text
//! [ H  1 ] [ a ]   [ 0 ]
//! [ 1' 0 ] [ nu] = [ 1 ]
//! ```
//!
//! is a small dense solve. Supports whose solution leaves the simplex, or
//! whose KKT matrix is singular, are skipped. Singleton supports always
//! produce a feasible vertex, so a minimizer is always found.

use super::AaCoefficients;

/// Supports are enumerated as bitmasks, so the window is capped well below 64.
pub const MAX_SIMPLEX_WINDOW: usize = 16;

const NEGATIVE_TOL: f64 = 1e-12;

/// Gram matrix `G_ij = r_i^T r_j` of the window residuals.
pub fn gram(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    let p = rows.len();
    let mut g = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            let v = crate::linalg::dot(rows[i], rows[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// `a^T (G + lambda I) a`
pub fn objective(gram: &[Vec<f64>], lambda: f64, a: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, ai) in a.iter().enumerate() {
        let row: f64 = gram[i].iter().zip(a).map(|(g, aj)| g * aj).sum();
        total += ai * (row + lambda * ai);
    }
    total
}

/// Exact minimizer over the probability simplex for a precomputed Gram matrix.
pub fn solve_simplex_gram(gram: &[Vec<f64>], lambda: f64) -> AaCoefficients {
    let p = gram.len();
    assert!(p >= 1, "coefficient problem needs at least one residual");
    assert!(
        p <= MAX_SIMPLEX_WINDOW,
        "window of {p} residuals is too large for support enumeration"
    );
    if p == 1 {
        return AaCoefficients { a: vec![1.0] };
    }

    // The minimizer is invariant under positive scaling of the objective;
    // normalizing keeps the KKT border and the Hessian on comparable scales.
    let scale = (0..p).map(|i| gram[i][i]).fold(0.0f64, f64::max) + lambda;
    if !(scale > 0.0) || !scale.is_finite() {
        // All residuals vanish and there is no regularization: every point of
        // the simplex is optimal. Take the newest iterate.
        let mut a = vec![0.0; p];
        a[p - 1] = 1.0;
        return AaCoefficients { a };
    }
    let hess: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| (gram[i][j] + if i == j { lambda } else { 0.0 }) / scale)
                .collect()
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut support = Vec::with_capacity(p);
    for mask in 1u32..(1u32 << p) {
        support.clear();
        support.extend((0..p).filter(|i| mask & (1 << i) != 0));
        let Some(local) = solve_on_support(&hess, &support) else {
            continue;
        };
        if local.iter().any(|v| !v.is_finite() || *v < -NEGATIVE_TOL) {
            continue;
        }
        let mut a = vec![0.0; p];
        for (&i, v) in support.iter().zip(&local) {
            a[i] = v.max(0.0);
        }
        let total: f64 = a.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        for v in a.iter_mut() {
            *v /= total;
        }
        let value = objective(&hess, 0.0, &a);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, a));
        }
    }
    let (_, a) = best.expect("singleton supports are always feasible");
    AaCoefficients { a }
}

/// Solves the equality-constrained problem restricted to `support`.
fn solve_on_support(hess: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let s = support.len();
    let dim = s + 1;
    let mut kkt = vec![vec![0.0; dim + 1]; dim];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            kkt[r][c] = hess[i][j];
        }
        kkt[r][s] = 1.0;
        kkt[s][r] = 1.0;
    }
    kkt[s][dim] = 1.0;
    let sol = gaussian_solve(kkt)?;
    Some(sol[..s].to_vec())
}

/// Solves an augmented system `[A | b]` by elimination with partial pivoting.
fn gaussian_solve(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    let scale = m
        .iter()
        .flat_map(|row| row[..n].iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-13 * scale.max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= tol {
            return None;
        }
        m.swap(col, pivot);
        let (upper, lower) = m.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot_row[col];
            if factor != 0.0 {
                for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= factor * p;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| m[row][c] * x[c]).sum();
        x[row] = (m[row][n] - tail) / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_solve_detects_singularity() {
        let m = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        assert!(gaussian_solve(m).is_none());
        let m = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 3.0]];
        assert_eq!(gaussian_solve(m).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn zero_residuals_pick_newest() {
        let g = vec![vec![0.0; 3]; 3];
        assert_eq!(solve_simplex_gram(&g, 0.0).a, vec![0.0, 0.0, 1.0]);
        // with regularization the uniform point is the unique minimizer
        let a = solve_simplex_gram(&g, 1e-10).a;
        for v in a {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_residuals_hit_a_vertex() {
        let r = [1.0, 2.0];
        let g = gram(&[&r, &r]);
        let a = solve_simplex_gram(&g, 0.0).a;
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((objective(&g, 0.0, &a) - 5.0).abs() < 1e-12);
    }
}
