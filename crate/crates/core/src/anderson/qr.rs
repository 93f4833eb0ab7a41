//! Least squares for the unconstrained coefficient problem.
//!
//! Without the sign constraints the coefficient problem is an ordinary
//! least-squares fit. Two routes are provided:
//!
//! * [`lstsq_min_norm`] factors the matrix from scratch (Householder QR with
//!   column pivoting, then a second QR of the leading rows for the
//!   minimum-norm solution when the matrix is rank deficient);
//! * [`IncrementalQr`] keeps a thin QR factorization of the residual
//!   differences `r_{j+1} - r_j`, which do not change between iterations, so
//!   each step only appends one column and drops the oldest in `O(m n)`.

use std::collections::VecDeque;

use crate::linalg::{axpy, dot, norm};

struct Householder {
    /// Reflector `I - beta v v^T` acting on entries `start..`.
    v: Vec<f64>,
    beta: f64,
    start: usize,
}

impl Householder {
    /// Reflector mapping `x[start..]` onto a multiple of `e_start`.
    /// Returns the reflector and the new leading value.
    fn new(x: &[f64], start: usize) -> (Self, f64) {
        let tail = &x[start..];
        let sigma = norm(tail);
        let mut v = tail.to_vec();
        if sigma == 0.0 {
            return (
                Householder {
                    v,
                    beta: 0.0,
                    start,
                },
                0.0,
            );
        }
        let alpha = if tail[0] >= 0.0 { -sigma } else { sigma };
        v[0] -= alpha;
        let vv = dot(&v, &v);
        let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
        (Householder { v, beta, start }, alpha)
    }

    fn apply(&self, x: &mut [f64]) {
        if self.beta == 0.0 {
            return;
        }
        let seg = &mut x[self.start..];
        let s = self.beta * dot(&self.v, seg);
        axpy(-s, &self.v, seg);
    }
}

/// Householder QR with column pivoting of the `n x p` matrix given by
/// `cols`. Returns the reflectors, the `p x p` triangular factor (row-major,
/// only the first `min(n, p)` rows meaningful) and the column permutation.
fn pivoted_qr(mut cols: Vec<Vec<f64>>) -> (Vec<Householder>, Vec<Vec<f64>>, Vec<usize>) {
    let p = cols.len();
    let n = cols.first().map_or(0, Vec::len);
    let steps = n.min(p);
    let mut perm: Vec<usize> = (0..p).collect();
    let mut reflectors = Vec::with_capacity(steps);
    let mut r = vec![vec![0.0; p]; p];

    for j in 0..steps {
        let pivot = (j..p)
            .max_by(|&a, &b| norm(&cols[a][j..]).total_cmp(&norm(&cols[b][j..])))
            .unwrap_or(j);
        cols.swap(j, pivot);
        perm.swap(j, pivot);
        // previously computed rows of R follow the column swap
        for row in r.iter_mut().take(j) {
            row.swap(j, pivot);
        }
        let (h, lead) = Householder::new(&cols[j], j);
        r[j][j] = lead;
        for c in j + 1..p {
            h.apply(&mut cols[c]);
            r[j][c] = cols[c][j];
        }
        reflectors.push(h);
    }
    (reflectors, r, perm)
}

/// Minimum-norm solution of `min_g ||A g - b||` where `A` has columns `cols`.
pub fn lstsq_min_norm(cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = cols.len();
    if p == 0 {
        return Vec::new();
    }
    let n = b.len();
    let (reflectors, r, perm) = pivoted_qr(cols.to_vec());
    let mut qtb = b.to_vec();
    for h in &reflectors {
        h.apply(&mut qtb);
    }

    let steps = reflectors.len();
    let lead = r[0][0].abs();
    let tol = (n.max(p) as f64) * f64::EPSILON * lead;
    let rank = (0..steps).take_while(|&j| r[j][j].abs() > tol).count();

    let mut g_perm = vec![0.0; p];
    if rank == p {
        back_substitute(&r, &qtb[..p], &mut g_perm);
    } else if rank > 0 {
        // [R11 R12] = S (rank x p, full row rank). With S^T = Q2 R2 the
        // minimum-norm solution of S g = c is g = Q2 R2^{-T} c.
        let st_cols: Vec<Vec<f64>> = (0..rank).map(|i| r[i].clone()).collect();
        let mut q2 = Vec::with_capacity(rank);
        let mut r2 = vec![vec![0.0; rank]; rank];
        let mut work = st_cols;
        for j in 0..rank {
            let (h, lead) = Householder::new(&work[j], j);
            r2[j][j] = lead;
            for c in j + 1..rank {
                h.apply(&mut work[c]);
                r2[j][c] = work[c][j];
            }
            q2.push(h);
        }
        // forward substitution with R2^T
        let mut t = vec![0.0; p];
        for i in 0..rank {
            let s: f64 = (0..i).map(|k| r2[k][i] * t[k]).sum();
            t[i] = (qtb[i] - s) / r2[i][i];
        }
        for h in q2.iter().rev() {
            h.apply(&mut t);
        }
        g_perm = t;
    }

    let mut g = vec![0.0; p];
    for (j, &orig) in perm.iter().enumerate() {
        g[orig] = g_perm[j];
    }
    g
}

fn back_substitute(r: &[Vec<f64>], rhs: &[f64], out: &mut [f64]) {
    let p = out.len();
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|c| r[i][c] * out[c]).sum();
        out[i] = (rhs[i] - s) / r[i][i];
    }
}

/// Maps Walker–Ni difference weights `gamma` to window coefficients:
/// `r_p - sum_i gamma_i (r_{i+1} - r_i) = sum_j a_j r_j`.
pub fn differences_to_coefficients(gamma: &[f64]) -> Vec<f64> {
    let p = gamma.len();
    let mut a = vec![0.0; p + 1];
    for j in 0..=p {
        let up = if j < p { gamma[j] } else { 0.0 };
        let down = if j > 0 { gamma[j - 1] } else { 0.0 };
        a[j] = up - down;
    }
    a[p] += 1.0;
    a
}

/// Relative size below which an appended column counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Thin QR factorization `D = Q R` of a sliding window of columns.
#[derive(Debug, Clone)]
pub struct IncrementalQr {
    capacity: usize,
    cols: VecDeque<Vec<f64>>,
    q: Vec<Vec<f64>>,
    /// Upper triangular, row-major.
    r: Vec<Vec<f64>>,
    degenerate: bool,
}

impl IncrementalQr {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            cols: VecDeque::with_capacity(capacity + 1),
            q: Vec::with_capacity(capacity),
            r: Vec::with_capacity(capacity),
            degenerate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// Whether the stored columns are (numerically) linearly dependent.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn columns(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.cols.iter()
    }

    pub fn clear(&mut self) {
        self.cols.clear();
        self.q.clear();
        self.r.clear();
        self.degenerate = false;
    }

    /// Appends a column, dropping the oldest one when the window is full.
    pub fn push(&mut self, col: Vec<f64>) {
        if self.capacity == 0 {
            return;
        }
        if self.cols.len() == self.capacity {
            self.drop_oldest();
        }
        if self.degenerate {
            self.cols.push_back(col);
            self.rebuild();
        } else {
            self.append(&col);
            self.cols.push_back(col);
        }
    }

    fn rebuild(&mut self) {
        let cols: Vec<Vec<f64>> = self.cols.drain(..).collect();
        self.q.clear();
        self.r.clear();
        self.degenerate = false;
        for col in cols {
            if !self.degenerate {
                self.append(&col);
            }
            self.cols.push_back(col);
        }
    }

    /// Gram–Schmidt with one reorthogonalization pass.
    fn append(&mut self, col: &[f64]) {
        let p = self.q.len();
        let mut w = col.to_vec();
        let mut coeffs = vec![0.0; p];
        for _ in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = dot(qi, &w);
                coeffs[i] += c;
                axpy(-c, qi, &mut w);
            }
        }
        let rho = norm(&w);
        let scale = norm(col);
        if !(rho > DEPENDENCE_TOL * scale) || !rho.is_finite() {
            self.degenerate = true;
            return;
        }
        for v in w.iter_mut() {
            *v /= rho;
        }
        for (row, c) in self.r.iter_mut().zip(&coeffs) {
            row.push(*c);
        }
        let mut last = vec![0.0; p + 1];
        last[p] = rho;
        self.r.push(last);
        self.q.push(w);
    }

    fn drop_oldest(&mut self) {
        self.cols.pop_front();
        if self.degenerate {
            self.rebuild();
            return;
        }
        let p = self.q.len();
        // Removing the first column leaves an upper Hessenberg matrix.
        for row in self.r.iter_mut() {
            row.remove(0);
        }
        for j in 0..p.saturating_sub(1) {
            let a = self.r[j][j];
            let b = self.r[j + 1][j];
            let h = a.hypot(b);
            if h == 0.0 {
                continue;
            }
            let (c, s) = (a / h, b / h);
            for col in j..p - 1 {
                let top = self.r[j][col];
                let bot = self.r[j + 1][col];
                self.r[j][col] = c * top + s * bot;
                self.r[j + 1][col] = -s * top + c * bot;
            }
            let (left, right) = self.q.split_at_mut(j + 1);
            let (qa, qb) = (&mut left[j], &mut right[0]);
            for (u, v) in qa.iter_mut().zip(qb.iter_mut()) {
                let (x, y) = (*u, *v);
                *u = c * x + s * y;
                *v = -s * x + c * y;
            }
        }
        self.r.pop();
        self.q.pop();
    }

    /// Least-squares weights `gamma = argmin ||b - D gamma||`, or `None` when
    /// the window is degenerate.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.degenerate {
            return None;
        }
        let p = self.q.len();
        let c: Vec<f64> = self.q.iter().map(|qi| dot(qi, b)).collect();
        let mut gamma = vec![0.0; p];
        back_substitute(&self.r, &c, &mut gamma);
        Some(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cols(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
        (0..p)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    fn residual(cols: &[Vec<f64>], g: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = b.to_vec();
        for (c, gi) in cols.iter().zip(g) {
            axpy(-gi, c, &mut r);
        }
        r
    }

    #[test]
    fn full_rank_normal_equations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in 1..5 {
            let cols = random_cols(&mut rng, 12, p);
            let b: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = lstsq_min_norm(&cols, &b);
            let res = residual(&cols, &g, &b);
            for c in &cols {
                assert!(dot(c, &res).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // two identical columns: solutions g0 + g1 = t, minimum norm splits evenly
        let c = vec![1.0, 2.0, 0.0];
        let cols = vec![c.clone(), c];
        let g = lstsq_min_norm(&cols, &[2.0, 4.0, 1.0]);
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-12, "{g:?}");
        // zero column contributes nothing
        let cols = vec![vec![0.0; 3], vec![1.0, 0.0, 0.0]];
        let g = lstsq_min_norm(&cols, &[3.0, 1.0, 1.0]);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn difference_mapping_sums_to_one() {
        let a = differences_to_coefficients(&[0.3, -0.2, 0.7]);
        assert_eq!(a.len(), 4);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(a[0], 0.3);
        assert!((a[3] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sliding_window_matches_fresh_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut qr = IncrementalQr::new(3);
        let mut window: VecDeque<Vec<f64>> = VecDeque::new();
        for _ in 0..10 {
            let col: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            qr.push(col.clone());
            window.push_back(col);
            if window.len() > 3 {
                window.pop_front();
            }
            let b: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fresh = lstsq_min_norm(&window.iter().cloned().collect::<Vec<_>>(), &b);
            let inc = qr.solve(&b).unwrap();
            for (x, y) in fresh.iter().zip(&inc) {
                assert!((x - y).abs() < 1e-10, "{fresh:?} vs {inc:?}");
            }
        }
    }

    #[test]
    fn dependent_column_marks_degenerate_and_recovers() {
        let mut qr = IncrementalQr::new(2);
        qr.push(vec![1.0, 0.0, 0.0]);
        qr.push(vec![2.0, 0.0, 0.0]);
        assert!(qr.is_degenerate());
        assert!(qr.solve(&[1.0, 1.0, 1.0]).is_none());
        qr.push(vec![0.0, 1.0, 0.0]);
        assert!(!qr.is_degenerate());
        let g = qr.solve(&[2.0, 3.0, 1.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 3.0).abs() < 1e-12);
    }
}
