use std::sync::Arc;

use crate::dfpm::ProblemDef;
use crate::error::{invalid, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::norm_sq;

/// Sparse feature vector with 0-based indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| v * x[i])
            .sum()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    fn norm_sq(&self) -> f64 {
        norm_sq(&self.values)
    }
}

/// Labelled samples `(a_i, b_i)` with `b_i in {-1, +1}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    /// Feature dimension.
    pub n: usize,
    pub rows: Vec<SparseRow>,
    pub labels: Vec<f64>,
}

impl Dataset {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() {
            return Err(invalid("dataset has mismatched rows and labels"));
        }
        if let Some(b) = self.labels.iter().find(|b| **b != 1.0 && **b != -1.0) {
            return Err(invalid(format!("label {b} is not +1 or -1")));
        }
        for row in &self.rows {
            if row.indices.len() != row.values.len() {
                return Err(invalid("sparse row has mismatched indices and values"));
            }
            if let Some(i) = row.indices.iter().find(|i| **i >= self.n) {
                return Err(invalid(format!(
                    "feature index {} exceeds dimension {}",
                    i + 1,
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// `f(x) = (1/M) sum ln(1 + exp(-b_i a_i^T x)) + (tau/2) ||x||^2` and its
/// gradient mapping.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    pub data: Arc<Dataset>,
    pub tau_reg: f64,
}

impl LogisticProblem {
    pub fn new(data: Dataset, tau_reg: f64) -> Result<Self> {
        if !(tau_reg > 0.0) {
            return Err(invalid("logistic regularization must be positive"));
        }
        if data.is_empty() {
            return Err(invalid("logistic dataset is empty"));
        }
        data.validate()?;
        Ok(Self {
            data: Arc::new(data),
            tau_reg,
        })
    }

    pub fn dim(&self) -> usize {
        self.data.n
    }

    /// Upper bound `tau + (1/(4M)) sum ||a_i||^2` on the Lipschitz constant of the gradient.
    pub fn lipschitz_bound(&self) -> f64 {
        let m = self.data.len() as f64;
        self.tau_reg + self.data.rows.iter().map(SparseRow::norm_sq).sum::<f64>() / (4.0 * m)
    }

    /// The unconstrained monotone equation `grad f(x) = 0`.
    pub fn to_problem(&self) -> ProblemDef {
        let this = self.clone();
        let mut p = ProblemDef::new(
            "logistic",
            self.dim(),
            FeasibleSet::WholeSpace,
            move |x: &[f64]| logistic_f(x, &this),
        );
        p.strong_monotone_mu = Some(self.tau_reg);
        p.lipschitz = Some(self.lipschitz_bound());
        p
    }
}

/// `F(x) = (1/M) sum_i -b_i a_i / (1 + exp(b_i a_i^T x)) + tau x`
///
/// This equals `-b_i exp(-t) / (1 + exp(-t))` with `t = b_i a_i^T x`, but
/// stays finite for any `t`.
pub fn logistic_f(x: &[f64], prob: &LogisticProblem) -> Vec<f64> {
    let data = &prob.data;
    let inv_m = 1.0 / data.len() as f64;
    let mut out: Vec<f64> = x.iter().map(|v| prob.tau_reg * v).collect();
    for (row, &b) in data.rows.iter().zip(&data.labels) {
        let t = b * row.dot(x);
        let factor = -b / (1.0 + t.exp()) * inv_m;
        for (&i, v) in row.indices.iter().zip(&row.values) {
            out[i] += factor * v;
        }
    }
    out
}

/// Objective value `f(x)`, with a stable softplus.
pub fn logistic_loss(x: &[f64], prob: &LogisticProblem) -> f64 {
    let data = &prob.data;
    let loss: f64 = data
        .rows
        .iter()
        .zip(&data.labels)
        .map(|(row, &b)| {
            let u = -b * row.dot(x);
            u.max(0.0) + (-u.abs()).exp().ln_1p()
        })
        .sum();
    loss / data.len() as f64 + 0.5 * prob.tau_reg * norm_sq(x)
}
