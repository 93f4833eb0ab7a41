//! Dolan–Moré performance profiles over aggregated result rows.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ResultRow;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Iterations,
    FunctionEvals,
    CpuTime,
}

impl Metric {
    fn of(self, row: &ResultRow) -> f64 {
        match self {
            Metric::Iterations => row.mean_iter,
            Metric::FunctionEvals => row.mean_nf,
            Metric::CpuTime => row.mean_tcpu_seconds,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Iterations => "iter",
            Metric::FunctionEvals => "nf",
            Metric::CpuTime => "tcpu",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iter" | "iterations" => Ok(Metric::Iterations),
            "nf" | "fevals" => Ok(Metric::FunctionEvals),
            "tcpu" | "time" => Ok(Metric::CpuTime),
            _ => Err(invalid(format!("unknown metric {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver: String,
    /// `rho[i]` is the fraction of instances solved within `thetas[i]` of the best.
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProfile {
    pub metric: Metric,
    /// Sorted distinct finite ratios; every curve is a step function on them.
    pub thetas: Vec<f64>,
    pub curves: Vec<ProfileCurve>,
}

impl PerformanceProfile {
    /// Value of a solver's curve at an arbitrary `theta >= 1`.
    pub fn rho_at(&self, solver: &str, theta: f64) -> Option<f64> {
        let curve = self.curves.iter().find(|c| c.solver == solver)?;
        let idx = self.thetas.partition_point(|t| *t <= theta);
        Some(if idx == 0 { 0.0 } else { curve.rho[idx - 1] })
    }
}

/// Builds the profile of every solver appearing in `rows`.
///
/// An instance is a distinct `(problem, n)` pair. A row with any failed run,
/// or a missing row, counts as unsolved (ratio `+inf`). When the best metric
/// on an instance is zero, ratios are taken on `metric + 1`.
pub fn performance_profile(rows: &[ResultRow], metric: Metric) -> Result<PerformanceProfile> {
    if rows.is_empty() {
        return Err(invalid("performance profile needs at least one row"));
    }
    let mut instances: Vec<(&str, usize)> = Vec::new();
    let mut solvers: Vec<&str> = Vec::new();
    for r in rows {
        if !instances.contains(&(r.problem.as_str(), r.n)) {
            instances.push((r.problem.as_str(), r.n));
        }
        if !solvers.contains(&r.solver.as_str()) {
            solvers.push(r.solver.as_str());
        }
    }
    if solvers.len() < 2 {
        return Err(invalid("performance profile needs at least two solvers"));
    }

    // ratios[s][p]
    let mut ratios = vec![vec![f64::INFINITY; instances.len()]; solvers.len()];
    for (p, &(problem, n)) in instances.iter().enumerate() {
        let values: Vec<f64> = solvers
            .iter()
            .map(|&s| {
                rows.iter()
                    .find(|r| r.problem == problem && r.n == n && r.solver == s)
                    .filter(|r| r.failures == 0)
                    .map(|r| metric.of(r))
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            continue;
        }
        for (s, v) in values.iter().enumerate() {
            if v.is_finite() {
                ratios[s][p] = if best > 0.0 { v / best } else { (v + 1.0) / (best + 1.0) };
            }
        }
    }

    let mut thetas: Vec<f64> = ratios.iter().flatten().copied().filter(|r| r.is_finite()).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();

    let total = instances.len() as f64;
    let curves = solvers
        .iter()
        .zip(&ratios)
        .map(|(s, rs)| ProfileCurve {
            solver: s.to_string(),
            rho: thetas
                .iter()
                .map(|t| rs.iter().filter(|r| **r <= *t).count() as f64 / total)
                .collect(),
        })
        .collect();
    Ok(PerformanceProfile {
        metric,
        thetas,
        curves,
    })
}
