//! Feasible sets with closed-form Euclidean projections.

use crate::error::{invalid, Result};
use crate::linalg::all_finite;

/// Closed convex set `C` of the constrained problem.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// `{x : x_i >= 0}`
    NonnegativeOrthant,
    /// `{x : lower_i <= x_i <= upper_i}`
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `R^n`, no constraint.
    WholeSpace,
}

impl FeasibleSet {
    /// Builds a box, rejecting mismatched or crossed bounds.
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(invalid(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| !(l <= u)) {
            return Err(invalid(format!("box bound {i}: lower > upper")));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Projects `x` onto the set.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.project_in_place(&mut out)?;
        Ok(out)
    }

    /// Projects `x` onto the set, overwriting it.
    pub fn project_in_place(&self, x: &mut [f64]) -> Result<()> {
        if !all_finite(x) {
            return Err(invalid("cannot project a non-finite point"));
        }
        match self {
            FeasibleSet::NonnegativeOrthant => {
                for v in x.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            FeasibleSet::Box { lower, upper } => {
                if lower.len() != x.len() {
                    return Err(invalid(format!(
                        "point has dimension {}, box has {}",
                        x.len(),
                        lower.len()
                    )));
                }
                for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
                    *v = v.max(*l).min(*u);
                }
            }
            FeasibleSet::WholeSpace => {}
        }
        Ok(())
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            FeasibleSet::NonnegativeOrthant => x.iter().all(|v| *v >= 0.0),
            FeasibleSet::Box { lower, upper } => {
                lower.len() == x.len()
                    && x
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(v, (l, u))| *l <= *v && *v <= *u)
            }
            FeasibleSet::WholeSpace => true,
        }
    }
}

/// Free-function form of [`FeasibleSet::project`].
pub fn project(set: &FeasibleSet, x: &[f64]) -> Result<Vec<f64>> {
    set.project(x)
}

/// `min(max(s, t1), t2)`: the scalar projection onto `[t1, t2]` used by the
/// line-search acceptance test.
pub fn clamp_scalar(s: f64, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 <= t2) {
        return Err(invalid(format!("clamp interval [{t1}, {t2}] is empty")));
    }
    Ok(s.max(t1).min(t2))
}
