//! Separable ravine benchmark `f(x) = Σ 1.2^{i−1}·|x_i − 1|` with closed-form
//! optima under a box or under `Σ x_i ≤ b` on the unit box.

use crate::error::{check_dim, Error, Result};
use crate::oracle::Oracle;
use crate::sets::{Bounds, FeasibleSet};

pub const RAVINE_BASE: f64 = 1.2;

#[derive(Debug, Clone, PartialEq)]
pub struct RavineProblem {
    weights: Vec<f64>,
    set: FeasibleSet,
    budget: Option<f64>,
}

/// Accuracy of an approximate solution against the known optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    /// `max_i |x_i − x*_i|`
    pub delta: f64,
    /// `|f(x) − f(x*)|`
    pub epsilon: f64,
}

pub fn ravine_weights(n: usize) -> Vec<f64> {
    (0..n).map(|i| RAVINE_BASE.powi(i as i32)).collect()
}

impl RavineProblem {
    /// Ravine function over an arbitrary box.
    pub fn boxed(bounds: Bounds) -> Self {
        Self {
            weights: ravine_weights(bounds.dim()),
            set: FeasibleSet::boxed(bounds),
            budget: None,
        }
    }

    pub fn unit_box(n: usize) -> Result<Self> {
        Ok(Self::boxed(Bounds::uniform(n, 0.0, 1.0)?))
    }

    /// Ravine function over `{x ∈ [0,1]ⁿ : Σ x_i ≤ budget}`, `0 ≤ budget ≤ n`.
    pub fn with_budget(n: usize, budget: f64) -> Result<Self> {
        if !(0.0..=n as f64).contains(&budget) {
            return Err(Error::InvalidParameter(format!("budget {budget} outside [0, {n}]")));
        }
        Ok(Self {
            weights: ravine_weights(n),
            set: FeasibleSet::unit_box_with_budget(n, budget)?,
            budget: Some(budget),
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        Ok(ravine_value(&self.weights, x))
    }

    /// Component `i` is `w_i·sign(x_i − 1)` with `sign(0) = 0`.
    pub fn subgrad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n(), x.len())?;
        Ok(ravine_subgrad(&self.weights, x))
    }

    /// Objective oracle with the analytic subgradient.
    pub fn oracle(&self) -> Oracle {
        let w = self.weights.clone();
        let w2 = self.weights.clone();
        let n = self.n();
        Oracle::try_new(move |x| {
            check_dim(n, x.len())?;
            Ok(ravine_value(&w, x))
        })
        .try_with_subgradient(move |x| {
            check_dim(n, x.len())?;
            Ok(ravine_subgrad(&w2, x))
        })
    }

    /// `(x*, f(x*))`.
    pub fn known_optimum(&self) -> Result<(Vec<f64>, f64)> {
        let x = match (&self.set, self.budget) {
            (FeasibleSet::BoxOnly(b), None) => b
                .lower()
                .iter()
                .zip(b.upper())
                .map(|(c, d)| c.max(d.min(1.0)))
                .collect(),
            (FeasibleSet::BoxHalfspace(..), Some(budget)) => budget_optimum(self.n(), budget),
            _ => {
                return Err(Error::UnsupportedSet(
                    "ravine optimum known only for box and box-budget sets",
                ))
            }
        };
        let f = ravine_value(&self.weights, &x);
        Ok((x, f))
    }

    pub fn accuracy(&self, x: &[f64]) -> Result<AccuracyReport> {
        check_dim(self.n(), x.len())?;
        let (xs, fs) = self.known_optimum()?;
        let delta = x.iter().zip(&xs).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
        let epsilon = (ravine_value(&self.weights, x) - fs).abs();
        Ok(AccuracyReport { delta, epsilon })
    }
}

/// Zeros on the low-weight coordinates, the fractional part of `b` next,
/// ones on the `⌊b⌋` highest-weight coordinates.
fn budget_optimum(n: usize, budget: f64) -> Vec<f64> {
    let whole = budget.floor() as usize;
    if whole >= n {
        return vec![1.0; n];
    }
    let mut x = vec![0.0; n];
    // 0-based position of coordinate n − ⌊b⌋
    x[n - whole - 1] = budget - budget.floor();
    for xi in &mut x[n - whole..] {
        *xi = 1.0;
    }
    x
}

pub fn ravine_value(weights: &[f64], x: &[f64]) -> f64 {
    weights.iter().zip(x).map(|(w, v)| w * (v - 1.0).abs()).sum()
}

pub fn ravine_subgrad(weights: &[f64], x: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(x)
        .map(|(w, v)| {
            let s = v - 1.0;
            if s > 0.0 {
                *w
            } else if s < 0.0 {
                -w
            } else {
                0.0
            }
        })
        .collect()
}
