//! Objective oracles: a value function plus an optional subgradient rule.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd::{fd_gradient_with_base, FdParams, FdScheme};

pub type ValueFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
pub type SubgradFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// How an [`Oracle`] produces subgradients.
#[derive(Clone)]
pub enum SubgradientRule {
    None,
    Analytic(SubgradFn),
    FiniteDifference(FdParams),
}

impl fmt::Debug for SubgradientRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("None"),
            Self::Analytic(_) => f.write_str("Analytic"),
            Self::FiniteDifference(p) => f.debug_tuple("FiniteDifference").field(p).finish(),
        }
    }
}

/// Evaluation contract for an objective `f`.
///
/// Values and subgradients are checked for finiteness on every call.
#[derive(Clone)]
pub struct Oracle {
    value: ValueFn,
    subgrad: SubgradientRule,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("subgrad", &self.subgrad)
            .finish_non_exhaustive()
    }
}

impl Oracle {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::try_new(move |x| Ok(value(x)))
    }

    pub fn try_new<F>(value: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            subgrad: SubgradientRule::None,
        }
    }

    pub fn with_subgradient<G>(self, subgrad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.try_with_subgradient(move |x| Ok(subgrad(x)))
    }

    pub fn try_with_subgradient<G>(mut self, subgrad: G) -> Self
    where
        G: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        self.subgrad = SubgradientRule::Analytic(Arc::new(subgrad));
        self
    }

    pub fn with_finite_differences(mut self, params: FdParams) -> Self {
        self.subgrad = SubgradientRule::FiniteDifference(params);
        self
    }

    pub fn subgradient_rule(&self) -> &SubgradientRule {
        &self.subgrad
    }

    pub fn has_subgradient(&self) -> bool {
        !matches!(self.subgrad, SubgradientRule::None)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let v = (self.value)(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("objective value"))
        }
    }

    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.subgrad {
            SubgradientRule::None => Err(Error::MissingSubgradient),
            SubgradientRule::Analytic(g) => checked_subgradient(g(x)?, x.len()),
            SubgradientRule::FiniteDifference(p) => {
                let fx = match p.scheme {
                    FdScheme::Forward => self.value(x)?,
                    FdScheme::Central => f64::NAN,
                };
                fd_gradient_with_base(|y| (self.value)(y), x, fx, p)
            }
        }
    }

    /// Value and subgradient at `x`; the forward-difference rule shares the
    /// base evaluation.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let fx = self.value(x)?;
        let g = match &self.subgrad {
            SubgradientRule::None => return Err(Error::MissingSubgradient),
            SubgradientRule::Analytic(g) => checked_subgradient(g(x)?, x.len())?,
            SubgradientRule::FiniteDifference(p) => fd_gradient_with_base(|y| (self.value)(y), x, fx, p)?,
        };
        Ok((fx, g))
    }

    /// Raw value function, for wrapping inside other oracles.
    pub fn value_fn(&self) -> ValueFn {
        Arc::clone(&self.value)
    }
}

fn checked_subgradient(g: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    crate::error::check_dim(n, g.len())?;
    crate::linalg::ensure_finite(&g, "subgradient")?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_only_oracle_has_no_subgradient() {
        let o = Oracle::new(|x| x[0]);
        assert!(!o.has_subgradient());
        assert_eq!(o.subgradient(&[1.0]), Err(Error::MissingSubgradient));
        assert_eq!(o.value(&[2.0]), Ok(2.0));
    }

    #[test]
    fn non_finite_value_is_rejected() {
        let o = Oracle::new(|x| 1.0 / x[0]);
        assert_eq!(o.value(&[0.0]), Err(Error::NonFinite("objective value")));
    }

    #[test]
    fn analytic_subgradient_dimension_checked() {
        let o = Oracle::new(|x| x[0]).with_subgradient(|_| vec![1.0, 2.0]);
        assert!(matches!(o.evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fd_rule_matches_analytic_on_linear() {
        let o = Oracle::new(|x| 2.0 * x[0] - x[1]).with_finite_differences(FdParams::default());
        let (f, g) = o.evaluate(&[1.0, 1.0]).unwrap();
        assert_eq!(f, 1.0);
        assert!((g[0] - 2.0).abs() < 1e-7 && (g[1] + 1.0).abs() < 1e-7);
        assert_eq!(o.subgradient(&[1.0, 1.0]).unwrap(), g);
    }
}
