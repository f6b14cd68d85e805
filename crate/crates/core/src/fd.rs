//! Finite-difference estimates of (generalized) gradients.

use crate::error::{Error, Result};

/// Differencing scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    /// `(F(x + h·e_i) − F(x)) / h`, n + 1 evaluations.
    #[default]
    Forward,
    /// `(F(x + h·e_i) − F(x − h·e_i)) / 2h`, 2n evaluations.
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdParams {
    /// Probe step, `√eps ≈ 1.4901e-8` by default.
    pub step: f64,
    pub scheme: FdScheme,
    /// Evaluate coordinate probes concurrently. Requires a reentrant value
    /// function; ignored without the `parallel` feature.
    pub parallel: bool,
}

impl Default for FdParams {
    fn default() -> Self {
        Self {
            step: f64::EPSILON.sqrt(),
            scheme: FdScheme::Forward,
            parallel: false,
        }
    }
}

impl FdParams {
    pub fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "fd step must be positive, got {}",
                self.step
            )))
        }
    }
}

/// Finite-difference gradient of `f` at `x`.
pub fn fd_gradient<F>(f: F, x: &[f64], params: &FdParams) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    match params.scheme {
        FdScheme::Forward => {
            let fx = probe(&f, x)?;
            fd_gradient_with_base(f, x, fx, params)
        }
        FdScheme::Central => fd_gradient_with_base(f, x, f64::NAN, params),
    }
}

/// As [`fd_gradient`], reusing an already known `F(x)` for the forward
/// scheme. `fx` is ignored by the central scheme.
pub fn fd_gradient_with_base<F>(f: F, x: &[f64], fx: f64, params: &FdParams) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    params.validate()?;
    let h = params.step;
    let component = |i: usize| -> Result<f64> {
        let mut xp = x.to_vec();
        match params.scheme {
            FdScheme::Forward => {
                xp[i] += h;
                Ok((probe(&f, &xp)? - fx) / h)
            }
            FdScheme::Central => {
                xp[i] = x[i] + h;
                let up = probe(&f, &xp)?;
                xp[i] = x[i] - h;
                let down = probe(&f, &xp)?;
                Ok((up - down) / (2.0 * h))
            }
        }
    };

    #[cfg(feature = "parallel")]
    if params.parallel {
        use rayon::prelude::*;
        return (0..x.len()).into_par_iter().map(component).collect();
    }
    (0..x.len()).map(component).collect()
}

fn probe<F>(f: &F, x: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("finite-difference probe"))
    }
}
