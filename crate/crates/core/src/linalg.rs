//! Dense vector helpers.
//!
//! Vectors are plain `[f64]` slices. Public entry points check dimensions;
//! the crate-internal variants assume the caller already did.

use crate::error::{check_dim, Error, Result};

/// Inner product `Σ x_i y_i`.
pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    dot_unchecked(x, x).sqrt()
}

/// `‖x − y‖`.
pub fn distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(distance_unchecked(x, y))
}

/// Max-norm `max_i |x_i|`.
pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Fails with [`Error::NonFinite`] if any coordinate is NaN or infinite.
pub fn ensure_finite(x: &[f64], what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[inline]
pub(crate) fn dot_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn distance_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `y ← y + alpha·x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major dense square matrix, used for the space-transformation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `B·v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot_unchecked(self.row(i), v)).collect()
    }

    /// `Bᵀ·v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, vi) in v.iter().enumerate() {
            axpy(*vi, self.row(i), &mut out);
        }
        out
    }

    /// Rank-one update `B ← B + scale·u·wᵀ`.
    pub fn rank_one_update(&mut self, scale: f64, u: &[f64], w: &[f64]) {
        let n = self.n;
        for (i, ui) in u.iter().enumerate() {
            let s = scale * ui;
            if s != 0.0 {
                axpy(s, w, &mut self.data[i * n..(i + 1) * n]);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(dot(&[1.5, -2.0, 7.0], &[0.0; 3]).unwrap(), 0.0);
        let x = [0.25, -1.0, 3.5, 2.0];
        assert_eq!(dot(&[1.0; 4], &x).unwrap(), x.iter().sum::<f64>());
    }

    #[test]
    fn dot_rejects_mismatch() {
        assert_eq!(
            dot(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(norm2(&[0.0, 0.0]), 0.0);
        assert_eq!(norm2(&[1.0; 4]), 2.0);
    }

    #[test]
    fn rank_one_and_transpose() {
        let mut b = SquareMatrix::identity(3);
        b.rank_one_update(2.0, &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]);
        assert_eq!(b.mul_vec(&[0.0, 1.0, 0.0]), vec![2.0, 1.0, 2.0]);
        assert_eq!(b.tr_mul_vec(&[1.0, 0.0, 0.0]), vec![1.0, 2.0, 0.0]);
    }

    fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..20).prop_flat_map(|n| {
            (
                prop::collection::vec(-1e3..1e3f64, n),
                prop::collection::vec(-1e3..1e3f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn triangle_inequality((x, y) in vec_pair()) {
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let rhs = norm2(&x) + norm2(&y);
            prop_assert!(norm2(&s) <= rhs + 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn cauchy_schwarz((x, y) in vec_pair()) {
            let rhs = norm2(&x) * norm2(&y);
            prop_assert!(dot(&x, &y).unwrap().abs() <= rhs + 1e-12 * rhs.max(1.0));
        }
    }
}
