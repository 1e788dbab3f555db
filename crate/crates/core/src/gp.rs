//! Zero-mean conjugate GP regression.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, Point};
use crate::posterior::LinearPosterior;

#[derive(Debug, Clone)]
pub struct GpPosterior {
    inner: LinearPosterior,
    ys: Vec<f64>,
    noise_var: f64,
}

impl GpPosterior {
    pub fn fit(xs: &[Point], ys: &[f64], spec: &KernelSpec, noise_var: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid("noise_var", "must be finite and > 0"));
        }
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        let targets = DVector::from_column_slice(ys);
        let noise = DVector::from_element(xs.len(), noise_var);
        let inner = LinearPosterior::fit(xs.to_vec(), &targets, &noise, spec.clone())?;
        Ok(Self {
            inner,
            ys: ys.to_vec(),
            noise_var,
        })
    }

    /// Posterior mean and variance at `x`; variance is clamped at zero.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.inner.predict(x)
    }

    pub fn predict_many(&self, xs: &[Point]) -> Result<Vec<(f64, f64)>> {
        self.inner.predict_many(xs)
    }

    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        self.inner.mean(x)
    }

    pub fn covariance(&self, a: &[Point], b: &[Point]) -> Result<DMatrix<f64>> {
        self.inner.covariance(a, b)
    }

    pub fn inputs(&self) -> &[Point] {
        &self.inner.xs
    }

    pub fn targets(&self) -> &[f64] {
        &self.ys
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.inner.spec
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of predictions whose variance went negative through round-off.
    pub fn clamp_count(&self) -> usize {
        self.inner.clamp_count()
    }

    /// Leave-one-out predictive means via the rank-one identity
    /// `mu_{-i} = y_i - [A^{-1} y]_i / [A^{-1}]_{ii}`.
    pub fn loo_means(&self) -> Option<Vec<f64>> {
        let (diag, alpha) = self.inner.inverse_diagonal()?;
        Some(
            self.ys
                .iter()
                .enumerate()
                .map(|(i, y)| y - alpha[i] / diag[i])
                .collect(),
        )
    }
}
