//! Shared machinery for posteriors of the form
//! `mean(x) = k(x)^T A^{-1} z`, `var(x) = k(x, x) - k(x)^T A^{-1} k(x)`
//! with `A = K + diag(noise)`.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, Point};
use crate::linalg::{self, Factor};

#[derive(Debug)]
pub(crate) struct LinearPosterior {
    pub(crate) xs: Vec<Point>,
    pub(crate) spec: KernelSpec,
    factor: Option<Factor>,
    alpha: DVector<f64>,
    clamped: AtomicUsize,
}

impl Clone for LinearPosterior {
    fn clone(&self) -> Self {
        Self {
            xs: self.xs.clone(),
            spec: self.spec.clone(),
            factor: self.factor.clone(),
            alpha: self.alpha.clone(),
            clamped: AtomicUsize::new(self.clamped.load(Ordering::Relaxed)),
        }
    }
}

impl LinearPosterior {
    pub(crate) fn fit(
        xs: Vec<Point>,
        targets: &DVector<f64>,
        noise_diag: &DVector<f64>,
        spec: KernelSpec,
    ) -> Result<Self> {
        spec.validate()?;
        if xs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: targets.len(),
            });
        }
        if xs.is_empty() {
            return Ok(Self {
                xs,
                spec,
                factor: None,
                alpha: DVector::zeros(0),
                clamped: AtomicUsize::new(0),
            });
        }
        let mut a = spec.gram_matrix(&xs)?;
        for i in 0..xs.len() {
            a[(i, i)] += noise_diag[i];
        }
        let factor = linalg::cholesky_jittered(&a, spec.max_jitter())?;
        let alpha = factor.solve(targets);
        Ok(Self {
            xs,
            spec,
            factor: Some(factor),
            alpha,
            clamped: AtomicUsize::new(0),
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.xs.len()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        let prior = self.spec.eval(x, x)?;
        let Some(factor) = &self.factor else {
            return Ok((0.0, prior));
        };
        let k = self.spec.cross_vector(&self.xs, x)?;
        let mean = k.dot(&self.alpha);
        let v = linalg::forward_solve(factor, &k);
        let mut var = prior - v.norm_squared();
        if var < 0.0 {
            self.clamped.fetch_add(1, Ordering::Relaxed);
            var = 0.0;
        }
        Ok((mean, var))
    }

    /// Batched [`predict`](Self::predict) over many points.
    pub(crate) fn predict_many(&self, xs: &[Point]) -> Result<Vec<(f64, f64)>> {
        let Some(factor) = &self.factor else {
            return xs
                .iter()
                .map(|x| Ok((0.0, self.spec.eval(x, x)?)))
                .collect();
        };
        let k = self.spec.cross_matrix(&self.xs, xs)?;
        let means = k.tr_mul(&self.alpha);
        let v = factor
            .l_dirty()
            .solve_lower_triangular(&k)
            .expect("cholesky factor has a positive diagonal");
        let mut out = Vec::with_capacity(xs.len());
        for (j, x) in xs.iter().enumerate() {
            let mut var = self.spec.eval_unchecked(x, x) - v.column(j).norm_squared();
            if var < 0.0 {
                self.clamped.fetch_add(1, Ordering::Relaxed);
                var = 0.0;
            }
            out.push((means[j], var));
        }
        Ok(out)
    }

    pub(crate) fn mean(&self, x: &[f64]) -> Result<f64> {
        if self.factor.is_none() {
            self.spec.eval(x, x)?;
            return Ok(0.0);
        }
        Ok(self.spec.cross_vector(&self.xs, x)?.dot(&self.alpha))
    }

    /// Posterior covariance matrix between two point sets.
    pub(crate) fn covariance(&self, a: &[Point], b: &[Point]) -> Result<DMatrix<f64>> {
        let prior = self.spec.cross_matrix(a, b)?;
        let Some(factor) = &self.factor else {
            return Ok(prior);
        };
        let ka = self.spec.cross_matrix(&self.xs, a)?;
        let kb = self.spec.cross_matrix(&self.xs, b)?;
        Ok(prior - ka.transpose() * factor.solve(&kb))
    }

    /// Diagonal of `A^{-1}` and the weights `A^{-1} z`.
    pub(crate) fn inverse_diagonal(&self) -> Option<(DVector<f64>, &DVector<f64>)> {
        let factor = self.factor.as_ref()?;
        Some((factor.inverse().diagonal(), &self.alpha))
    }

    pub(crate) fn clamp_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }
}
