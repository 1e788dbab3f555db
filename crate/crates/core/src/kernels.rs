//! Stationary covariance functions and the matrices built from them.
//!
//! Both families are stationary, so `k(x, x) = outputscale` everywhere and the
//! kernel bound used by the confidence schedules is `kappa = outputscale`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub type Point = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Rbf,
    Matern52,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// One lengthscale per input dimension.
    pub lengthscale: Vec<f64>,
    pub outputscale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: Vec<f64>, outputscale: f64) -> Result<Self> {
        let spec = Self {
            family,
            lengthscale,
            outputscale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rbf(lengthscale: f64, outputscale: f64) -> Self {
        Self::new(KernelFamily::Rbf, vec![lengthscale], outputscale)
            .expect("positive rbf hyperparameters")
    }

    pub fn matern52(lengthscale: f64, outputscale: f64) -> Self {
        Self::new(KernelFamily::Matern52, vec![lengthscale], outputscale)
            .expect("positive matern hyperparameters")
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengthscale.is_empty() {
            return Err(Error::invalid(
                "lengthscale",
                "at least one dimension required",
            ));
        }
        if self
            .lengthscale
            .iter()
            .any(|l| !(l.is_finite() && *l > 0.0))
        {
            return Err(Error::invalid("lengthscale", "must be finite and > 0"));
        }
        if !(self.outputscale.is_finite() && self.outputscale > 0.0) {
            return Err(Error::invalid("outputscale", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lengthscale.len()
    }

    /// Kernel bound `sup_x k(x, x)`.
    pub fn kappa(&self) -> f64 {
        self.outputscale
    }

    /// Largest diagonal jitter tried before a factorization is declared failed.
    pub fn max_jitter(&self) -> f64 {
        1e-6 * self.outputscale
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(y)
            .zip(&self.lengthscale)
            .map(|((a, b), l)| {
                let d = (a - b) / l;
                d * d
            })
            .sum();
        match self.family {
            KernelFamily::Rbf => self.outputscale * (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                let s5r = (5.0 * r2).sqrt();
                self.outputscale * (1.0 + s5r + 5.0 * r2 / 3.0) * (-s5r).exp()
            }
        }
    }

    pub fn gram_matrix(&self, xs: &[Point]) -> Result<DMatrix<f64>> {
        for x in xs {
            self.check_dim(x)?;
        }
        let n = xs.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.outputscale;
            for j in 0..i {
                let v = self.eval_unchecked(&xs[i], &xs[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Cross-covariance matrix `[k(a_i, b_j)]`.
    pub fn cross_matrix(&self, a: &[Point], b: &[Point]) -> Result<DMatrix<f64>> {
        for x in a.iter().chain(b) {
            self.check_dim(x)?;
        }
        Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| {
            self.eval_unchecked(&a[i], &b[j])
        }))
    }

    /// The vector `k_t(x) = [k(x, x_1), ..., k(x, x_t)]`.
    pub fn cross_vector(&self, xs: &[Point], x: &[f64]) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        Ok(DVector::from_iterator(
            xs.len(),
            xs.iter().map(|xi| self.eval_unchecked(xi, x)),
        ))
    }
}

/// `0.5 * logdet(I + K / noise_var)` on the given points.
pub fn info_gain(spec: &KernelSpec, xs: &[Point], noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) {
        return Err(Error::invalid("noise_var", "must be > 0"));
    }
    if xs.is_empty() {
        return Ok(0.0);
    }
    let mut m = spec.gram_matrix(xs)? / noise_var;
    for i in 0..xs.len() {
        m[(i, i)] += 1.0;
    }
    let factor = linalg::cholesky_jittered(&m, spec.max_jitter())?;
    Ok(0.5 * linalg::log_det(&factor))
}

/// Running information gain over the queried points, used as the computable
/// stand-in for the maximum information gain.
#[derive(Debug, Clone)]
pub struct InfoGainTracker {
    spec: KernelSpec,
    noise_var: f64,
    points: Vec<Point>,
    value: f64,
}

impl InfoGainTracker {
    pub fn new(spec: KernelSpec, noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0) {
            return Err(Error::invalid("noise_var", "must be > 0"));
        }
        Ok(Self {
            spec,
            noise_var,
            points: Vec::new(),
            value: 0.0,
        })
    }

    pub fn push(&mut self, x: Point) -> Result<f64> {
        self.points.push(x);
        let value = info_gain(&self.spec, &self.points, self.noise_var)?;
        // logdet is monotone under PSD updates; clamp away round-off dips
        self.value = value.max(self.value);
        Ok(self.value)
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rbf_diagonal_is_outputscale() {
        let k = KernelSpec::rbf(1.0, 1.0);
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), 1.0);
    }

    #[test]
    fn rbf_unit_distance() {
        let k = KernelSpec::rbf(1.0, 1.0);
        let v = k.eval(&[0.0], &[1.0]).unwrap();
        assert!((v - 0.606_530_659_712_633_4).abs() < 1e-15);
    }

    #[test]
    fn matern_diagonal_is_outputscale() {
        let k = KernelSpec::new(KernelFamily::Matern52, vec![0.3, 2.0], 2.5).unwrap();
        assert_eq!(k.eval(&[0.1, -4.0], &[0.1, -4.0]).unwrap(), 2.5);
    }

    #[test]
    fn matern_known_value() {
        // (1 + sqrt5 + 5/3) exp(-sqrt5) at unit scaled distance
        let k = KernelSpec::matern52(1.0, 1.0);
        let v = k.eval(&[0.0], &[1.0]).unwrap();
        assert!((v - 0.523_994_108_831_820_3).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = KernelSpec::rbf(1.0, 1.0);
        assert_eq!(
            k.eval(&[0.0, 1.0], &[0.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
        assert!(k.gram_matrix(&[vec![0.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(KernelSpec::new(KernelFamily::Rbf, vec![0.0], 1.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Rbf, vec![1.0], -1.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Rbf, vec![], 1.0).is_err());
    }

    #[test]
    fn gram_examples() {
        let k = KernelSpec::rbf(1.0, 1.0);
        let g = k.gram_matrix(&[vec![0.7]]).unwrap();
        assert_eq!(g, DMatrix::from_element(1, 1, 1.0));
        let g = k.gram_matrix(&[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(g, DMatrix::from_element(2, 2, 1.0));
        let g = k.gram_matrix(&[vec![0.0], vec![1.0]]).unwrap();
        assert!((g[(0, 1)] - 0.606_53).abs() < 1e-5);
        assert_eq!(g[(0, 1)], g[(1, 0)]);
    }

    #[test]
    fn info_gain_examples() {
        let k = KernelSpec::rbf(1.0, 1.0);
        assert_eq!(info_gain(&k, &[], 1.0).unwrap(), 0.0);
        let v = info_gain(&k, &[vec![0.4]], 1.0).unwrap();
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-14);
        assert!(info_gain(&k, &[vec![0.4]], 0.0).is_err());
    }

    #[test]
    fn info_gain_tracker_is_monotone() {
        let mut t = InfoGainTracker::new(KernelSpec::rbf(0.2, 1.0), 0.1).unwrap();
        let mut prev = 0.0;
        for i in 0..30 {
            let v = t.push(vec![(i as f64 * 0.37) % 1.0]).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    fn points(dim: usize, n: usize) -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), 1..n)
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            x in prop::collection::vec(-5.0..5.0f64, 2),
            y in prop::collection::vec(-5.0..5.0f64, 2),
            l in 0.05..3.0f64,
            os in 0.1..4.0f64,
            matern in any::<bool>(),
        ) {
            let family = if matern { KernelFamily::Matern52 } else { KernelFamily::Rbf };
            let k = KernelSpec::new(family, vec![l, 2.0 * l], os).unwrap();
            let a = k.eval(&x, &y).unwrap();
            prop_assert_eq!(a, k.eval(&y, &x).unwrap());
            prop_assert!(a <= k.kappa() && a >= 0.0);
            prop_assert_eq!(k.eval(&x, &x).unwrap(), k.kappa());
        }

        #[test]
        fn gram_factorizes_with_small_jitter(xs in points(2, 25), l in 0.1..2.0f64, os in 0.5..3.0f64) {
            let k = KernelSpec::new(KernelFamily::Rbf, vec![l, l], os).unwrap();
            let g = k.gram_matrix(&xs).unwrap();
            prop_assert!(linalg::cholesky_jittered(&g, k.max_jitter()).is_ok());
        }

        #[test]
        fn info_gain_nondecreasing(xs in points(1, 15), extra in -3.0..3.0f64) {
            let k = KernelSpec::matern52(0.5, 1.0);
            let before = info_gain(&k, &xs, 0.3).unwrap();
            let mut more = xs.clone();
            more.push(vec![extra]);
            let after = info_gain(&k, &more, 0.3).unwrap();
            prop_assert!(after >= before - 1e-12);
        }
    }
}
