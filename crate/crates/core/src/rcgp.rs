//! Robust conjugate GP posterior.
//!
//! Observations are reweighted through [`PimqParams`]: the regularized matrix
//! becomes `A = K + sigma^2 J_w` and the targets are shifted to `y - m_w`.
//! Inside the plateau `J_w = 1` and `m_w = 0` exactly, so the linear algebra is
//! bit-for-bit the same as [`GpPosterior`](crate::gp::GpPosterior) on that data.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::kernels::{KernelSpec, Point};
use crate::linalg;
use crate::posterior::LinearPosterior;
use crate::weights::{PimqParams, WeightCorrections};

#[derive(Debug, Clone)]
pub struct RcgpPosterior {
    inner: LinearPosterior,
    ys: Vec<f64>,
    params: PimqParams,
    corrections: WeightCorrections,
}

impl RcgpPosterior {
    pub fn fit(xs: &[Point], ys: &[f64], spec: &KernelSpec, params: PimqParams) -> Result<Self> {
        let corrections = params.corrections(xs, ys)?;
        let noise_var = params.noise_var();
        let targets = DVector::from_iterator(
            ys.len(),
            ys.iter().zip(&corrections.mean_shift).map(|(y, m)| y - m),
        );
        let noise = DVector::from_iterator(
            ys.len(),
            corrections.inflation.iter().map(|j| noise_var * j),
        );
        let inner = LinearPosterior::fit(xs.to_vec(), &targets, &noise, spec.clone())?;
        Ok(Self {
            inner,
            ys: ys.to_vec(),
            params,
            corrections,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.inner.predict(x)
    }

    pub fn predict_many(&self, xs: &[Point]) -> Result<Vec<(f64, f64)>> {
        self.inner.predict_many(xs)
    }

    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        self.inner.mean(x)
    }

    pub fn params(&self) -> &PimqParams {
        &self.params
    }

    pub fn corrections(&self) -> &WeightCorrections {
        &self.corrections
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
        self.params.noise_var()
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clamp_count(&self) -> usize {
        self.inner.clamp_count()
    }

    /// Number of observations currently outside the plateau.
    pub fn outside_count(&self) -> usize {
        self.corrections.outside_count()
    }

    /// Leave-one-out means of the robust model, `z_i - [A^{-1} z]_i / [A^{-1}]_{ii}`
    /// with `z = y - m_w`. These predict the raw `y_i` whenever point `i` sits
    /// inside the plateau.
    pub fn loo_means(&self) -> Option<Vec<f64>> {
        let (diag, alpha) = self.inner.inverse_diagonal()?;
        Some(
            self.ys
                .iter()
                .zip(&self.corrections.mean_shift)
                .enumerate()
                .map(|(i, (y, m))| (y - m) - alpha[i] / diag[i])
                .collect(),
        )
    }
}

/// Difference between the robust posterior mean on `clean ∪ corrupt` and the
/// standard posterior mean on `clean` alone, evaluated through the Schur
/// complement of the corrupted block.
///
/// Every clean point must lie inside the plateau of `params`; this is checked.
pub fn deviation_schur(
    clean: (&[Point], &[f64]),
    corrupt: (&[Point], &[f64]),
    spec: &KernelSpec,
    params: &PimqParams,
    at: &[Point],
) -> Result<Vec<f64>> {
    let (xc, yc) = corrupt;
    if xc.is_empty() {
        return Err(Error::invalid(
            "corrupt",
            "at least one corrupted point required",
        ));
    }
    if xc.len() != yc.len() {
        return Err(Error::LengthMismatch {
            left: xc.len(),
            right: yc.len(),
        });
    }
    let clean_corr = params.corrections(clean.0, clean.1)?;
    if clean_corr.outside_count() > 0 {
        return Err(Error::invalid(
            "clean",
            "all clean points must lie in the plateau",
        ));
    }
    let noise_var = params.noise_var();
    let uc = GpPosterior::fit(clean.0, clean.1, spec, noise_var)?;
    let corr = params.corrections(xc, yc)?;

    let mut s = uc.covariance(xc, xc)?;
    for i in 0..xc.len() {
        s[(i, i)] += noise_var * corr.inflation[i];
    }
    let factor = linalg::cholesky_jittered(&s, spec.max_jitter())?;
    let mut rhs = DVector::zeros(xc.len());
    for i in 0..xc.len() {
        rhs[i] = yc[i] - corr.mean_shift[i] - uc.mean(&xc[i])?;
    }
    let weights = factor.solve(&rhs);
    let cross: DMatrix<f64> = uc.covariance(xc, at)?;
    Ok((cross.transpose() * weights).iter().copied().collect())
}
