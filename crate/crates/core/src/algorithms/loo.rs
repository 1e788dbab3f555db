use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::kernels::{KernelSpec, Point};
use crate::rcgp::RcgpPosterior;
use crate::weights::PimqParams;

fn default_every() -> usize {
    5
}

/// Candidate grid for leave-one-out hyperparameter selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LooSearch {
    /// Candidate lengthscales, applied to every input dimension.
    pub lengthscales: Vec<f64>,
    /// Candidate noise variances in raw target units; empty keeps the configured one.
    #[serde(default)]
    pub noise_vars: Vec<f64>,
    /// Refit cadence in optimization steps.
    #[serde(default = "default_every")]
    pub every: usize,
}

/// `n` values spaced uniformly in log between `lo` and `hi`.
pub fn log_uniform(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(Error::invalid("grid", "need 0 < lo <= hi and n >= 1"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Weighted leave-one-out squared error of one candidate.
///
/// With `weights = None` the model is a standard GP and all points count
/// equally; otherwise the robust model is fit and each squared error is
/// weighted by its normalized observation weight.
pub fn loo_score(
    xs: &[Point],
    ys: &[f64],
    kernel: &KernelSpec,
    noise_var: f64,
    weights: Option<&PimqParams>,
) -> Result<f64> {
    let (loo, w) = match weights {
        None => {
            let gp = GpPosterior::fit(xs, ys, kernel, noise_var)?;
            (gp.loo_means(), vec![1.0; ys.len()])
        }
        Some(params) => {
            let r = RcgpPosterior::fit(xs, ys, kernel, params.clone())?;
            (r.loo_means(), r.corrections().weights.clone())
        }
    };
    let loo = loo.ok_or(Error::NoCandidate)?;
    let total: f64 = w.iter().sum();
    let score = ys
        .iter()
        .zip(&loo)
        .zip(&w)
        .map(|((y, m), w)| w / total * (y - m) * (y - m))
        .sum::<f64>();
    if score.is_finite() {
        Ok(score)
    } else {
        Err(Error::NoCandidate)
    }
}

/// Picks the candidate `(kernel, noise_var)` with the smallest weighted LOO
/// error; earlier candidates win ties and failing candidates are skipped.
/// `weights` builds the weight function for a candidate noise variance.
pub fn fit_hyperparameters_loo(
    xs: &[Point],
    ys: &[f64],
    candidates: &[(KernelSpec, f64)],
    weights: Option<&dyn Fn(f64) -> Result<PimqParams>>,
) -> Result<(KernelSpec, f64)> {
    if xs.len() < 3 {
        return Err(Error::invalid(
            "data",
            "leave-one-out needs at least 3 points",
        ));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, (kernel, noise)) in candidates.iter().enumerate() {
        let params = weights.map(|build| build(*noise)).transpose()?;
        let Ok(score) = loo_score(xs, ys, kernel, *noise, params.as_ref()) else {
            continue;
        };
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((i, score));
        }
    }
    let (i, _) = best.ok_or(Error::NoCandidate)?;
    Ok(candidates[i].clone())
}
