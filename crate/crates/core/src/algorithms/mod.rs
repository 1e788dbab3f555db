//! GP-UCB and its two robust variants.
//!
//! All three share one loop: standardize targets, fit the model(s) on the data
//! gathered so far, maximize `mu + sqrt(beta) sigma`, observe, repeat.
//!
//! * `GpUcb` uses the standard posterior and `beta'_t`.
//! * `FcRcgpUcb` uses one robust model centered at zero with plateau `L_T`.
//! * `A2RcgpUcb` fits the zero-centered anchor first, then a second robust
//!   model (the wrench) centered on the anchor's posterior mean and acts on it.

mod domain;
mod loo;
mod standardize;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use domain::{argmax, maximize, DomainSpec};
pub use loo::{fit_hyperparameters_loo, log_uniform, loo_score, LooSearch};
pub use standardize::{Standardization, Standardizer};

use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::kernels::{info_gain, KernelSpec, Point};
use crate::rcgp::RcgpPosterior;
use crate::schedules::{
    robust_beta, wrench_width_adaptive, AssumptionCase, ScheduleConfig, ScheduleState, TcMode,
    WidthMode,
};
use crate::weights::{c1_bound, cw_from_c1, quantile_half_width, Center, HalfWidth, PimqParams};

/// Floor on the standardized noise variance handed to the models.
const MIN_NOISE_VAR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    GpUcb,
    FcRcgpUcb,
    A2RcgpUcb,
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::GpUcb => "gp_ucb",
            AlgorithmKind::FcRcgpUcb => "fc_rcgp_ucb",
            AlgorithmKind::A2RcgpUcb => "a2_rcgp_ucb",
        }
    }
}

/// How the plateau half-width of the zero-centered model is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlateauPolicy {
    /// `L_T = B_f sqrt(kappa) + N_T(delta / 2)`.
    #[default]
    Theory,
    /// `q` quantile of `|y - median(y)|` on the standardized targets.
    Quantile { q: f64 },
}

/// Where the exploration width `sigma(x)` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaProxy {
    /// Posterior std of the acting robust model.
    #[default]
    Robust,
    /// Posterior std of a standard GP fit on the points inside the acting
    /// model's plateau.
    PrunedGp,
}

fn default_shape() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Kernel in standardized target units.
    pub kernel: KernelSpec,
    /// Observation noise variance in raw target units.
    pub noise_var: f64,
    /// IMQ shape `c` in standardized units.
    #[serde(default = "default_shape")]
    pub shape: f64,
    #[serde(default)]
    pub standardize: Standardization,
    #[serde(default)]
    pub plateau: PlateauPolicy,
    #[serde(default)]
    pub hyperparameters: Option<LooSearch>,
    #[serde(default)]
    pub sigma_proxy: SigmaProxy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub kind: AlgorithmKind,
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    pub domain: DomainSpec,
    pub horizon: usize,
}

/// Models fitted on the data available before one query.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub t: usize,
    pub standardizer: Standardizer,
    pub kernel: KernelSpec,
    /// Standardized noise variance.
    pub noise_var: f64,
    pub schedule: ScheduleState,
    pub beta_prime: f64,
    pub beta: f64,
    /// Outside-plateau count of the acting model.
    pub tc_estimate: usize,
    pub gp: Option<GpPosterior>,
    pub anchor: Option<Arc<RcgpPosterior>>,
    pub wrench: Option<Arc<RcgpPosterior>>,
    /// Set under `SigmaProxy::PrunedGp`; supplies the variance.
    pub pruned: Option<GpPosterior>,
}

impl Fitted {
    /// Mean and variance used by the acquisition at each point.
    pub fn predict_many(&self, xs: &[Point]) -> Result<Vec<(f64, f64)>> {
        let mut out = self.acting_predict_many(xs)?;
        if let Some(p) = &self.pruned {
            for (o, (_, v)) in out.iter_mut().zip(p.predict_many(xs)?) {
                o.1 = v;
            }
        }
        Ok(out)
    }

    fn acting_predict_many(&self, xs: &[Point]) -> Result<Vec<(f64, f64)>> {
        if let Some(w) = &self.wrench {
            w.predict_many(xs)
        } else if let Some(a) = &self.anchor {
            a.predict_many(xs)
        } else if let Some(g) = &self.gp {
            g.predict_many(xs)
        } else {
            Err(Error::invalid("fitted", "no model"))
        }
    }

    /// `mu(x) + sqrt(beta) sigma(x)` in standardized units.
    pub fn acquisition_many(&self, xs: &[Point]) -> Result<Vec<f64>> {
        let root = self.beta.sqrt();
        Ok(self
            .predict_many(xs)?
            .into_iter()
            .map(|(m, v)| m + root * v.sqrt())
            .collect())
    }

    pub fn acquisition(&self, x: &[f64]) -> Result<f64> {
        Ok(self.acquisition_many(&[x.to_vec()])?[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: Point,
    /// Observation as received, raw units.
    pub y: f64,
    pub beta: f64,
    pub tc_estimate: usize,
    /// Acquisition value at `x`, standardized units.
    pub acquisition: f64,
}

#[derive(Debug, Clone)]
pub struct BoState {
    cfg: BoConfig,
    case: AssumptionCase,
    xs: Vec<Point>,
    ys: Vec<f64>,
    t: usize,
    kernel: KernelSpec,
    noise_var: f64,
    initial: Standardizer,
    grid: Option<Vec<Point>>,
    prev_wrench: Option<Arc<RcgpPosterior>>,
}

impl BoState {
    /// Starts a run from an (uncorrupted) initial design.
    pub fn new(cfg: BoConfig, xs: Vec<Point>, ys: Vec<f64>) -> Result<Self> {
        cfg.domain.validate()?;
        cfg.model.kernel.validate()?;
        if cfg.model.kernel.dim() != cfg.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.domain.dim(),
                found: cfg.model.kernel.dim(),
            });
        }
        if !(cfg.model.noise_var.is_finite() && cfg.model.noise_var >= 0.0) {
            return Err(Error::invalid("noise_var", "must be finite and >= 0"));
        }
        if !(cfg.model.shape > 0.0) {
            return Err(Error::invalid("shape", "must be > 0"));
        }
        if let PlateauPolicy::Quantile { q } = cfg.model.plateau {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::invalid("q", "must lie in [0, 1]"));
            }
        }
        if let Some(search) = &cfg.model.hyperparameters {
            if search.lengthscales.is_empty() || search.every == 0 {
                return Err(Error::invalid(
                    "hyperparameters",
                    "need lengthscales and every >= 1",
                ));
            }
        }
        if cfg.horizon == 0 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        let case = cfg.schedule.case.unwrap_or(AssumptionCase::FiniteDomain {
            domain_size: cfg.domain.candidate_count(),
        });
        case.validate()?;
        if cfg.schedule.f_bound.is_some_and(|b| !(b >= 0.0)) {
            return Err(Error::invalid("f_bound", "must be >= 0"));
        }
        let grid = if cfg.domain.dim() == 1 {
            Some(cfg.domain.grid()?)
        } else {
            None
        };
        let initial = Standardizer::zscore(&ys);
        Ok(Self {
            kernel: cfg.model.kernel.clone(),
            noise_var: cfg.model.noise_var,
            cfg,
            case,
            xs,
            ys,
            t: 0,
            initial,
            grid,
            prev_wrench: None,
        })
    }

    pub fn config(&self) -> &BoConfig {
        &self.cfg
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.cfg.kind
    }

    pub fn inputs(&self) -> &[Point] {
        &self.xs
    }

    pub fn targets(&self) -> &[f64] {
        &self.ys
    }

    /// Completed optimization steps.
    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn case(&self) -> AssumptionCase {
        self.case
    }

    pub fn standardizer(&self) -> Standardizer {
        match self.cfg.model.standardize {
            Standardization::Initial => self.initial,
            Standardization::OnlineRobust => Standardizer::robust(&self.ys),
            Standardization::OnlineZscore => Standardizer::zscore(&self.ys),
            Standardization::None => Standardizer::IDENTITY,
        }
    }

    /// Fits the models that select the query of step `steps() + 1`.
    pub fn fit(&self) -> Result<Fitted> {
        let t = self.t + 1;
        let st = self.standardizer();
        let z = st.transform_all(&self.ys);
        let noise_var = st.variance(self.noise_var).max(MIN_NOISE_VAR);
        let model = &self.cfg.model;
        let schedule_cfg = self
            .cfg
            .schedule
            .standardized(st.center, st.scale, self.kernel.kappa());
        let mut schedule = ScheduleState::new(
            &schedule_cfg,
            self.case,
            self.kernel.kappa(),
            noise_var,
            model.shape,
            self.cfg.horizon,
        )?;
        let gamma = match self.case {
            AssumptionCase::Rkhs { .. } => info_gain(&self.kernel, &self.xs, noise_var)?,
            _ => 0.0,
        };
        let beta_prime = schedule.beta_prime(t, gamma)?;
        let mut fitted = Fitted {
            t,
            standardizer: st,
            kernel: self.kernel.clone(),
            noise_var,
            schedule: schedule.clone(),
            beta_prime,
            beta: beta_prime,
            tc_estimate: 0,
            gp: None,
            anchor: None,
            wrench: None,
            pruned: None,
        };

        if self.cfg.kind == AlgorithmKind::GpUcb {
            fitted.gp = Some(GpPosterior::fit(&self.xs, &z, &self.kernel, noise_var)?);
            return Ok(fitted);
        }

        let anchor_width = match model.plateau {
            PlateauPolicy::Theory => schedule.anchor_width,
            PlateauPolicy::Quantile { q } => {
                quantile_half_width(&z, q).unwrap_or(schedule.anchor_width)
            }
        };
        let anchor_params = PimqParams::new(
            noise_var,
            Center::Zero,
            HalfWidth::Fixed(anchor_width),
            model.shape,
        )?;
        let anchor = Arc::new(RcgpPosterior::fit(
            &self.xs,
            &z,
            &self.kernel,
            anchor_params,
        )?);
        schedule.tc_estimate = anchor.outside_count();
        let sup_delta = schedule.kappa.sqrt() * (schedule.beta_prime_horizon.sqrt() + schedule.b_f);
        let cw_anchor = cw_from_c1(
            c1_bound(noise_var, anchor_width, model.shape, sup_delta),
            noise_var,
        );
        schedule.cw_anchor = cw_anchor;
        let beta_anchor = schedule.robust_beta(beta_prime, cw_anchor);

        if self.cfg.kind == AlgorithmKind::FcRcgpUcb {
            fitted.beta = beta_anchor;
            fitted.tc_estimate = schedule.tc_estimate;
            fitted.schedule = schedule;
            fitted.pruned = self.pruned_gp(&anchor, &z, noise_var)?;
            fitted.anchor = Some(anchor);
            return Ok(fitted);
        }

        // wrench width first; its C_w depends on it
        let fixed_width = schedule.wrench_width();
        let width = match schedule.width_mode {
            WidthMode::Fixed => HalfWidth::Fixed(fixed_width),
            WidthMode::Adaptive => {
                let prev = self.prev_wrench.clone();
                let kappa = schedule.kappa;
                let n = schedule.noise_bound;
                HalfWidth::function(move |x| {
                    let sigma = prev
                        .as_ref()
                        .and_then(|p| p.predict(x).ok())
                        .map_or(kappa.sqrt(), |(_, v)| v.sqrt());
                    wrench_width_adaptive(beta_anchor, sigma, n)
                })
            }
        };
        let cw_wrench = schedule.cw_wrench(fixed_width);
        let center_model = Arc::clone(&anchor);
        let center = Center::function(move |x| {
            center_model
                .mean(x)
                .expect("inputs are dimension-checked before fitting")
        });
        let wrench_params = PimqParams::new(noise_var, center, width, model.shape)?;
        let wrench = RcgpPosterior::fit(&self.xs, &z, &self.kernel, wrench_params)?;
        let tc_wrench = wrench.outside_count();
        let effective = match schedule.tc_mode {
            TcMode::UseEstimated => tc_wrench,
            TcMode::ForceZero => 0,
        };
        fitted.beta = robust_beta(beta_prime, cw_wrench, effective);
        fitted.tc_estimate = tc_wrench;
        fitted.schedule = schedule;
        fitted.pruned = self.pruned_gp(&wrench, &z, noise_var)?;
        fitted.anchor = Some(anchor);
        fitted.wrench = Some(Arc::new(wrench));
        Ok(fitted)
    }

    fn pruned_gp(
        &self,
        acting: &RcgpPosterior,
        z: &[f64],
        noise_var: f64,
    ) -> Result<Option<GpPosterior>> {
        if self.cfg.model.sigma_proxy != SigmaProxy::PrunedGp {
            return Ok(None);
        }
        let (xs, ys): (Vec<Point>, Vec<f64>) = acting
            .corrections()
            .in_plateau
            .iter()
            .zip(self.xs.iter().zip(z))
            .filter(|(inside, _)| **inside)
            .map(|(_, (x, y))| (x.clone(), *y))
            .unzip();
        GpPosterior::fit(&xs, &ys, &self.kernel, noise_var).map(Some)
    }

    /// Selects the next query without observing it.
    pub fn propose(&self) -> Result<(Fitted, Point, f64)> {
        let fitted = self.fit()?;
        let (x, value) = maximize(&self.cfg.domain, self.grid.as_deref(), |xs| {
            fitted.acquisition_many(xs)
        })?;
        Ok((fitted, x, value))
    }

    /// Runs one step: propose, observe through `channel`, record.
    /// `channel` receives the query and the step index `t >= 1`.
    pub fn step<F>(&mut self, mut channel: F) -> Result<StepRecord>
    where
        F: FnMut(&[f64], usize) -> Result<f64>,
    {
        let t = self.t + 1;
        self.maybe_refit_hyperparameters()
            .map_err(|e| e.at_step(t))?;
        let (fitted, x, acquisition) = self.propose().map_err(|e| e.at_step(t))?;
        let y = channel(&x, t).map_err(|e| e.at_step(t))?;
        self.xs.push(x.clone());
        self.ys.push(y);
        self.t = t;
        self.prev_wrench = fitted.wrench.clone();
        Ok(StepRecord {
            t,
            x,
            y,
            beta: fitted.beta,
            tc_estimate: fitted.tc_estimate,
            acquisition,
        })
    }

    /// Current kernel and raw-unit noise variance (after any refits).
    pub fn hyperparameters(&self) -> (&KernelSpec, f64) {
        (&self.kernel, self.noise_var)
    }

    fn maybe_refit_hyperparameters(&mut self) -> Result<()> {
        let Some(search) = &self.cfg.model.hyperparameters else {
            return Ok(());
        };
        if !self.t.is_multiple_of(search.every) || self.xs.len() < 3 {
            return Ok(());
        }
        let st = self.standardizer();
        let z = st.transform_all(&self.ys);
        let noises: Vec<f64> = if search.noise_vars.is_empty() {
            vec![self.noise_var]
        } else {
            search.noise_vars.clone()
        };
        let base = &self.cfg.model.kernel;
        let mut candidates = Vec::new();
        let mut raw_noise = Vec::new();
        for l in &search.lengthscales {
            let spec = KernelSpec::new(base.family, vec![*l; base.dim()], base.outputscale)?;
            for raw in &noises {
                candidates.push((spec.clone(), st.variance(*raw).max(MIN_NOISE_VAR)));
                raw_noise.push(*raw);
            }
        }
        let model = &self.cfg.model;
        let shape = model.shape;
        let width = match model.plateau {
            PlateauPolicy::Theory => None,
            PlateauPolicy::Quantile { q } => quantile_half_width(&z, q),
        };
        let kappa = base.outputscale;
        let schedule_cfg = &self.cfg.schedule.standardized(st.center, st.scale, kappa);
        let (case, horizon) = (self.case, self.cfg.horizon);
        let build = |noise: f64| -> Result<PimqParams> {
            let l = match width {
                Some(l) => l,
                None => {
                    ScheduleState::new(schedule_cfg, case, kappa, noise, shape, horizon)?
                        .anchor_width
                }
            };
            PimqParams::fixed(noise, l, shape)
        };
        let weights: Option<&dyn Fn(f64) -> Result<PimqParams>> = match self.cfg.kind {
            AlgorithmKind::GpUcb => None,
            _ => Some(&build),
        };
        let best = fit_hyperparameters_loo(&self.xs, &z, &candidates, weights)?;
        let i = candidates
            .iter()
            .position(|c| *c == best)
            .expect("winner comes from the candidate list");
        self.kernel = best.0;
        self.noise_var = raw_noise[i];
        Ok(())
    }
}

#[cfg(test)]
mod tests;
