//! Confidence multipliers, noise bounds and plateau widths.
//!
//! The failure budget `delta` is split in half: `delta / 2` for the noise event
//! (via `N_T`) and `delta / 2` for the confidence event (via `beta'_t`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{c1_bound, cw_from_c1};

/// Regularity assumption on the objective, selecting the form of `beta'_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AssumptionCase {
    FiniteDomain { domain_size: usize },
    CompactConvex { a: f64, b: f64, r: f64, d: usize },
    Rkhs { b_f: f64 },
}

impl AssumptionCase {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AssumptionCase::FiniteDomain { domain_size } => domain_size > 0,
            AssumptionCase::CompactConvex { a, b, r, d } => a > 0.0 && b > 0.0 && r > 0.0 && d > 0,
            AssumptionCase::Rkhs { b_f } => b_f > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(
                "case",
                format!("constants must be positive: {self:?}"),
            ))
        }
    }

    /// Human-readable form of `beta'_t` for this case, echoed into run metadata.
    pub fn beta_prime_formula(&self) -> &'static str {
        match self {
            AssumptionCase::FiniteDomain { .. } => "2 ln(|X| t^2 pi^2 / (6 delta))",
            AssumptionCase::CompactConvex { .. } => {
                "2 ln(2 t^2 pi^2 / (3 delta)) + 2 d ln(t^2 d b r sqrt(ln(4 d a / delta)))"
            }
            AssumptionCase::Rkhs { .. } => "2 B_f + 300 gamma_t ln^3(t / delta)",
        }
    }
}

fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, "must lie in (0, 1)"))
    }
}

/// Confidence multiplier `beta'_t(delta)` for the clean problem.
pub fn beta_prime(case: &AssumptionCase, t: usize, delta: f64, gamma_t: f64) -> Result<f64> {
    case.validate()?;
    check_prob("delta", delta)?;
    if t == 0 {
        return Err(Error::invalid("t", "steps are counted from 1"));
    }
    let t = t as f64;
    let value = match *case {
        AssumptionCase::FiniteDomain { domain_size } => {
            2.0 * (domain_size as f64 * t * t * PI * PI / (6.0 * delta)).ln()
        }
        AssumptionCase::CompactConvex { a, b, r, d } => {
            let d = d as f64;
            let inner = (4.0 * d * a / delta).ln().max(0.0).sqrt();
            2.0 * (2.0 * t * t * PI * PI / (3.0 * delta)).ln()
                + 2.0 * d * (t * t * d * b * r * inner).ln().max(0.0)
        }
        AssumptionCase::Rkhs { b_f } => {
            if !(gamma_t >= 0.0) {
                return Err(Error::invalid("gamma_t", "must be >= 0"));
            }
            2.0 * b_f + 300.0 * gamma_t * (t / delta).ln().powi(3)
        }
    };
    Ok(value.max(0.0))
}

/// High-probability bound `N_T(delta)` on the noise magnitude over `T` steps.
pub fn noise_bound(
    case: &AssumptionCase,
    sigma_noise: f64,
    horizon: usize,
    delta: f64,
) -> Result<f64> {
    check_prob("delta", delta)?;
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    Ok(match case {
        AssumptionCase::Rkhs { .. } => sigma_noise,
        _ => sigma_noise * (2.0 * (horizon as f64 / delta).ln()).sqrt(),
    })
}

/// Plateau half-width of the zero-centered model, `B_f sqrt(kappa) + N`.
pub fn anchor_width(b_f: f64, kappa: f64, noise_bound: f64) -> f64 {
    b_f * kappa.sqrt() + noise_bound
}

/// Fixed plateau half-width of the adaptive-center model.
pub fn wrench_width_fixed(beta_anchor_horizon: f64, kappa: f64, noise_bound: f64) -> f64 {
    beta_anchor_horizon.sqrt() * kappa.sqrt() + noise_bound
}

/// Pointwise plateau half-width of the adaptive-center model, using a
/// posterior standard deviation at `x` as the uncertainty proxy.
pub fn wrench_width_adaptive(beta_anchor_t: f64, sigma_proxy: f64, noise_bound: f64) -> f64 {
    beta_anchor_t.sqrt() * sigma_proxy.max(0.0) + noise_bound
}

/// `(sqrt(beta') + C_w sqrt(T_c))^2`.
/// Returns `beta'` itself, bit for bit, when `T_c = 0`.
pub fn robust_beta(beta_prime: f64, c_w: f64, tc_estimate: usize) -> f64 {
    if tc_estimate == 0 {
        return beta_prime;
    }
    let root = beta_prime.sqrt() + c_w * (tc_estimate as f64).sqrt();
    root * root
}

/// Number of residuals strictly outside their widths.
pub fn estimate_tc(residuals: &[f64], widths: &[f64]) -> Result<usize> {
    if residuals.len() != widths.len() {
        return Err(Error::LengthMismatch {
            left: residuals.len(),
            right: widths.len(),
        });
    }
    Ok(residuals
        .iter()
        .zip(widths)
        .filter(|(r, w)| r.abs() > **w)
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TcMode {
    /// Plug the running count of outside-plateau points into the multiplier.
    UseEstimated,
    /// Keep `beta_t = beta'_t`; the count is still tracked and reported.
    #[default]
    ForceZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthMode {
    #[default]
    Fixed,
    Adaptive,
}

fn default_delta() -> f64 {
    0.1
}

fn default_b_f() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// `None` means the finite-domain case over the acquisition grid.
    #[serde(default)]
    pub case: Option<AssumptionCase>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Bound on the objective in (standardized) target units per unit `sqrt(kappa)`.
    #[serde(default = "default_b_f")]
    pub b_f: f64,
    /// Bound on `|f|` in raw target units. When set, `b_f` is recomputed from it
    /// for every fit so that it holds after standardization.
    #[serde(default)]
    pub f_bound: Option<f64>,
    #[serde(default)]
    pub tc_mode: TcMode,
    #[serde(default)]
    pub width_mode: WidthMode,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            case: None,
            delta: default_delta(),
            b_f: default_b_f(),
            f_bound: None,
            tc_mode: TcMode::default(),
            width_mode: WidthMode::default(),
        }
    }
}

impl ScheduleConfig {
    /// Copy with `b_f` expressed in standardized units, given the affine map
    /// `z = (y - center) / scale` and the prior variance `kappa`.
    pub fn standardized(&self, center: f64, scale: f64, kappa: f64) -> ScheduleConfig {
        let mut cfg = self.clone();
        if let Some(bound) = self.f_bound {
            cfg.b_f = (bound + center.abs()) / (scale * kappa.sqrt());
        }
        cfg
    }
}

/// Constants fixed at the start of a run plus the running `T_c` estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleState {
    pub case: AssumptionCase,
    pub delta: f64,
    pub b_f: f64,
    pub kappa: f64,
    pub noise_var: f64,
    pub shape: f64,
    pub horizon: usize,
    pub tc_mode: TcMode,
    pub width_mode: WidthMode,
    /// `N_T(delta / 2)`.
    pub noise_bound: f64,
    /// `L_T`, the plateau half-width of the zero-centered model.
    pub anchor_width: f64,
    /// `beta'_T(delta / 2)`.
    pub beta_prime_horizon: f64,
    /// `C_w` of the zero-centered model.
    pub cw_anchor: f64,
    pub tc_estimate: usize,
}

impl ScheduleState {
    pub fn new(
        cfg: &ScheduleConfig,
        case: AssumptionCase,
        kappa: f64,
        noise_var: f64,
        shape: f64,
        horizon: usize,
    ) -> Result<Self> {
        check_prob("delta", cfg.delta)?;
        if !(cfg.b_f >= 0.0) {
            return Err(Error::invalid("b_f", "must be >= 0"));
        }
        if !(noise_var > 0.0) {
            return Err(Error::invalid("noise_var", "must be > 0"));
        }
        let half = cfg.delta / 2.0;
        let noise_bound = noise_bound(&case, noise_var.sqrt(), horizon, half)?;
        let anchor_width = anchor_width(cfg.b_f, kappa, noise_bound);
        // gamma_T is unknown a priori; the RKHS case uses the running value per step
        let beta_prime_horizon = beta_prime(&case, horizon, half, 0.0)?;
        let sup_delta = kappa.sqrt() * (beta_prime_horizon.sqrt() + cfg.b_f);
        let cw_anchor = cw_from_c1(
            c1_bound(noise_var, anchor_width, shape, sup_delta),
            noise_var,
        );
        Ok(Self {
            case,
            delta: cfg.delta,
            b_f: cfg.b_f,
            kappa,
            noise_var,
            shape,
            horizon,
            tc_mode: cfg.tc_mode,
            width_mode: cfg.width_mode,
            noise_bound,
            anchor_width,
            beta_prime_horizon,
            cw_anchor,
            tc_estimate: 0,
        })
    }

    pub fn beta_prime(&self, t: usize, gamma_t: f64) -> Result<f64> {
        beta_prime(&self.case, t, self.delta / 2.0, gamma_t)
    }

    /// `T_c` as it enters the multiplier.
    pub fn effective_tc(&self) -> usize {
        match self.tc_mode {
            TcMode::UseEstimated => self.tc_estimate,
            TcMode::ForceZero => 0,
        }
    }

    pub fn robust_beta(&self, beta_prime: f64, c_w: f64) -> f64 {
        robust_beta(beta_prime, c_w, self.effective_tc())
    }

    /// `beta_{A,T}`, the anchor multiplier at the horizon.
    pub fn beta_anchor_horizon(&self) -> f64 {
        self.robust_beta(self.beta_prime_horizon, self.cw_anchor)
    }

    /// Fixed wrench half-width, computed before the wrench `C_w` that depends on it.
    pub fn wrench_width(&self) -> f64 {
        wrench_width_fixed(self.beta_anchor_horizon(), self.kappa, self.noise_bound)
    }

    /// `C_w` of the adaptive-center model for a given plateau half-width.
    /// Its center deviates from the clean posterior by at most
    /// `C_{w,A} sqrt(T_c) sqrt(kappa)`.
    pub fn cw_wrench(&self, wrench_width: f64) -> f64 {
        let sup_delta = self.cw_anchor * (self.tc_estimate as f64).sqrt() * self.kappa.sqrt();
        cw_from_c1(
            c1_bound(self.noise_var, wrench_width, self.shape, sup_delta),
            self.noise_var,
        )
    }
}
