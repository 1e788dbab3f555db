//! Observation weight functions and the robust-posterior corrections built
//! from them.
//!
//! The plateau IMQ weight equals its cap `W_max = sigma_noise / sqrt(2)` while
//! the residual `|y - g(x)|` stays within the half-width `L`, and decays like an
//! inverse multiquadric in the excess residual beyond it. With that cap the
//! noise inflation `J = sigma^2 / (2 w^2)` is exactly one on the plateau and the
//! mean correction `m = sigma^2 d/dy log w^2` is exactly zero.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::Point;

/// Shape used to realize the hard-threshold (discard beyond `L`) limit.
pub const HARD_THRESHOLD_SHAPE: f64 = 1e-6;

const MAX_INFLATION: f64 = 1e200;

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Centering function `g`.
#[derive(Clone)]
pub enum Center {
    Zero,
    Constant(f64),
    Function(PointFn),
}

impl Center {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Center::Zero => 0.0,
            Center::Constant(c) => *c,
            Center::Function(f) => f(x),
        }
    }

    pub fn function(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Center::Function(Arc::new(f))
    }
}

impl fmt::Debug for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Center::Zero => write!(f, "Zero"),
            Center::Constant(c) => write!(f, "Constant({c})"),
            Center::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Plateau half-width, fixed or varying over the domain.
#[derive(Clone)]
pub enum HalfWidth {
    Fixed(f64),
    Function(PointFn),
}

impl HalfWidth {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            HalfWidth::Fixed(l) => *l,
            HalfWidth::Function(f) => f(x).max(0.0),
        }
    }

    pub fn function(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        HalfWidth::Function(Arc::new(f))
    }
}

impl fmt::Debug for HalfWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfWidth::Fixed(l) => write!(f, "Fixed({l})"),
            HalfWidth::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Full state of a plateau IMQ weight function.
#[derive(Debug, Clone)]
pub struct PimqParams {
    center: Center,
    half_width: HalfWidth,
    shape: f64,
    noise_var: f64,
    cap: f64,
}

impl PimqParams {
    pub fn new(noise_var: f64, center: Center, half_width: HalfWidth, shape: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid("noise_var", "must be finite and > 0"));
        }
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::invalid("shape", "must be finite and > 0"));
        }
        if let HalfWidth::Fixed(l) = half_width {
            if !(l >= 0.0) {
                return Err(Error::invalid("half_width", "must be >= 0"));
            }
        }
        Ok(Self {
            center,
            half_width,
            shape,
            noise_var,
            cap: (noise_var / 2.0).sqrt(),
        })
    }

    /// Zero-centered weight with a fixed plateau.
    pub fn fixed(noise_var: f64, half_width: f64, shape: f64) -> Result<Self> {
        Self::new(noise_var, Center::Zero, HalfWidth::Fixed(half_width), shape)
    }

    /// The `c -> 0` limit: full weight inside the plateau, (numerically) none outside.
    pub fn hard_threshold(noise_var: f64, center: Center, half_width: HalfWidth) -> Result<Self> {
        Self::new(noise_var, center, half_width, HARD_THRESHOLD_SHAPE)
    }

    pub fn center(&self) -> &Center {
        &self.center
    }

    pub fn half_width(&self) -> &HalfWidth {
        &self.half_width
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// `W_max = sigma_noise / sqrt(2)`.
    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Signed residual against the center and the plateau half-width at `x`.
    fn residual(&self, x: &[f64], y: f64) -> (f64, f64) {
        (y - self.center.eval(x), self.half_width.eval(x))
    }

    pub fn in_plateau(&self, x: &[f64], y: f64) -> bool {
        let (e, l) = self.residual(x, y);
        e.abs() <= l
    }

    pub fn weight(&self, x: &[f64], y: f64) -> f64 {
        let (e, l) = self.residual(x, y);
        let r = e.abs();
        if r <= l {
            return self.cap;
        }
        let z = (r - l) / self.shape;
        self.cap / (1.0 + z * z).sqrt()
    }

    /// Mean correction `m_w = sigma^2 d/dy log w^2`, zero on the plateau.
    pub fn mean_correction(&self, x: &[f64], y: f64) -> f64 {
        let (e, l) = self.residual(x, y);
        let r = e.abs();
        if r <= l {
            return 0.0;
        }
        let z = r - l;
        let c2 = self.shape * self.shape;
        -2.0 * self.noise_var * z * e.signum() / (c2 + z * z)
    }

    /// Noise inflation `J = sigma^2 / (2 w^2)` in closed form, exactly 1 on the plateau.
    pub fn inflation(&self, x: &[f64], y: f64) -> f64 {
        let (e, l) = self.residual(x, y);
        let r = e.abs();
        if r <= l {
            return 1.0;
        }
        let z = (r - l) / self.shape;
        (1.0 + z * z).min(MAX_INFLATION)
    }

    pub fn corrections(&self, xs: &[Point], ys: &[f64]) -> Result<WeightCorrections> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        let mut out = WeightCorrections::default();
        for (x, &y) in xs.iter().zip(ys) {
            out.weights.push(self.weight(x, y));
            out.inflation.push(self.inflation(x, y));
            out.mean_shift.push(self.mean_correction(x, y));
            out.in_plateau.push(self.in_plateau(x, y));
        }
        Ok(out)
    }
}

/// Per-point diagonal of `J_w`, entries of `m_w`, and the weights themselves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightCorrections {
    pub weights: Vec<f64>,
    pub inflation: Vec<f64>,
    pub mean_shift: Vec<f64>,
    pub in_plateau: Vec<bool>,
}

impl WeightCorrections {
    pub fn outside_count(&self) -> usize {
        self.in_plateau.iter().filter(|inside| !**inside).count()
    }
}

/// Plain IMQ weight `scale * (1 + (y - center)^2 / c^2)^(-1/2)`.
pub fn imq_weight(center: f64, shape: f64, scale: f64, y: f64) -> f64 {
    let z = (y - center) / shape;
    scale / (1.0 + z * z).sqrt()
}

/// `C_m = 4 sigma^2 / (3 sqrt(3) c)`, the supremum of `|w m_w| / W_max`.
pub fn correction_constant(noise_var: f64, shape: f64) -> f64 {
    4.0 * noise_var / (3.0 * 3f64.sqrt() * shape)
}

/// Upper bound on `C_1 = sup |w (y - m_w - mu_uc)|` for a plateau IMQ weight
/// whose center deviates from `mu_uc` by at most `sup_delta`.
pub fn c1_bound(noise_var: f64, half_width: f64, shape: f64, sup_delta: f64) -> f64 {
    let cap = (noise_var / 2.0).sqrt();
    cap * ((half_width * half_width + shape * shape).sqrt()
        + sup_delta
        + correction_constant(noise_var, shape))
}

/// `C_w = sqrt(2) C_1 / sigma^2`.
pub fn cw_from_c1(c1: f64, noise_var: f64) -> f64 {
    std::f64::consts::SQRT_2 * c1 / noise_var
}

/// Data-driven plateau half-width: the `q` quantile of `|y - median(y)|`
/// (linear interpolation between order statistics).
pub fn quantile_half_width(ys: &[f64], q: f64) -> Option<f64> {
    let med = quantile(ys, 0.5)?;
    let dev: Vec<f64> = ys.iter().map(|y| (y - med).abs()).collect();
    quantile(&dev, q)
}

pub(crate) fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}
