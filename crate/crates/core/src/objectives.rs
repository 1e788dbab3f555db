//! Synthetic benchmark objectives, all posed as maximization problems.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Negated Forrester function on `[0, 1]`.
    Forrester,
    /// `sin(3 pi x) + x` on `[0, 1]`; smoke tests only.
    Sinusoid,
    /// Negated Branin function on `[-5, 10] x [0, 15]`.
    Branin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub bounds: Vec<(f64, f64)>,
    pub noise_var: f64,
}

pub fn forrester(x: f64) -> f64 {
    let a = 6.0 * x - 2.0;
    -(a * a) * (12.0 * x - 4.0).sin()
}

pub fn sinusoid(x: f64) -> f64 {
    (3.0 * std::f64::consts::PI * x).sin() + x
}

pub fn branin(x1: f64, x2: f64) -> f64 {
    use std::f64::consts::PI;
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let q = x2 - b * x1 * x1 + c * x1 - 6.0;
    -(q * q + 10.0 * (1.0 - t) * x1.cos() + 10.0)
}

impl Objective {
    pub fn new(kind: ObjectiveKind, noise_var: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(Error::invalid("noise_var", "must be finite and >= 0"));
        }
        let bounds = match kind {
            ObjectiveKind::Forrester | ObjectiveKind::Sinusoid => vec![(0.0, 1.0)],
            ObjectiveKind::Branin => vec![(-5.0, 10.0), (0.0, 15.0)],
        };
        Ok(Self {
            kind,
            bounds,
            noise_var,
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Noiseless value; points outside the domain are an error.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Ok(match self.kind {
            ObjectiveKind::Forrester => forrester(x[0]),
            ObjectiveKind::Sinusoid => sinusoid(x[0]),
            ObjectiveKind::Branin => branin(x[0], x[1]),
        })
    }

    /// `evaluate(x)` plus one Gaussian noise draw from `rng`.
    pub fn observe<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        let f = self.evaluate(x)?;
        if self.noise_var == 0.0 {
            return Ok(f);
        }
        let normal = Normal::new(0.0, self.noise_var.sqrt())
            .map_err(|e| Error::invalid("noise_var", e.to_string()))?;
        Ok(f + normal.sample(rng))
    }

    /// Brute-force maximizer: `resolution` points in 1D, `resolution^2` in 2D.
    pub fn grid_argmax(&self, resolution: usize) -> Result<(Point, f64)> {
        if resolution < 2 {
            return Err(Error::invalid("resolution", "must be >= 2"));
        }
        let axis = |d: usize, i: usize| {
            let (lo, hi) = self.bounds[d];
            lo + (hi - lo) * i as f64 / (resolution - 1) as f64
        };
        let mut best: Option<(Point, f64)> = None;
        let total = resolution.pow(self.dim() as u32);
        for flat in 0..total {
            let mut rem = flat;
            let x: Point = (0..self.dim())
                .map(|d| {
                    let i = rem % resolution;
                    rem /= resolution;
                    axis(d, i)
                })
                .collect();
            let v = self.evaluate(&x)?;
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((x, v));
            }
        }
        best.ok_or(Error::EmptyDomain)
    }
}
