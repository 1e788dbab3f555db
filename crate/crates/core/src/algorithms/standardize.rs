use serde::{Deserialize, Serialize};

use crate::weights::quantile;

/// Consistency factor turning a median absolute deviation into a Gaussian scale.
const MAD_SCALE: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Mean and standard deviation of the initial design, then frozen.
    #[default]
    Initial,
    /// Median and scaled MAD of all targets, recomputed every step.
    OnlineRobust,
    /// Mean and standard deviation of all targets, recomputed every step.
    OnlineZscore,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Standardizer {
    pub center: f64,
    pub scale: f64,
}

impl Standardizer {
    pub const IDENTITY: Standardizer = Standardizer {
        center: 0.0,
        scale: 1.0,
    };

    pub fn zscore(ys: &[f64]) -> Self {
        if ys.len() < 2 {
            return Self {
                center: ys.first().copied().unwrap_or(0.0),
                scale: 1.0,
            };
        }
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0);
        Self::checked(mean, var.sqrt())
    }

    pub fn robust(ys: &[f64]) -> Self {
        let Some(median) = quantile(ys, 0.5) else {
            return Self::IDENTITY;
        };
        let dev: Vec<f64> = ys.iter().map(|y| (y - median).abs()).collect();
        let mad = quantile(&dev, 0.5).unwrap_or(0.0);
        Self::checked(median, MAD_SCALE * mad)
    }

    fn checked(center: f64, scale: f64) -> Self {
        let scale = if scale.is_finite() && scale > 1e-12 {
            scale
        } else {
            1.0
        };
        let center = if center.is_finite() { center } else { 0.0 };
        Self { center, scale }
    }

    pub fn transform(&self, y: f64) -> f64 {
        (y - self.center) / self.scale
    }

    pub fn transform_all(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().map(|y| self.transform(*y)).collect()
    }

    /// Converts a raw-unit variance to standardized units.
    pub fn variance(&self, raw: f64) -> f64 {
        raw / (self.scale * self.scale)
    }
}
