//! Frequency-constrained corruption of observations.
//!
//! The adversary sees each query before choosing whether to replace its
//! observation, and may do so at most `budget` times over the whole run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BudgetMode {
    FixedCount { count: usize },
    TimeBudget { alpha: f64 },
}

/// `ceil(T^alpha)`.
pub fn budget_from_horizon(horizon: usize, alpha: f64) -> Result<usize> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", "must lie in [0, 1]"));
    }
    let raw = (horizon as f64).powf(alpha);
    // guard against T^(1/k) landing a hair above an exact integer
    let rounded = raw.round();
    let value = if (raw - rounded).abs() < 1e-9 * rounded.max(1.0) {
        rounded
    } else {
        raw.ceil()
    };
    Ok(value as usize)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorruptionBudget {
    limit: usize,
    spent: usize,
}

impl CorruptionBudget {
    pub fn new(mode: BudgetMode, horizon: usize) -> Result<Self> {
        let limit = match mode {
            BudgetMode::FixedCount { count } => count,
            BudgetMode::TimeBudget { alpha } => budget_from_horizon(horizon, alpha)?,
        };
        Ok(Self { limit, spent: 0 })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn spent(&self) -> usize {
        self.spent
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.spent
    }

    fn try_spend(&mut self) -> bool {
        if self.spent < self.limit {
            self.spent += 1;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryPolicy {
    None,
    /// Knows the maximizer: queries closer than `near_thresh` are sent to
    /// `low_value`, queries farther than `far_thresh` to `high_value`.
    GreedyClairvoyant {
        x_star: Vec<f64>,
        near_thresh: f64,
        far_thresh: f64,
        low_value: f64,
        high_value: f64,
    },
    /// Corrupts every observation until the budget runs out.
    EagerBudget {
        corruption_value: f64,
    },
}

impl AdversaryPolicy {
    /// Thresholds 0.1 / 0.4 with values -10 / 25.
    pub fn forrester_default(x_star: Vec<f64>) -> Self {
        AdversaryPolicy::GreedyClairvoyant {
            x_star,
            near_thresh: 0.1,
            far_thresh: 0.4,
            low_value: -10.0,
            high_value: 25.0,
        }
    }

    /// Wider thresholds 0.2 / 0.5 with the same values.
    pub fn forrester_wide(x_star: Vec<f64>) -> Self {
        AdversaryPolicy::GreedyClairvoyant {
            x_star,
            near_thresh: 0.2,
            far_thresh: 0.5,
            low_value: -10.0,
            high_value: 25.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AdversaryPolicy::GreedyClairvoyant {
            near_thresh,
            far_thresh,
            ..
        } = self
        {
            if !(*near_thresh >= 0.0 && near_thresh < far_thresh) {
                return Err(Error::invalid(
                    "near_thresh",
                    "need 0 <= near_thresh < far_thresh",
                ));
            }
        }
        Ok(())
    }

    /// Replacement value the policy wants for a query, ignoring the budget.
    fn target(&self, x: &[f64]) -> Option<f64> {
        match self {
            AdversaryPolicy::None => None,
            AdversaryPolicy::EagerBudget { corruption_value } => Some(*corruption_value),
            AdversaryPolicy::GreedyClairvoyant {
                x_star,
                near_thresh,
                far_thresh,
                low_value,
                high_value,
            } => {
                let dist = x
                    .iter()
                    .zip(x_star)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist < *near_thresh {
                    Some(*low_value)
                } else if dist > *far_thresh {
                    Some(*high_value)
                } else {
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adversary {
    pub policy: AdversaryPolicy,
    pub budget: CorruptionBudget,
}

impl Adversary {
    pub fn new(policy: AdversaryPolicy, budget: CorruptionBudget) -> Result<Self> {
        policy.validate()?;
        Ok(Self { policy, budget })
    }

    pub fn none() -> Self {
        Self {
            policy: AdversaryPolicy::None,
            budget: CorruptionBudget { limit: 0, spent: 0 },
        }
    }

    /// Returns the observed value and whether it was corrupted.
    pub fn corrupt(&mut self, x: &[f64], y_clean: f64) -> (f64, bool) {
        match self.policy.target(x) {
            Some(v) if self.budget.try_spend() => (v, true),
            _ => (y_clean, false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn budget_examples() {
        assert_eq!(budget_from_horizon(100, 1.0 / 3.0).unwrap(), 5);
        assert_eq!(budget_from_horizon(100, 0.0).unwrap(), 1);
        assert_eq!(budget_from_horizon(100, 1.0).unwrap(), 100);
        assert_eq!(budget_from_horizon(1000, 1.0 / 3.0).unwrap(), 10);
        assert!(budget_from_horizon(0, 0.5).is_err());
        assert!(budget_from_horizon(10, 1.5).is_err());
    }

    #[test]
    fn no_policy_passes_through() {
        let mut a = Adversary::none();
        for i in 0..10 {
            assert_eq!(a.corrupt(&[i as f64], 1.5), (1.5, false));
        }
    }

    #[test]
    fn greedy_examples() {
        let budget = CorruptionBudget::new(BudgetMode::FixedCount { count: 2 }, 10).unwrap();
        let mut a =
            Adversary::new(AdversaryPolicy::forrester_default(vec![0.7572]), budget).unwrap();
        assert_eq!(a.corrupt(&[0.7072], 5.0), (-10.0, true));
        // annulus is left alone and costs nothing
        assert_eq!(a.corrupt(&[0.5], 1.0), (1.0, false));
        assert_eq!(a.corrupt(&[0.1], 1.0), (25.0, true));
        assert_eq!(a.corrupt(&[0.1], 1.0), (1.0, false));
        assert_eq!(a.budget.spent(), 2);
    }

    #[test]
    fn eager_spends_first() {
        let budget = CorruptionBudget::new(BudgetMode::FixedCount { count: 2 }, 5).unwrap();
        let mut a = Adversary::new(
            AdversaryPolicy::EagerBudget {
                corruption_value: 9.0,
            },
            budget,
        )
        .unwrap();
        let flags: Vec<bool> = (0..5).map(|i| a.corrupt(&[i as f64], 0.0).1).collect();
        assert_eq!(flags, vec![true, true, false, false, false]);
    }

    #[test]
    fn thresholds_validated() {
        let bad = AdversaryPolicy::GreedyClairvoyant {
            x_star: vec![0.5],
            near_thresh: 0.5,
            far_thresh: 0.4,
            low_value: 0.0,
            high_value: 1.0,
        };
        assert!(Adversary::new(
            bad,
            CorruptionBudget::new(BudgetMode::FixedCount { count: 1 }, 1).unwrap()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn budget_and_annulus_respected(xs in prop::collection::vec(0.0..1.0f64, 1..200), alpha in 0.0..1.0f64) {
            let budget = CorruptionBudget::new(BudgetMode::TimeBudget { alpha }, xs.len()).unwrap();
            let limit = budget.limit();
            let mut a = Adversary::new(AdversaryPolicy::forrester_default(vec![0.7572]), budget).unwrap();
            let mut count = 0;
            for x in &xs {
                let (y, flag) = a.corrupt(&[*x], 0.25);
                let d = (x - 0.7572).abs();
                if flag {
                    count += 1;
                    prop_assert!(!(0.1..=0.4).contains(&d));
                    prop_assert!(y == -10.0 || y == 25.0);
                } else {
                    prop_assert_eq!(y, 0.25);
                }
            }
            prop_assert!(count <= limit);
        }
    }
}
