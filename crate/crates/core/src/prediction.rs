//! Level-`alpha` prediction sets and the guaranteed validity threshold.
//!
//! The prediction set at level `alpha` keeps every outcome whose predictive
//! probability *strictly* exceeds `alpha`:
//!
//! ```text
//! set(pi, alpha) = { y : pi(y) > alpha }
//! ```
//!
//! Only the small, rejected probabilities need an interpretation; nothing is
//! read into the magnitudes of the surviving ones. A set with two or more
//! members is an honest "too close to call"; an empty set (all outcomes at or
//! below `alpha`) is legal and itself an event of probability at most `alpha`
//! for `alpha` below the threshold computed by [`validity_threshold`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JointModel, PredictiveDistribution};

/// The outcomes whose predictive probability strictly exceeds `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionSet {
    alpha: f64,
    members: Vec<String>,
}

impl PredictionSet {
    pub(crate) fn from_members(alpha: f64, members: Vec<String>) -> Self {
        Self { alpha, members }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Members in canonical label order.
    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn contains(&self, label: &str) -> bool {
        self.members.iter().any(|m| m == label)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::Domain(format!(
            "alpha must lie strictly inside (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// The level-`alpha` prediction set of `pi`. The comparison is strict and
/// carries no epsilon; ties with `alpha` are excluded.
pub fn prediction_set(pi: &PredictiveDistribution, alpha: f64) -> Result<PredictionSet> {
    validate_alpha(alpha)?;
    let members = pi
        .space()
        .labels()
        .iter()
        .zip(pi.probs())
        .filter(|(_, &p)| p > alpha)
        .map(|(label, _)| label.clone())
        .collect();
    Ok(PredictionSet::from_members(alpha, members))
}

/// The threshold `A` below which the model's prediction sets are guaranteed
/// valid: the minimum over data values of the second-smallest strictly
/// positive conditional probability. Duplicated values count separately.
///
/// Data values with fewer than two strictly positive probabilities impose no
/// constraint and are skipped; if every data value is skipped, `A = 1`.
pub fn validity_threshold(model: &JointModel) -> f64 {
    let mut threshold = 1.0f64;
    for pi in model.conditionals() {
        let mut positive: Vec<f64> = pi.probs().iter().copied().filter(|&p| p > 0.0).collect();
        if positive.len() < 2 {
            continue;
        }
        positive.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite probabilities"));
        threshold = threshold.min(positive[1]);
    }
    threshold
}

/// The shares at which the binary logistic prediction set collapses to a
/// single candidate:
///
/// ```text
/// theta_low  = 1/2 + ln(alpha / (1 - alpha)) / lambda
/// theta_high = 1/2 + ln((1 - alpha) / alpha) / lambda
/// ```
///
/// The set at level `alpha` is a singleton exactly when the observed share is
/// at most `theta_low` or at least `theta_high`; in between, both candidates
/// stay in and the race is too close to call. Requires `alpha < 1/2` (the
/// bounds cross at one half) and `lambda > 0`.
pub fn set_collapse_bounds(alpha: f64, lambda: f64) -> Result<(f64, f64)> {
    validate_alpha(alpha)?;
    if alpha >= 0.5 {
        return Err(Error::Domain(format!(
            "collapse bounds need alpha < 1/2, got {alpha}"
        )));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "sharpness lambda must be a positive finite number, got {lambda}"
        )));
    }
    let theta_low = 0.5 + (alpha / (1.0 - alpha)).ln() / lambda;
    let theta_high = 0.5 + ((1.0 - alpha) / alpha).ln() / lambda;
    Ok((theta_low, theta_high))
}
