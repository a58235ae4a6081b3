//! Exact and Monte Carlo verification of prediction-set validity.
//!
//! A prediction set is valid at level `alpha` when the model-probability of
//! excluding the true outcome is at most `alpha`. Because excluding the truth
//! is the same event as the truth's conditional probability being at most
//! `alpha`, everything reduces to the distribution function
//!
//! ```text
//! G(pi) = P{ pi_X(Y) <= pi }
//! ```
//!
//! which this module computes exactly by enumerating every (data value,
//! outcome) pair. Validity at `alpha` is `G(alpha) <= alpha`, and the
//! threshold from [`validity_threshold`] marks an interval `(0, A)` on which
//! that bound is guaranteed.
//!
//! The Monte Carlo estimator exists to exercise the sampling interface, not
//! to replace the exact path: every model here is small enough to enumerate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::JointModel;
use crate::prediction::{prediction_set, validate_alpha, validity_threshold, PredictionSet};

/// Largest number of (data value, outcome) pairs exact enumeration accepts.
pub const MAX_ENUMERATION_PAIRS: u64 = 10_000_000;

/// Rejects models whose (data value, outcome) pair count exceeds
/// [`MAX_ENUMERATION_PAIRS`].
pub fn check_enumeration_size(data_values: u64, outcomes: u64) -> Result<()> {
    let pairs = data_values.saturating_mul(outcomes);
    if pairs > MAX_ENUMERATION_PAIRS {
        return Err(Error::EnumerationTooLarge {
            pairs,
            limit: MAX_ENUMERATION_PAIRS,
        });
    }
    Ok(())
}

fn check_model_size(model: &JointModel) -> Result<()> {
    check_enumeration_size(model.data_values().len() as u64, model.space().len() as u64)
}

/// The exact distribution function `G` of `pi_X(Y)`, as a step function.
///
/// `points` holds `(pi, G(pi))` at every distinct attained value of
/// `pi_X(Y)` plus the endpoints 0 and 1; `threshold` is the guaranteed
/// validity bound `A` of the model.
#[derive(Debug, Clone, Serialize)]
pub struct MiscoverageCurve {
    points: Vec<(f64, f64)>,
    threshold: f64,
}

impl MiscoverageCurve {
    /// Step points `(pi, G(pi))` in increasing `pi` order.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// The guaranteed validity threshold `A`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `G(pi)`: the probability mass on attained values at most `pi`.
    pub fn evaluate(&self, pi: f64) -> f64 {
        let idx = self.points.partition_point(|&(v, _)| v <= pi);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// Two-column TSV (`pi`, `G`), one point per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for &(pi, g) in &self.points {
            out.push_str(&format!("{pi}\t{g}\n"));
        }
        out
    }
}

/// Computes `G` exactly:
/// `G(pi) = sum over (x, y) of marginal(x) * pi_x(y) * [pi_x(y) <= pi]`.
///
/// Fails with an enumeration-size error on models above
/// [`MAX_ENUMERATION_PAIRS`] pairs.
pub fn miscoverage_cdf(model: &JointModel) -> Result<MiscoverageCurve> {
    check_model_size(model)?;
    // Weighted attained values of pi_X(Y), in data-value order.
    let mut attained: Vec<(f64, f64)> = Vec::new();
    for (weight, pi) in model.marginal().iter().zip(model.conditionals()) {
        for &p in pi.probs() {
            let mass = weight * p;
            if mass > 0.0 {
                attained.push((p, mass));
            }
        }
    }
    attained.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite probabilities"));

    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut cumulative = 0.0;
    for (value, mass) in attained {
        // The running sum can drift a few ulps past 1; G is a probability.
        cumulative = (cumulative + mass).min(1.0);
        match points.last_mut() {
            Some(last) if last.0 == value => last.1 = cumulative,
            _ => points.push((value, cumulative)),
        }
    }
    if points.last().map(|&(v, _)| v < 1.0).unwrap_or(true) {
        points.push((1.0, cumulative));
    }
    Ok(MiscoverageCurve {
        points,
        threshold: validity_threshold(model),
    })
}

/// The probability of a wrong prediction at level `alpha`, enumerated
/// directly from the prediction sets:
/// `sum over x of marginal(x) * sum over excluded y of pi_x(y)`.
///
/// This is an independent route to the same quantity as
/// `miscoverage_cdf(model).evaluate(alpha)`.
pub fn exact_miscoverage(model: &JointModel, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    check_model_size(model)?;
    let mut total = 0.0;
    for (weight, pi) in model.marginal().iter().zip(model.conditionals()) {
        let set = prediction_set(pi, alpha)?;
        let excluded: f64 = model
            .space()
            .labels()
            .iter()
            .zip(pi.probs())
            .filter(|(label, _)| !set.contains(label))
            .map(|(_, &p)| p)
            .sum();
        total += weight * excluded;
    }
    Ok(total.min(1.0))
}

/// Exact validity report over a grid of levels.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    /// The evaluated levels.
    pub alpha_grid: Vec<f64>,
    /// `G(alpha)` for each grid level.
    pub miscoverage: Vec<f64>,
    /// Whether `G(alpha) <= alpha` at each grid level.
    pub holds: Vec<bool>,
    /// The guaranteed validity threshold `A`.
    pub threshold_a: f64,
    /// Whether validity held at every grid level below `A` (it must).
    pub all_hold_below_threshold: bool,
}

/// Evaluates exact miscoverage on `alpha_grid` and checks `G(alpha) <= alpha`
/// pointwise. Every grid value must lie in (0, 1).
pub fn check_validity(model: &JointModel, alpha_grid: &[f64]) -> Result<ValidityReport> {
    for &alpha in alpha_grid {
        validate_alpha(alpha)?;
    }
    let curve = miscoverage_cdf(model)?;
    let miscoverage: Vec<f64> = alpha_grid.iter().map(|&a| curve.evaluate(a)).collect();
    let holds: Vec<bool> = alpha_grid
        .iter()
        .zip(&miscoverage)
        .map(|(&a, &g)| g <= a)
        .collect();
    let threshold_a = curve.threshold();
    let all_hold_below_threshold = alpha_grid
        .iter()
        .zip(&holds)
        .all(|(&a, &ok)| a >= threshold_a || ok);
    Ok(ValidityReport {
        alpha_grid: alpha_grid.to_vec(),
        miscoverage,
        holds,
        threshold_a,
        all_hold_below_threshold,
    })
}

/// The default level grid: 512 equally spaced points spanning
/// `[0.001, 0.999]`.
pub fn default_alpha_grid() -> Vec<f64> {
    linspace_grid(0.001, 0.999, 512).expect("static grid")
}

/// `count` equally spaced values from `start` to `stop` inclusive, all of
/// which must lie in (0, 1).
pub fn linspace_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::Domain(format!(
            "a level grid needs at least 2 points, got {count}"
        )));
    }
    validate_alpha(start)?;
    validate_alpha(stop)?;
    if start >= stop {
        return Err(Error::Domain(format!(
            "grid start {start} must be below stop {stop}"
        )));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

/// A seeded Monte Carlo miscoverage estimate with its binomial standard
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimates the miscoverage probability by sampling `(X, Y)` pairs from the
/// model and counting how often `Y` falls outside the level-`alpha` set.
///
/// Each trial draws from its own counter-derived stream of a seeded ChaCha
/// generator, so results are reproducible bit-for-bit regardless of how
/// trials would be partitioned across threads.
pub fn monte_carlo_miscoverage(
    model: &JointModel,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    validate_alpha(alpha)?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let sets: Vec<PredictionSet> = model
        .conditionals()
        .iter()
        .map(|pi| prediction_set(pi, alpha))
        .collect::<Result<_>>()?;
    let cumulative_marginal: Vec<f64> = model
        .marginal()
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let labels = model.space().labels();

    let mut misses = 0u64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);

        let u_data: f64 = rng.random();
        let x_idx = cumulative_marginal
            .partition_point(|&c| c <= u_data)
            .min(cumulative_marginal.len() - 1);

        let u_outcome: f64 = rng.random();
        let probs = model.conditionals()[x_idx].probs();
        let mut acc = 0.0;
        let mut y_idx = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u_outcome < acc {
                y_idx = i;
                break;
            }
        }

        if !sets[x_idx].contains(&labels[y_idx]) {
            misses += 1;
        }
    }

    let estimate = misses as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(MonteCarloEstimate {
        estimate,
        std_error,
    })
}
