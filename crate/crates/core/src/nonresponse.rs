//! Nonresponse sensitivity for binary polls: the imputation ensemble and the
//! missing-at-random baseline.
//!
//! Nonresponders might lean either way. Instead of assuming they split like
//! the responders (missing at random), each ensemble member assigns all of
//! them the same lean `f` and adjusts the observed share to
//! `theta(f) = (counts[T] + f * nonresponse) / n`. The grid of `f` values
//! always includes both endpoints, and because the logistic rule is monotone
//! in the share, the endpoints alone already attain the exact upper and lower
//! probabilities; refining the grid changes nothing.

use crate::error::{Error, Result};
use crate::model::{
    binomial_flat_joint, logistic_rule, LogisticRuleParams, PollData, PredictiveDistribution,
    CANDIDATE_T,
};
use crate::plausibility::ModelEnsemble;
use crate::util::round_half_even;

fn require_binary(poll: &PollData) -> Result<()> {
    if !poll.is_binary() {
        return Err(Error::Domain(format!(
            "a binary poll over {{C, T}} is required, got labels {:?}",
            poll.counts().keys().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Builds the nonresponse ensemble: one poll model per grid value of the
/// imputed-lean fraction `f`, evenly spaced over `[0, 1]` endpoints included.
///
/// Each member is the uniform-marginal poll model whose conditional at the
/// *observed* count `counts[T]` uses `theta(f)` instead of the raw share.
/// Members with identical shares collapse, so a poll without nonresponse
/// yields a singleton.
pub fn imputation_ensemble(
    poll: &PollData,
    params: &LogisticRuleParams,
    grid_size: usize,
) -> Result<ModelEnsemble> {
    require_binary(poll)?;
    if grid_size < 2 {
        return Err(Error::Domain(format!(
            "the imputation grid needs at least 2 points, got {grid_size}"
        )));
    }
    if params.n() != poll.n() {
        return Err(Error::Domain(format!(
            "rule is parameterized for n = {}, poll has n = {}",
            params.n(),
            poll.n()
        )));
    }
    let observed = poll.count(CANDIDATE_T).expect("binary poll has a T count");
    let nonresponse = poll.nonresponse() as f64;

    let mut shares: Vec<f64> = (0..grid_size)
        .map(|i| {
            let f = i as f64 / (grid_size - 1) as f64;
            (observed as f64 + f * nonresponse) / poll.n() as f64
        })
        .collect();
    shares.dedup();

    let base = binomial_flat_joint(params)?;
    let position = base
        .position_of(observed)
        .expect("observed count lies in the poll data space");

    let members = shares
        .iter()
        .map(|&theta| {
            let mut conditional: Vec<PredictiveDistribution> = base.conditionals().to_vec();
            conditional[position] = logistic_rule(theta, params)?;
            crate::model::JointModel::new(
                base.space().clone(),
                base.data_values().to_vec(),
                base.marginal().to_vec(),
                conditional,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ModelEnsemble::new(members)
}

/// The share the missing-at-random baseline plugs into the logistic rule:
/// `counts[T] / (n - nonresponse)`, reported at three-decimal poll precision
/// (ties to even).
pub fn mar_theta_hat(poll: &PollData) -> Result<f64> {
    require_binary(poll)?;
    if poll.responses() == 0 {
        return Err(Error::Domain(
            "every polled person was a nonresponder; the missing-at-random share is undefined"
                .into(),
        ));
    }
    let raw = poll.count(CANDIDATE_T).expect("binary poll has a T count") as f64
        / poll.responses() as f64;
    Ok(round_half_even(raw, 3))
}

/// The missing-at-random baseline: ignore the nonresponders and apply the
/// logistic rule to the responders' share.
pub fn naive_mar_rule(
    poll: &PollData,
    params: &LogisticRuleParams,
) -> Result<PredictiveDistribution> {
    logistic_rule(mar_theta_hat(poll)?, params)
}
