//! Upper/lower probabilities over model ensembles, don't-know mass, and
//! plausibility prediction sets.
//!
//! When several models are all reasonable and none can be singled out, the
//! honest per-event summary is the envelope over the ensemble:
//!
//! ```text
//! upper(B) = max over models of P(Y in B | X = x)     (plausibility)
//! lower(B) = 1 - upper(complement of B)               (belief)
//! ```
//!
//! The gap `upper - lower` is the "don't know" mass: how much the candidate
//! models disagree about the event. Upper probabilities are not additive;
//! `upper(C) + upper(T)` can exceed one, and that surplus is model
//! uncertainty a single probability would hide.
//!
//! Prediction sets built from `upper` keep every outcome that at least one
//! model finds likely enough; they are the union of the member sets and are
//! valid with respect to every member, provided each member itself satisfies
//! the stochastic-dominance hypothesis at the chosen level (which
//! [`check_ensemble_validity`] verifies rather than assumes).

use std::collections::BTreeSet;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::JointModel;
use crate::prediction::{validate_alpha, PredictionSet};
use crate::util::round_half_even;
use crate::validity::{exact_miscoverage, miscoverage_cdf};

/// A nonempty collection of joint models over one outcome space and one data
/// space.
#[derive(Debug, Clone)]
pub struct ModelEnsemble {
    members: Vec<JointModel>,
}

impl ModelEnsemble {
    /// Builds an ensemble, checking that all members share the same outcome
    /// labels and the same data values.
    pub fn new(members: Vec<JointModel>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidInput("an ensemble needs at least one model".into()))?;
        for member in &members[1..] {
            if member.space().labels() != first.space().labels() {
                return Err(Error::InvalidInput(
                    "ensemble members must share one outcome space".into(),
                ));
            }
            if member.data_values() != first.data_values() {
                return Err(Error::InvalidInput(
                    "ensemble members must share one data space".into(),
                ));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[JointModel] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        self.members[0].space().labels()
    }

    fn position_of(&self, x: u64) -> Result<usize> {
        self.members[0]
            .position_of(x)
            .ok_or(Error::UnknownDataValue(x))
    }

    /// Validates an event and returns a membership mask in label order.
    fn event_mask(&self, event: &[&str]) -> Result<Vec<bool>> {
        let labels = self.labels();
        let mut mask = vec![false; labels.len()];
        for &name in event {
            match labels.binary_search_by(|l| l.as_str().cmp(name)) {
                Ok(i) => mask[i] = true,
                Err(_) => return Err(Error::UnknownOutcome(name.to_owned())),
            }
        }
        Ok(mask)
    }
}

fn event_sum(member: &JointModel, position: usize, mask: &[bool]) -> f64 {
    member.conditionals()[position]
        .probs()
        .iter()
        .zip(mask)
        .filter(|(_, &keep)| keep)
        .map(|(&p, _)| p)
        .sum()
}

/// The plausibility of the event: the maximum over ensemble members of the
/// event's conditional probability given `X = x`.
pub fn upper_probability(ensemble: &ModelEnsemble, x: u64, event: &[&str]) -> Result<f64> {
    let position = ensemble.position_of(x)?;
    let mask = ensemble.event_mask(event)?;
    Ok(ensemble
        .members()
        .iter()
        .map(|m| event_sum(m, position, &mask))
        .fold(0.0, f64::max))
}

/// The belief in the event: one minus the plausibility of its complement,
/// which equals the minimum over members of the event's probability.
pub fn lower_probability(ensemble: &ModelEnsemble, x: u64, event: &[&str]) -> Result<f64> {
    let mask = ensemble.event_mask(event)?;
    let complement: Vec<&str> = ensemble
        .labels()
        .iter()
        .zip(&mask)
        .filter(|(_, &keep)| !keep)
        .map(|(label, _)| label.as_str())
        .collect();
    Ok(1.0 - upper_probability(ensemble, x, &complement)?)
}

/// Per-outcome upper/lower probabilities and don't-know mass at one data
/// value.
///
/// Serializes as `{outcome: {"upper": .., "lower": .., "dont_know": ..}}`
/// with values rounded half-even to six decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityAssignment {
    labels: Vec<String>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    dont_know: Vec<f64>,
}

impl PlausibilityAssignment {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn upper(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.upper[i])
    }

    pub fn lower(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.lower[i])
    }

    pub fn dont_know(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.dont_know[i])
    }
}

impl Serialize for PlausibilityAssignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            upper: f64,
            lower: f64,
            dont_know: f64,
        }
        let mut map = serializer.serialize_map(Some(self.labels.len()))?;
        for (i, label) in self.labels.iter().enumerate() {
            map.serialize_entry(
                label,
                &Entry {
                    upper: round_half_even(self.upper[i], 6),
                    lower: round_half_even(self.lower[i], 6),
                    dont_know: round_half_even(self.dont_know[i], 6),
                },
            )?;
        }
        map.end()
    }
}

/// Computes the per-outcome upper/lower probabilities and don't-know mass at
/// data value `x`.
pub fn plausibility_assignment(ensemble: &ModelEnsemble, x: u64) -> Result<PlausibilityAssignment> {
    let labels = ensemble.labels().to_vec();
    let mut upper = Vec::with_capacity(labels.len());
    let mut lower = Vec::with_capacity(labels.len());
    for label in &labels {
        upper.push(upper_probability(ensemble, x, &[label])?);
        lower.push(lower_probability(ensemble, x, &[label])?);
    }
    let dont_know = upper.iter().zip(&lower).map(|(u, l)| u - l).collect();
    Ok(PlausibilityAssignment {
        labels,
        upper,
        lower,
        dont_know,
    })
}

/// The level-`alpha` prediction set built from upper probabilities: every
/// outcome some member finds more than `alpha`-probable. Equals the union of
/// the members' own prediction sets.
pub fn plausibility_prediction_set(
    ensemble: &ModelEnsemble,
    x: u64,
    alpha: f64,
) -> Result<PredictionSet> {
    validate_alpha(alpha)?;
    let position = ensemble.position_of(x)?;
    let members = ensemble
        .labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            ensemble
                .members()
                .iter()
                .any(|m| m.conditionals()[position].probs()[i] > alpha)
        })
        .map(|(_, label)| label.clone())
        .collect();
    Ok(PredictionSet::from_members(alpha, members))
}

/// Validity of one ensemble member with respect to the shared plausibility
/// set.
#[derive(Debug, Clone, Serialize)]
pub struct MemberValidity {
    /// Exact miscoverage of the member's own prediction sets.
    pub own_miscoverage: f64,
    /// Exact miscoverage of the plausibility (union) prediction sets under
    /// this member's distribution.
    pub plausibility_miscoverage: f64,
    /// Whether the member satisfies `P{pi_X(Y) <= alpha} <= alpha`.
    pub hypothesis_holds: bool,
}

/// Exact per-member verification of plausibility-set validity.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleValidityReport {
    pub alpha: f64,
    pub members: Vec<MemberValidity>,
    /// Largest plausibility-set miscoverage over the members.
    pub max_plausibility_miscoverage: f64,
    /// Whether that maximum is at most `alpha`.
    pub within_alpha: bool,
    /// Whether every member satisfied the dominance hypothesis at `alpha`.
    pub all_hypotheses_hold: bool,
    /// True only when the hypothesis held for every member *and* the maximum
    /// miscoverage is within `alpha`; the guarantee is conditional, so a
    /// hypothesis failure is flagged instead of being silently assumed away.
    pub validity_guaranteed: bool,
}

/// For each member, enumerates the exact probability that the plausibility
/// set excludes the true outcome, and checks the member's own dominance
/// hypothesis at `alpha` first.
pub fn check_ensemble_validity(
    ensemble: &ModelEnsemble,
    alpha: f64,
) -> Result<EnsembleValidityReport> {
    validate_alpha(alpha)?;
    let reference = &ensemble.members()[0];
    let data_values = reference.data_values();
    let labels = ensemble.labels();

    // Plausibility set per data value, shared by all members.
    let plaus_sets: Vec<PredictionSet> = data_values
        .iter()
        .map(|&x| plausibility_prediction_set(ensemble, x, alpha))
        .collect::<Result<_>>()?;

    let mut members = Vec::with_capacity(ensemble.members().len());
    for member in ensemble.members() {
        let own_miscoverage = exact_miscoverage(member, alpha)?;
        let hypothesis_holds = miscoverage_cdf(member)?.evaluate(alpha) <= alpha;
        let mut plausibility_miscoverage = 0.0;
        for ((weight, pi), set) in member
            .marginal()
            .iter()
            .zip(member.conditionals())
            .zip(&plaus_sets)
        {
            let excluded: f64 = labels
                .iter()
                .zip(pi.probs())
                .filter(|(label, _)| !set.contains(label))
                .map(|(_, &p)| p)
                .sum();
            plausibility_miscoverage += weight * excluded;
        }
        members.push(MemberValidity {
            own_miscoverage,
            plausibility_miscoverage: plausibility_miscoverage.min(1.0),
            hypothesis_holds,
        });
    }

    let max_plausibility_miscoverage = members
        .iter()
        .map(|m| m.plausibility_miscoverage)
        .fold(0.0, f64::max);
    let within_alpha = max_plausibility_miscoverage <= alpha;
    let all_hypotheses_hold = members.iter().all(|m| m.hypothesis_holds);
    Ok(EnsembleValidityReport {
        alpha,
        members,
        max_plausibility_miscoverage,
        within_alpha,
        all_hypotheses_hold,
        validity_guaranteed: within_alpha && all_hypotheses_hold,
    })
}

/// What to do when offered a bet on an event at a given price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetDecision {
    /// The price is below the belief in the event: betting on the event is
    /// favorable under every candidate model.
    AcceptEvent,
    /// The price exceeds the event's plausibility: betting against it is
    /// favorable under every candidate model.
    AcceptComplement,
    /// The price falls inside the don't-know gap; no side is coherent across
    /// all candidate models.
    Abstain,
}

/// Decides a bet on `event` at `price` from a per-outcome assignment:
/// accept the event below its lower probability, accept the complement above
/// its upper probability, abstain in between.
///
/// The per-outcome table determines bounds for the empty event, the full
/// outcome set, single outcomes, and complements of single outcomes. Other
/// events need the ensemble itself (via [`upper_probability`] and
/// [`lower_probability`]), because plausibilities are not additive.
pub fn bet_decision(
    assignment: &PlausibilityAssignment,
    event: &[&str],
    price: f64,
) -> Result<BetDecision> {
    if !price.is_finite() || price <= 0.0 || price >= 1.0 {
        return Err(Error::Domain(format!(
            "price must lie strictly inside (0, 1), got {price}"
        )));
    }
    let event_set: BTreeSet<&str> = event.iter().copied().collect();
    for &name in &event_set {
        if assignment.index_of(name).is_none() {
            return Err(Error::UnknownOutcome(name.to_owned()));
        }
    }
    let n = assignment.labels().len();
    let (lower, upper) = match event_set.len() {
        0 => (0.0, 0.0),
        1 => {
            let label = event_set.first().unwrap();
            (
                assignment.lower(label).unwrap(),
                assignment.upper(label).unwrap(),
            )
        }
        k if k == n => (1.0, 1.0),
        k if k == n - 1 => {
            let missing = assignment
                .labels()
                .iter()
                .find(|l| !event_set.contains(l.as_str()))
                .expect("exactly one outcome missing");
            (
                1.0 - assignment.upper(missing).unwrap(),
                1.0 - assignment.lower(missing).unwrap(),
            )
        }
        _ => {
            return Err(Error::Domain(
                "event bounds are not derivable from a per-outcome assignment; \
                 compute them from the ensemble instead"
                    .into(),
            ))
        }
    };
    Ok(if price < lower {
        BetDecision::AcceptEvent
    } else if price > upper {
        BetDecision::AcceptComplement
    } else {
        BetDecision::Abstain
    })
}
