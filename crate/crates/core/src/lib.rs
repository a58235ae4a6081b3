//! Valid prediction sets and plausibility bounds for finite-outcome
//! forecasts.
//!
//! Instead of publishing a single win probability and leaving its
//! interpretation to the reader, this crate turns a predictive model into
//! outputs with operational meaning:
//!
//! * **Prediction sets** ([`prediction_set`]): every outcome whose predictive
//!   probability strictly exceeds a small level `alpha`. Under the posited
//!   model the set excludes the truth with probability at most `alpha` for
//!   all levels below the model's threshold ([`validity_threshold`]), which
//!   [`check_validity`] verifies by exact enumeration rather than assumption.
//! * **Plausibility bounds** ([`plausibility_assignment`]): when a whole
//!   ensemble of models is reasonable, per-outcome upper/lower probabilities
//!   and the "don't know" gap between them make the model uncertainty part of
//!   the output instead of a hidden choice.
//!
//! The built-in poll model is binary (`C` vs `T`) with a uniform marginal
//! over counts and a logistic predictive rule ([`logistic_rule`]); the
//! nonresponse ensemble ([`imputation_ensemble`]) brackets every way the
//! nonresponders could lean between its two extremes.
//!
//! ```
//! use predset::{binomial_flat_joint, prediction_set, LogisticRuleParams};
//!
//! let params = LogisticRuleParams::new(10.0, 1000).unwrap();
//! let model = binomial_flat_joint(&params).unwrap();
//! let set = prediction_set(model.conditional_at(470).unwrap(), 0.05).unwrap();
//! assert_eq!(set.members(), ["C", "T"]); // too close to call
//! ```

pub mod error;
pub mod model;
pub mod nonresponse;
pub mod plausibility;
pub mod prediction;
pub mod util;
pub mod validity;

pub use error::{Error, Result};
pub use model::{
    binomial_flat_joint, logistic_rule, theta_hat, JointModel, LogisticRuleParams, OutcomeSpace,
    PollData, PredictiveDistribution, CANDIDATE_C, CANDIDATE_T, PROB_SUM_TOLERANCE,
};
pub use nonresponse::{imputation_ensemble, mar_theta_hat, naive_mar_rule};
pub use plausibility::{
    bet_decision, check_ensemble_validity, lower_probability, plausibility_assignment,
    plausibility_prediction_set, upper_probability, BetDecision, EnsembleValidityReport,
    MemberValidity, ModelEnsemble, PlausibilityAssignment,
};
pub use prediction::{prediction_set, set_collapse_bounds, validity_threshold, PredictionSet};
pub use util::round_half_even;
pub use validity::{
    check_enumeration_size, check_validity, default_alpha_grid, exact_miscoverage, linspace_grid,
    miscoverage_cdf, monte_carlo_miscoverage, MiscoverageCurve, MonteCarloEstimate, ValidityReport,
    MAX_ENUMERATION_PAIRS,
};
