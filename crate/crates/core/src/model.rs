//! Domain types for finite-outcome prediction: outcome spaces, poll data,
//! predictive distributions, and joint data/outcome models.
//!
//! A *predictive distribution* `pi_x` assigns a probability to every outcome
//! given observed data `x`. A [`JointModel`] couples a marginal distribution
//! over a finite data space with one predictive distribution per data value,
//! which is all the later validity and plausibility machinery needs.
//!
//! The built-in poll model is binary (candidates `C` and `T`): the data value
//! is the number of polled voters supporting `T` out of `n`, the marginal is
//! uniform on `{0, ..., n}` (binomial count under a flat prior), and the
//! predictive rule is logistic in the observed share `theta_hat = x / n`:
//!
//! ```text
//! pi(T) = exp(lambda * (theta_hat - 1/2)) / (1 + exp(lambda * (theta_hat - 1/2)))
//! pi(C) = 1 - pi(T)
//! ```
//!
//! `lambda > 0` controls how sharply the poll share moves the prediction.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the first binary candidate.
pub const CANDIDATE_C: &str = "C";
/// Label of the second binary candidate; the logistic rule's target.
pub const CANDIDATE_T: &str = "T";

/// Tolerance for probability vectors summing to one.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// A finite, ordered set of outcome labels.
///
/// Labels are held in lexicographic order so that every serialization and
/// enumeration over outcomes is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    labels: Vec<String>,
}

impl OutcomeSpace {
    /// Builds a space from distinct, non-empty labels. At least two outcomes
    /// are required; labels are sorted into canonical (lexicographic) order.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort_unstable();
        if labels.iter().any(String::is_empty) {
            return Err(Error::InvalidInput(
                "outcome labels must be non-empty".into(),
            ));
        }
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(
                "outcome labels must be distinct".into(),
            ));
        }
        if labels.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "an outcome space needs at least 2 labels, got {}",
                labels.len()
            )));
        }
        Ok(Self { labels })
    }

    /// The shared binary space `{C, T}`.
    pub fn binary() -> Arc<OutcomeSpace> {
        static BINARY: OnceLock<Arc<OutcomeSpace>> = OnceLock::new();
        Arc::clone(BINARY.get_or_init(|| {
            Arc::new(OutcomeSpace::new([CANDIDATE_C, CANDIDATE_T]).expect("static binary space"))
        }))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Position of `label` in canonical order, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }
}

/// A probability distribution over the outcomes of one [`OutcomeSpace`],
/// i.e. the conditional distribution of the outcome given one data value.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDistribution {
    space: Arc<OutcomeSpace>,
    probs: Vec<f64>,
}

impl PredictiveDistribution {
    /// Builds a distribution from a label-keyed map. Every outcome of the
    /// space must be present, nothing else, and the values must be in
    /// `[0, 1]` and sum to one within [`PROB_SUM_TOLERANCE`].
    pub fn new(space: Arc<OutcomeSpace>, probs: &BTreeMap<String, f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::InvalidInput(format!(
                "distribution has {} entries for a space of {} outcomes",
                probs.len(),
                space.len()
            )));
        }
        let mut aligned = Vec::with_capacity(space.len());
        for label in space.labels() {
            match probs.get(label) {
                Some(&p) => aligned.push(p),
                None => return Err(Error::UnknownOutcome(label.clone())),
            }
        }
        Self::from_probs(space, aligned)
    }

    /// Builds a distribution from probabilities aligned with the space's
    /// canonical label order.
    pub fn from_probs(space: Arc<OutcomeSpace>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} probabilities, got {}",
                space.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {sum}, expected 1 within {PROB_SUM_TOLERANCE}"
            )));
        }
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    /// Probabilities in canonical label order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of a single outcome.
    pub fn prob(&self, label: &str) -> Result<f64> {
        self.space
            .index_of(label)
            .map(|i| self.probs[i])
            .ok_or_else(|| Error::UnknownOutcome(label.to_owned()))
    }
}

/// A joint distribution for (data, outcome): a marginal pmf over a finite
/// data space together with a predictive distribution at every data value.
#[derive(Debug, Clone)]
pub struct JointModel {
    space: Arc<OutcomeSpace>,
    data_values: Vec<u64>,
    index: BTreeMap<u64, usize>,
    marginal: Vec<f64>,
    conditional: Vec<PredictiveDistribution>,
}

impl JointModel {
    /// Builds a joint model. Data values must be distinct; the marginal must
    /// be a pmf over them (sum 1 within [`PROB_SUM_TOLERANCE`]); a conditional
    /// distribution over `space` is required for every data value.
    pub fn new(
        space: Arc<OutcomeSpace>,
        data_values: Vec<u64>,
        marginal: Vec<f64>,
        conditional: Vec<PredictiveDistribution>,
    ) -> Result<Self> {
        if data_values.is_empty() {
            return Err(Error::InvalidInput("data space must be non-empty".into()));
        }
        if marginal.len() != data_values.len() || conditional.len() != data_values.len() {
            return Err(Error::InvalidInput(format!(
                "expected one marginal weight and one conditional per data value: \
                 {} values, {} weights, {} conditionals",
                data_values.len(),
                marginal.len(),
                conditional.len()
            )));
        }
        let mut index = BTreeMap::new();
        for (i, &x) in data_values.iter().enumerate() {
            if index.insert(x, i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate data value {x}")));
            }
        }
        if marginal.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput(
                "marginal weights must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = marginal.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "marginal sums to {sum}, expected 1 within {PROB_SUM_TOLERANCE}"
            )));
        }
        if conditional
            .iter()
            .any(|c| c.space().labels() != space.labels())
        {
            return Err(Error::InvalidInput(
                "every conditional must share the model's outcome space".into(),
            ));
        }
        Ok(Self {
            space,
            data_values,
            index,
            marginal,
            conditional,
        })
    }

    /// A binary model whose data carries no information: uniform marginal on
    /// `{0, ..., n}` and `pi_x = (1/2, 1/2)` at every `x`.
    pub fn uninformative_binary(n: u64) -> Result<JointModel> {
        let space = OutcomeSpace::binary();
        let len = n + 1;
        let weight = 1.0 / len as f64;
        let half = PredictiveDistribution::from_probs(Arc::clone(&space), vec![0.5, 0.5])?;
        JointModel::new(
            space,
            (0..=n).collect(),
            vec![weight; len as usize],
            vec![half; len as usize],
        )
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    /// Data values in construction order.
    pub fn data_values(&self) -> &[u64] {
        &self.data_values
    }

    /// Marginal pmf aligned with [`Self::data_values`].
    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// Conditionals aligned with [`Self::data_values`].
    pub fn conditionals(&self) -> &[PredictiveDistribution] {
        &self.conditional
    }

    /// The predictive distribution at data value `x`.
    pub fn conditional_at(&self, x: u64) -> Result<&PredictiveDistribution> {
        self.index
            .get(&x)
            .map(|&i| &self.conditional[i])
            .ok_or(Error::UnknownDataValue(x))
    }

    pub(crate) fn position_of(&self, x: u64) -> Option<usize> {
        self.index.get(&x).copied()
    }
}

/// Parameters of the binary logistic predictive rule: sharpness `lambda > 0`
/// and poll size `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticRuleParams {
    lambda: f64,
    n: u64,
}

impl LogisticRuleParams {
    pub fn new(lambda: f64, n: u64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "sharpness lambda must be a positive finite number, got {lambda}"
            )));
        }
        if n == 0 {
            return Err(Error::Domain("poll size n must be at least 1".into()));
        }
        Ok(Self { lambda, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Numerically stable logistic function.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// The logistic predictive rule over `{C, T}`:
/// `pi(T) = sigmoid(lambda * (theta_hat - 1/2))`, `pi(C) = 1 - pi(T)`.
///
/// Strictly increasing in `theta_hat` and symmetric: the probability `T`
/// gets at share `theta_hat` equals the probability `C` gets at
/// `1 - theta_hat`.
pub fn logistic_rule(
    theta_hat: f64,
    params: &LogisticRuleParams,
) -> Result<PredictiveDistribution> {
    if !(0.0..=1.0).contains(&theta_hat) {
        return Err(Error::Domain(format!(
            "theta_hat must lie in [0, 1], got {theta_hat}"
        )));
    }
    let pi_t = sigmoid(params.lambda() * (theta_hat - 0.5));
    // The complement keeps the pair summing to exactly 1.
    PredictiveDistribution::from_probs(OutcomeSpace::binary(), vec![1.0 - pi_t, pi_t])
}

/// The binomial/flat-prior poll model: marginal uniform on `{0, ..., n}`
/// with the logistic rule at `theta_hat = x / n` as the conditional.
pub fn binomial_flat_joint(params: &LogisticRuleParams) -> Result<JointModel> {
    let n = params.n();
    let len = n + 1;
    let weight = 1.0 / len as f64;
    let conditional = (0..=n)
        .map(|x| logistic_rule(x as f64 / n as f64, params))
        .collect::<Result<Vec<_>>>()?;
    JointModel::new(
        OutcomeSpace::binary(),
        (0..=n).collect(),
        vec![weight; len as usize],
        conditional,
    )
}

/// One poll: `n` people asked, a support count per outcome, and the number
/// who did not respond. The counts and the nonresponse must add up to `n`.
///
/// The JSON form is `{"n": int, "counts": {label: int, ...}, "nonresponse": int}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPollData")]
pub struct PollData {
    n: u64,
    counts: BTreeMap<String, u64>,
    nonresponse: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPollData {
    n: u64,
    counts: BTreeMap<String, u64>,
    nonresponse: u64,
}

impl TryFrom<RawPollData> for PollData {
    type Error = Error;

    fn try_from(raw: RawPollData) -> Result<Self> {
        PollData::new(raw.n, raw.counts, raw.nonresponse)
    }
}

impl PollData {
    pub fn new(n: u64, counts: BTreeMap<String, u64>, nonresponse: u64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidInput(
                "poll needs at least one outcome count".into(),
            ));
        }
        if counts.keys().any(String::is_empty) {
            return Err(Error::InvalidInput(
                "outcome labels must be non-empty".into(),
            ));
        }
        let responses: u64 = counts.values().sum();
        let total = responses
            .checked_add(nonresponse)
            .ok_or_else(|| Error::InvalidInput("poll counts overflow".into()))?;
        if total != n {
            return Err(Error::InvalidInput(format!(
                "poll counts ({responses}) plus nonresponse ({nonresponse}) must equal n ({n})"
            )));
        }
        Ok(Self {
            n,
            counts,
            nonresponse,
        })
    }

    /// Parses and validates the poll JSON object.
    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidInput(format!("malformed poll JSON: {e}")))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, label: &str) -> Option<u64> {
        self.counts.get(label).copied()
    }

    pub fn nonresponse(&self) -> u64 {
        self.nonresponse
    }

    /// Number of people who answered.
    pub fn responses(&self) -> u64 {
        self.n - self.nonresponse
    }

    /// Whether the poll is over exactly the binary candidates `{C, T}`.
    pub fn is_binary(&self) -> bool {
        self.counts.len() == 2
            && self.counts.contains_key(CANDIDATE_C)
            && self.counts.contains_key(CANDIDATE_T)
    }
}

/// Observed share for `target` after crediting it with `imputed_to_target`
/// of the nonresponders: `(counts[target] + imputed) / n`.
pub fn theta_hat(poll: &PollData, target: &str, imputed_to_target: u64) -> Result<f64> {
    let count = poll
        .count(target)
        .ok_or_else(|| Error::UnknownOutcome(target.to_owned()))?;
    if imputed_to_target > poll.nonresponse() {
        return Err(Error::Domain(format!(
            "cannot impute {imputed_to_target} of {} nonresponders",
            poll.nonresponse()
        )));
    }
    if poll.n() == 0 {
        return Err(Error::Domain("poll size is zero".into()));
    }
    Ok((count + imputed_to_target) as f64 / poll.n() as f64)
}
