//! End-to-end library flows on the illustrative polls: from raw poll JSON
//! through prediction sets, validity checks, plausibility bounds, and betting
//! decisions.

use predset::{
    bet_decision, binomial_flat_joint, check_ensemble_validity, check_validity,
    imputation_ensemble, linspace_grid, miscoverage_cdf, naive_mar_rule, plausibility_assignment,
    plausibility_prediction_set, prediction_set, round_half_even, validity_threshold, BetDecision,
    LogisticRuleParams, PollData,
};

fn round3(x: f64) -> f64 {
    round_half_even(x, 3)
}

const NONRESPONSE_POLL: &str = r#"{"n": 1000, "counts": {"C": 475, "T": 425}, "nonresponse": 100}"#;
const CLOSE_POLL: &str = r#"{"n": 1000, "counts": {"C": 530, "T": 470}, "nonresponse": 0}"#;

#[test]
fn close_poll_is_too_close_to_call_end_to_end() {
    let poll = PollData::from_json_str(CLOSE_POLL).unwrap();
    let params = LogisticRuleParams::new(10.0, poll.n()).unwrap();

    let pi = naive_mar_rule(&poll, &params).unwrap();
    assert_eq!(round3(pi.prob("T").unwrap()), 0.426);
    assert_eq!(round3(pi.prob("C").unwrap()), 0.574);

    let set = prediction_set(&pi, 0.05).unwrap();
    assert_eq!(set.members(), ["C", "T"]);
    assert!(!set.is_singleton());

    // The set stays valid across the whole guaranteed range.
    let model = binomial_flat_joint(&params).unwrap();
    assert_eq!(validity_threshold(&model), 0.5);
    let grid = linspace_grid(0.001, 0.499, 512).unwrap();
    let report = check_validity(&model, &grid).unwrap();
    assert!(report.holds.iter().all(|&h| h));
    assert!(report.all_hold_below_threshold);
}

#[test]
fn nonresponse_poll_plausibility_end_to_end() {
    let poll = PollData::from_json_str(NONRESPONSE_POLL).unwrap();
    let params = LogisticRuleParams::new(10.0, poll.n()).unwrap();
    let ensemble = imputation_ensemble(&poll, &params, 2).unwrap();
    let observed = poll.count("T").unwrap();

    let assignment = plausibility_assignment(&ensemble, observed).unwrap();
    assert_eq!(round3(assignment.upper("T").unwrap()), 0.562);
    assert_eq!(round3(assignment.upper("C").unwrap()), 0.679);
    assert_eq!(round3(assignment.lower("T").unwrap()), 0.321);
    assert_eq!(round3(assignment.lower("C").unwrap()), 0.438);
    assert_eq!(round3(assignment.dont_know("T").unwrap()), 0.241);

    let set = plausibility_prediction_set(&ensemble, observed, 0.05).unwrap();
    assert_eq!(set.members(), ["C", "T"]);

    // Every member keeps its validity guarantee with respect to that set.
    let report = check_ensemble_validity(&ensemble, 0.05).unwrap();
    assert!(report.validity_guaranteed);
}

#[test]
fn betting_on_the_nonresponse_poll() {
    let poll = PollData::from_json_str(NONRESPONSE_POLL).unwrap();
    let params = LogisticRuleParams::new(10.0, poll.n()).unwrap();
    let ensemble = imputation_ensemble(&poll, &params, 2).unwrap();
    let assignment = plausibility_assignment(&ensemble, 425).unwrap();

    // lower(C) ~ 0.438, upper(C) ~ 0.679.
    assert_eq!(
        bet_decision(&assignment, &["C"], 0.3).unwrap(),
        BetDecision::AcceptEvent
    );
    assert_eq!(
        bet_decision(&assignment, &["C"], 0.5).unwrap(),
        BetDecision::Abstain
    );
    assert_eq!(
        bet_decision(&assignment, &["C"], 0.7).unwrap(),
        BetDecision::AcceptComplement
    );

    // Without nonresponse the bounds collapse to a single probability and
    // any price below it is acceptable, as for an ordinary two-sided bet.
    let sure_poll = PollData::from_json_str(CLOSE_POLL).unwrap();
    let singleton = imputation_ensemble(&sure_poll, &params, 2).unwrap();
    let a = plausibility_assignment(&singleton, 470).unwrap();
    let pi_c = a.upper("C").unwrap(); // ~ 0.574
    assert_eq!(
        bet_decision(&a, &["C"], pi_c - 0.01).unwrap(),
        BetDecision::AcceptEvent
    );
    assert_eq!(
        bet_decision(&a, &["C"], pi_c + 0.01).unwrap(),
        BetDecision::AcceptComplement
    );
}

#[test]
fn mar_baseline_understates_the_spread() {
    let poll = PollData::from_json_str(NONRESPONSE_POLL).unwrap();
    let params = LogisticRuleParams::new(10.0, poll.n()).unwrap();
    let mar = naive_mar_rule(&poll, &params).unwrap();
    assert_eq!(round3(mar.prob("T").unwrap()), 0.430);
    assert_eq!(round3(mar.prob("C").unwrap()), 0.570);

    // The single MAR number hides a quarter of don't-know mass.
    let ensemble = imputation_ensemble(&poll, &params, 2).unwrap();
    let assignment = plausibility_assignment(&ensemble, 425).unwrap();
    for label in ["C", "T"] {
        let p = mar.prob(label).unwrap();
        assert!(assignment.lower(label).unwrap() <= p);
        assert!(p <= assignment.upper(label).unwrap());
        assert!(assignment.dont_know(label).unwrap() > 0.2);
    }
}

#[test]
fn uninformative_data_still_gives_trivially_valid_sets() {
    let model = predset::JointModel::uninformative_binary(100).unwrap();
    let curve = miscoverage_cdf(&model).unwrap();
    assert_eq!(curve.evaluate(0.4), 0.0);
    assert!(curve.evaluate(0.75) > 0.75);
    let report = check_validity(&model, &[0.05, 0.4]).unwrap();
    assert!(report.holds.iter().all(|&h| h));
}
