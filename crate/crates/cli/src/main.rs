//! `predset`: prediction-set and plausibility reports for binary polls.
//!
//! Subcommands:
//!
//! * `predict`  level-`alpha` prediction set for one poll (JSON report)
//! * `plaus`    nonresponse plausibility bounds for one poll (JSON report)
//! * `curve`    logistic-rule or miscoverage curve as two-column TSV
//! * `validity` exact miscoverage over a level grid (JSON report)
//!
//! Exit codes: 0 success, 2 malformed input, 3 domain error, 4 enumeration
//! too large. Output is deterministic: identical invocations produce
//! byte-identical bytes. JSON reports match the schemas under `schemas/`.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use predset::{
    binomial_flat_joint, check_enumeration_size, check_validity, imputation_ensemble,
    linspace_grid, logistic_rule, mar_theta_hat, miscoverage_cdf, monte_carlo_miscoverage,
    naive_mar_rule, plausibility_assignment, plausibility_prediction_set, prediction_set,
    round_half_even, theta_hat, Error, JointModel, LogisticRuleParams, PlausibilityAssignment,
    PollData, PredictionSet, PredictiveDistribution, Result, ValidityReport, CANDIDATE_T,
};

#[derive(Parser)]
#[command(
    name = "predset",
    version,
    about = "Valid prediction sets and plausibility bounds for finite-outcome forecasts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prediction set and win probabilities for one poll.
    Predict(PredictArgs),
    /// Plausibility bounds for one poll under every nonresponse lean.
    Plaus(PlausArgs),
    /// Curve data as two-column TSV.
    Curve(CurveArgs),
    /// Exact miscoverage report over a level grid.
    Validity(ValidityArgs),
}

#[derive(Args)]
struct PredictArgs {
    /// Poll JSON file: {"n": int, "counts": {label: int, ...}, "nonresponse": int}.
    #[arg(long)]
    poll: PathBuf,
    /// Sharpness of the logistic rule.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Prediction-set level.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    alpha: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlausArgs {
    /// Poll JSON file: {"n": int, "counts": {label: int, ...}, "nonresponse": int}.
    #[arg(long)]
    poll: PathBuf,
    /// Sharpness of the logistic rule.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Prediction-set level.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    alpha: f64,
    /// Number of nonresponse-lean grid points (endpoints always included).
    #[arg(long, default_value_t = 2)]
    grid_size: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CurveKind {
    /// Win probability for T as a function of the observed share.
    Logistic,
    /// Distribution function of the truth's predictive probability.
    Miscoverage,
}

#[derive(Args)]
struct CurveArgs {
    /// Which curve to emit.
    kind: CurveKind,
    /// Poll size (miscoverage curve only).
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Sharpness of the logistic rule.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Write the TSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidityArgs {
    /// Poll size.
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Sharpness of the logistic rule.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Level grid as start:stop:count over (0, 1).
    #[arg(long, default_value = "0.001:0.999:512")]
    grid: String,
    /// Use the uninformative model (pi = 1/2 everywhere) instead of the
    /// logistic rule.
    #[arg(long)]
    uninformative: bool,
    /// Also run a Monte Carlo estimate with this many trials.
    #[arg(long)]
    mc_trials: Option<u64>,
    /// Level for the Monte Carlo estimate.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    alpha: f64,
    /// Seed for the Monte Carlo estimate.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PredictReport {
    lambda: f64,
    alpha: f64,
    poll: PollData,
    /// Missing-at-random share plugged into the logistic rule.
    theta_hat: f64,
    probabilities: BTreeMap<String, f64>,
    prediction_set: Vec<String>,
    too_close_to_call: bool,
    empty_set: bool,
}

#[derive(Serialize)]
struct NaiveMarSection {
    theta_hat: f64,
    probabilities: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct PlausReport {
    lambda: f64,
    alpha: f64,
    poll: PollData,
    /// Share with every nonresponder counted against T.
    theta_lo: f64,
    /// Share with every nonresponder counted for T.
    theta_hi: f64,
    assignment: PlausibilityAssignment,
    prediction_set: Vec<String>,
    too_close_to_call: bool,
    empty_set: bool,
    naive_mar: NaiveMarSection,
}

#[derive(Serialize)]
struct MonteCarloSection {
    alpha: f64,
    trials: u64,
    seed: u64,
    estimate: f64,
    std_error: f64,
    exact: f64,
}

#[derive(Serialize)]
struct ValidityCliReport {
    model: &'static str,
    n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(flatten)]
    report: ValidityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<MonteCarloSection>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(args) => cmd_predict(args),
        Command::Plaus(args) => cmd_plaus(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Validity(args) => cmd_validity(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) => 2,
        Error::Domain(_) | Error::UnknownOutcome(_) | Error::UnknownDataValue(_) => 3,
        Error::EnumerationTooLarge { .. } => 4,
    }
}

fn read_poll(path: &PathBuf) -> Result<PollData> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    PollData::from_json_str(&text)
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn rounded_probabilities(pi: &PredictiveDistribution) -> BTreeMap<String, f64> {
    pi.space()
        .labels()
        .iter()
        .zip(pi.probs())
        .map(|(label, &p)| (label.clone(), round_half_even(p, 6)))
        .collect()
}

fn set_members(set: &PredictionSet) -> Vec<String> {
    set.members().to_vec()
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let poll = read_poll(&args.poll)?;
    let params = LogisticRuleParams::new(args.lambda, poll.n())?;
    let pi = naive_mar_rule(&poll, &params)?;
    let set = prediction_set(&pi, args.alpha)?;
    let report = PredictReport {
        lambda: args.lambda,
        alpha: args.alpha,
        theta_hat: mar_theta_hat(&poll)?,
        probabilities: rounded_probabilities(&pi),
        prediction_set: set_members(&set),
        too_close_to_call: !set.is_singleton(),
        empty_set: set.is_empty(),
        poll,
    };
    write_output(args.out.as_ref(), &to_json(&report))
}

fn cmd_plaus(args: PlausArgs) -> Result<()> {
    let poll = read_poll(&args.poll)?;
    let params = LogisticRuleParams::new(args.lambda, poll.n())?;
    let ensemble = imputation_ensemble(&poll, &params, args.grid_size)?;
    let observed = poll.count(CANDIDATE_T).expect("binary poll");
    let assignment = plausibility_assignment(&ensemble, observed)?;
    let set = plausibility_prediction_set(&ensemble, observed, args.alpha)?;
    let mar = naive_mar_rule(&poll, &params)?;
    let report = PlausReport {
        lambda: args.lambda,
        alpha: args.alpha,
        theta_lo: theta_hat(&poll, CANDIDATE_T, 0)?,
        theta_hi: theta_hat(&poll, CANDIDATE_T, poll.nonresponse())?,
        assignment,
        prediction_set: set_members(&set),
        too_close_to_call: !set.is_singleton(),
        empty_set: set.is_empty(),
        naive_mar: NaiveMarSection {
            theta_hat: mar_theta_hat(&poll)?,
            probabilities: rounded_probabilities(&mar),
        },
        poll,
    };
    write_output(args.out.as_ref(), &to_json(&report))
}

fn cmd_curve(args: CurveArgs) -> Result<()> {
    let content = match args.kind {
        CurveKind::Logistic => {
            // The rule itself does not depend on the poll size.
            let params = LogisticRuleParams::new(args.lambda, 1)?;
            let mut tsv = String::new();
            for i in 0..=1000u32 {
                let theta = f64::from(i) / 1000.0;
                let pi_t = logistic_rule(theta, &params)?.prob(CANDIDATE_T)?;
                tsv.push_str(&format!("{theta}\t{pi_t}\n"));
            }
            tsv
        }
        CurveKind::Miscoverage => {
            check_enumeration_size(args.n.saturating_add(1), 2)?;
            let params = LogisticRuleParams::new(args.lambda, args.n)?;
            let model = binomial_flat_joint(&params)?;
            miscoverage_cdf(&model)?.to_tsv()
        }
    };
    write_output(args.out.as_ref(), &content)
}

fn cmd_validity(args: ValidityArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    check_enumeration_size(args.n.saturating_add(1), 2)?;
    let (model, model_name, lambda): (JointModel, &'static str, Option<f64>) = if args.uninformative
    {
        (
            JointModel::uninformative_binary(args.n)?,
            "uninformative",
            None,
        )
    } else {
        let params = LogisticRuleParams::new(args.lambda, args.n)?;
        (binomial_flat_joint(&params)?, "logistic", Some(args.lambda))
    };
    let report = check_validity(&model, &grid)?;
    let monte_carlo = match args.mc_trials {
        Some(trials) => {
            let mc = monte_carlo_miscoverage(&model, args.alpha, trials, args.seed)?;
            Some(MonteCarloSection {
                alpha: args.alpha,
                trials,
                seed: args.seed,
                estimate: mc.estimate,
                std_error: mc.std_error,
                exact: miscoverage_cdf(&model)?.evaluate(args.alpha),
            })
        }
        None => None,
    };
    let cli_report = ValidityCliReport {
        model: model_name,
        n: args.n,
        lambda,
        report,
        monte_carlo,
    };
    write_output(args.out.as_ref(), &to_json(&cli_report))
}

/// Parses a `start:stop:count` grid specification.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(Error::Domain(format!(
            "grid must be start:stop:count, got `{spec}`"
        )));
    };
    let start: f64 = start
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid start `{start}`")))?;
    let stop: f64 = stop
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid stop `{stop}`")))?;
    let count: usize = count
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid count `{count}`")))?;
    linspace_grid(start, stop, count)
}
