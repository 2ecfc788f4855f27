//! The five-step veto / nomination protocol over simulated machines.
//!
//! 1. every voter sends a copy of its ballot to every machine;
//! 2. each machine aggregates the copies with the rule's channel;
//! 3. each machine measures the aggregate with `|1><1|` and records a bit;
//! 4. records are broadcast so every machine sees all of them;
//! 5. each machine answers Agree iff at least half of the records are 1.
//!
//! Copies are independent preparations of the same state (a joint ballot
//! is re-prepared for each machine). Machines share nothing but the
//! realized ballots, and each draws from its own substream, so results do
//! not depend on whether machines run sequentially or on the rayon pool.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ballots::{realize, BallotAssignment, BallotSpec};
use crate::density::{sample_outcome, winning_probability, Projector};
use crate::error::{QvoteError, Result};
use crate::rule::{evaluate_density, parse, RuleAst};
use crate::stats::summarize;
use crate::streams::machine_stream;

/// Aggregation rule of an election.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Quantum logical veto: AND of all ballots.
    Qlv,
    /// Quantum logical nomination: OR of all ballots.
    Qln,
    Formula(RuleAst),
}

impl Rule {
    /// `"qlv"`, `"qln"` or a formula.
    pub fn from_text(text: &str) -> Result<Self> {
        match text.trim() {
            "qlv" | "QLV" => Ok(Rule::Qlv),
            "qln" | "QLN" => Ok(Rule::Qln),
            formula => Ok(Rule::Formula(parse(formula)?)),
        }
    }

    pub fn to_ast(&self, voters: usize) -> RuleAst {
        match self {
            Rule::Qlv => RuleAst::veto(voters),
            Rule::Qln => RuleAst::nomination(voters),
            Rule::Formula(ast) => ast.clone(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Qlv => f.write_str("qlv"),
            Rule::Qln => f.write_str("qln"),
            Rule::Formula(ast) => write!(f, "{ast}"),
        }
    }
}

/// How an exact half of ones is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// At least half: a tie is Agree.
    #[default]
    Inclusive,
    /// Strictly more than half.
    Strict,
}

/// Machine evaluation order. Without the `parallel` feature both variants
/// run sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    Parallel,
}

impl Default for Schedule {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Schedule::Parallel
        } else {
            Schedule::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Agree,
    Disagree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionConfig {
    pub rule: Rule,
    pub voters: usize,
    pub machines: usize,
    pub ballots: Vec<BallotSpec>,
    pub seed: u64,
    pub trials: u64,
    pub tie: TieRule,
    pub schedule: Schedule,
}

impl ElectionConfig {
    pub fn new(rule: Rule, voters: usize, machines: usize, ballots: Vec<BallotSpec>, seed: u64) -> Self {
        Self {
            rule,
            voters,
            machines,
            ballots,
            seed,
            trials: 1,
            tie: TieRule::default(),
            schedule: Schedule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MachineRecord {
    pub machine: usize,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectionOutcome {
    pub rule: String,
    pub voters: usize,
    pub machines: usize,
    pub seed: u64,
    pub trial: u64,
    pub records: Vec<MachineRecord>,
    /// Decision reached by each machine from its own view, in machine order.
    pub machine_decisions: Vec<Decision>,
    pub decision: Decision,
    pub ones_fraction: f64,
    pub analytic_wp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub empirical_mean: f64,
    pub ci: [f64; 2],
    pub analytic_wp: f64,
    pub samples: u64,
    pub trials: u64,
    pub machines: usize,
}

/// Steps 2 and 3 for one machine: aggregate fresh copies of the ballots
/// and measure.
pub fn run_machine<R: Rng + ?Sized>(
    machine_id: usize,
    ballots: &BallotAssignment,
    rule: &RuleAst,
    rng: &mut R,
) -> Result<u8> {
    if machine_id == 0 {
        return Err(QvoteError::Protocol("machine ids start at 1".into()));
    }
    let aggregate = evaluate_density(rule, ballots)?;
    sample_outcome(&aggregate, &Projector::one(), rng)
}

/// Step 4: synchronous lossless broadcast. Entry `j` is machine `j+1`'s
/// view, the full list of records in machine order.
pub fn broadcast_records(records: &[MachineRecord]) -> Vec<Vec<u8>> {
    let all: Vec<u8> = records.iter().map(|r| r.bit).collect();
    vec![all; records.len()]
}

/// Step 5.
pub fn decide(view: &[u8], tie: TieRule) -> Result<Decision> {
    if view.is_empty() {
        return Err(QvoteError::Protocol("cannot decide on an empty set of records".into()));
    }
    let ones = view.iter().filter(|&&b| b == 1).count();
    let agree = match tie {
        TieRule::Inclusive => 2 * ones >= view.len(),
        TieRule::Strict => 2 * ones > view.len(),
    };
    Ok(if agree { Decision::Agree } else { Decision::Disagree })
}

/// A validated election with realized ballots and its exact aggregate
/// winning probability.
#[derive(Debug, Clone)]
pub struct PreparedElection {
    config: ElectionConfig,
    ast: RuleAst,
    assignment: BallotAssignment,
    analytic_wp: f64,
}

impl PreparedElection {
    pub fn new(config: &ElectionConfig) -> Result<Self> {
        if config.voters == 0 {
            return Err(QvoteError::Config("voters must be at least 1".into()));
        }
        if config.machines == 0 {
            return Err(QvoteError::Config("machines must be at least 1".into()));
        }
        if config.trials == 0 {
            return Err(QvoteError::Config("trials must be at least 1".into()));
        }
        let ast = config.rule.to_ast(config.voters);
        if ast.max_voter() > config.voters {
            return Err(QvoteError::Config(format!(
                "rule mentions v{} but there are {} voters",
                ast.max_voter(),
                config.voters
            )));
        }
        let assignment = realize(&config.ballots, config.voters)?;
        let aggregate = evaluate_density(&ast, &assignment).map_err(|e| match e {
            QvoteError::Evaluation(msg) | QvoteError::Arity(msg) => QvoteError::Config(msg),
            other => other,
        })?;
        let analytic_wp = winning_probability(&aggregate)?;
        Ok(Self { config: config.clone(), ast, assignment, analytic_wp })
    }

    pub fn config(&self) -> &ElectionConfig {
        &self.config
    }

    pub fn rule_ast(&self) -> &RuleAst {
        &self.ast
    }

    pub fn assignment(&self) -> &BallotAssignment {
        &self.assignment
    }

    pub fn analytic_wp(&self) -> f64 {
        self.analytic_wp
    }

    fn machine_bit(&self, trial: u64, machine: usize) -> Result<u8> {
        let mut rng = machine_stream(self.config.seed, trial, machine as u64);
        run_machine(machine, &self.assignment, &self.ast, &mut rng)
    }

    /// Records of every machine in one trial, in machine order.
    pub fn records(&self, trial: u64) -> Result<Vec<MachineRecord>> {
        let n = self.config.machines;
        let bits = map_indices(self.config.schedule, n, |i| self.machine_bit(trial, i + 1))?;
        Ok(bits
            .into_iter()
            .enumerate()
            .map(|(i, bit)| MachineRecord { machine: i + 1, bit })
            .collect())
    }

    /// One full run of steps 1 to 5.
    pub fn run_trial(&self, trial: u64) -> Result<ElectionOutcome> {
        let records = self.records(trial)?;
        let views = broadcast_records(&records);
        let machine_decisions = views
            .iter()
            .map(|v| decide(v, self.config.tie))
            .collect::<Result<Vec<_>>>()?;
        let decision = machine_decisions[0];
        if machine_decisions.iter().any(|d| *d != decision) {
            return Err(QvoteError::Protocol("machines reached different decisions".into()));
        }
        let ones = records.iter().filter(|r| r.bit == 1).count();
        Ok(ElectionOutcome {
            rule: self.config.rule.to_string(),
            voters: self.config.voters,
            machines: self.config.machines,
            seed: self.config.seed,
            trial,
            ones_fraction: ones as f64 / records.len() as f64,
            records,
            machine_decisions,
            decision,
            analytic_wp: self.analytic_wp,
        })
    }

    /// Record bits of `trials` independent elections, pooled.
    pub fn estimate(&self, trials: u64) -> Result<Estimate> {
        if trials == 0 {
            return Err(QvoteError::Config("trials must be at least 1".into()));
        }
        let n = self.config.machines;
        let total = usize::try_from(trials)
            .ok()
            .and_then(|t| t.checked_mul(n))
            .ok_or_else(|| QvoteError::Config("trials x machines overflows".into()))?;
        let bits = map_indices(self.config.schedule, total, |i| {
            self.machine_bit((i / n) as u64, i % n + 1)
        })?;
        let ones = bits.iter().map(|&b| u64::from(b)).sum();
        let summary = summarize(ones, total as u64);
        Ok(Estimate {
            empirical_mean: summary.mean,
            ci: summary.ci,
            analytic_wp: self.analytic_wp,
            samples: total as u64,
            trials,
            machines: n,
        })
    }
}

fn map_indices<F>(schedule: Schedule, len: usize, f: F) -> Result<Vec<u8>>
where
    F: Fn(usize) -> Result<u8> + Sync + Send,
{
    match schedule {
        #[cfg(feature = "parallel")]
        Schedule::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

/// Runs trial 0 of the configured election.
pub fn run_election(config: &ElectionConfig) -> Result<ElectionOutcome> {
    PreparedElection::new(config)?.run_trial(0)
}

/// Pools the records of `trials` elections (`trials * machines` samples).
pub fn estimate_wp(config: &ElectionConfig, trials: u64) -> Result<Estimate> {
    PreparedElection::new(config)?.estimate(trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballots::bell_ballot;

    fn classical(bits: &[u8]) -> Vec<BallotSpec> {
        bits.iter().map(|&b| BallotSpec::classical(b)).collect()
    }

    #[test]
    fn decide_examples() {
        assert_eq!(decide(&[1, 1, 0], TieRule::Inclusive).unwrap(), Decision::Agree);
        assert_eq!(decide(&[1, 0], TieRule::Inclusive).unwrap(), Decision::Agree);
        assert_eq!(decide(&[1, 0], TieRule::Strict).unwrap(), Decision::Disagree);
        assert_eq!(decide(&[0, 0, 0, 1], TieRule::Inclusive).unwrap(), Decision::Disagree);
        assert!(matches!(decide(&[], TieRule::Inclusive), Err(QvoteError::Protocol(_))));
    }

    #[test]
    fn broadcast_views() {
        let recs: Vec<MachineRecord> = [1, 0, 1]
            .iter()
            .enumerate()
            .map(|(i, &bit)| MachineRecord { machine: i + 1, bit })
            .collect();
        let views = broadcast_records(&recs);
        assert_eq!(views, vec![vec![1, 0, 1]; 3]);
        let one = broadcast_records(&recs[..1]);
        assert_eq!(one, vec![vec![1]]);
    }

    #[test]
    fn machine_examples() {
        let mut rng = machine_stream(1, 0, 1);
        let all_one = realize(&classical(&[1, 1, 1]), 3).unwrap();
        let with_zero = realize(&classical(&[1, 0, 1]), 3).unwrap();
        for _ in 0..50 {
            assert_eq!(run_machine(1, &all_one, &RuleAst::veto(3), &mut rng).unwrap(), 1);
            assert_eq!(run_machine(1, &with_zero, &RuleAst::veto(3), &mut rng).unwrap(), 0);
            assert_eq!(run_machine(1, &with_zero, &RuleAst::nomination(3), &mut rng).unwrap(), 1);
        }
        assert!(run_machine(0, &all_one, &RuleAst::veto(3), &mut rng).is_err());
    }

    #[test]
    fn unanimous_veto() {
        let cfg = ElectionConfig::new(Rule::Qlv, 3, 5, classical(&[1, 1, 1]), 9);
        let out = run_election(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.bit == 1));
        assert_eq!(out.decision, Decision::Agree);
        assert_eq!(out.analytic_wp, 1.0);
    }

    #[test]
    fn charlie_vetoes() {
        let ballots = vec![
            BallotSpec::probabilistic(0.6),
            BallotSpec::probabilistic(0.6),
            BallotSpec::classical(0),
        ];
        for n in [1, 2, 7] {
            let out = run_election(&ElectionConfig::new(Rule::Qlv, 3, n, ballots.clone(), 3)).unwrap();
            assert!(out.records.iter().all(|r| r.bit == 0));
            assert_eq!(out.decision, Decision::Disagree);
        }
    }

    #[test]
    fn nomination_with_certain_agree() {
        let ballots = vec![
            BallotSpec::probabilistic(0.1),
            BallotSpec::classical(1),
            BallotSpec::probabilistic(0.3),
        ];
        let out = run_election(&ElectionConfig::new(Rule::Qln, 3, 4, ballots, 5)).unwrap();
        assert!(out.records.iter().all(|r| r.bit == 1));
        assert_eq!(out.decision, Decision::Agree);
    }

    #[test]
    fn schedules_agree() {
        let ballots = vec![BallotSpec::probabilistic(0.7); 4];
        let mut cfg = ElectionConfig::new(Rule::Qlv, 4, 33, ballots, 77);
        cfg.schedule = Schedule::Sequential;
        let seq = run_election(&cfg).unwrap();
        let seq_est = estimate_wp(&cfg, 50).unwrap();
        cfg.schedule = Schedule::Parallel;
        assert_eq!(seq, run_election(&cfg).unwrap());
        assert_eq!(seq_est, estimate_wp(&cfg, 50).unwrap());
    }

    #[test]
    fn adding_machines_keeps_existing_records() {
        let ballots = vec![BallotSpec::probabilistic(0.5); 2];
        let small = run_election(&ElectionConfig::new(Rule::Qln, 2, 5, ballots.clone(), 11)).unwrap();
        let big = run_election(&ElectionConfig::new(Rule::Qln, 2, 9, ballots, 11)).unwrap();
        assert_eq!(small.records[..], big.records[..5]);
    }

    #[test]
    fn bell_estimate() {
        let cfg = ElectionConfig::new(Rule::Qlv, 2, 10, vec![bell_ballot()], 2024);
        let est = estimate_wp(&cfg, 1000).unwrap();
        assert_eq!(est.samples, 10_000);
        assert!((est.analytic_wp - 0.5).abs() < 1e-12);
        assert!((est.empirical_mean - 0.5).abs() <= 0.02);
    }

    #[test]
    fn majority_estimate() {
        let rule = Rule::from_text("OR(AND(v1,v2), AND(v2,v3), AND(v1,v3))").unwrap();
        let ballots = vec![
            BallotSpec::probabilistic(0.6),
            BallotSpec::probabilistic(0.6),
            BallotSpec::classical(0),
        ];
        let est = estimate_wp(&ElectionConfig::new(rule, 3, 1, ballots, 8), 10_000).unwrap();
        assert!((est.analytic_wp - 0.36).abs() < 1e-12);
        assert!((est.empirical_mean - 0.36).abs() <= 0.02);
    }

    #[test]
    fn deterministic_estimate_has_zero_width() {
        let cfg = ElectionConfig::new(Rule::Qlv, 2, 3, classical(&[1, 0]), 1);
        let est = estimate_wp(&cfg, 10).unwrap();
        assert_eq!(est.ci, [0.0, 0.0]);
    }

    #[test]
    fn tie_rule_changes_even_split() {
        // A Bell pair under QLV gives 1/2; search for a seed producing an exact tie.
        let mut cfg = ElectionConfig::new(Rule::Qlv, 2, 2, vec![bell_ballot()], 0);
        let seed = (0..200)
            .find(|&s| {
                cfg.seed = s;
                run_election(&cfg).unwrap().ones_fraction == 0.5
            })
            .expect("some seed ties");
        cfg.seed = seed;
        assert_eq!(run_election(&cfg).unwrap().decision, Decision::Agree);
        cfg.tie = TieRule::Strict;
        assert_eq!(run_election(&cfg).unwrap().decision, Decision::Disagree);
    }

    #[test]
    fn config_errors() {
        let ok = classical(&[1, 1]);
        assert!(matches!(
            run_election(&ElectionConfig::new(Rule::Qlv, 2, 0, ok.clone(), 0)),
            Err(QvoteError::Config(_))
        ));
        assert!(matches!(
            run_election(&ElectionConfig::new(Rule::Qlv, 0, 1, vec![], 0)),
            Err(QvoteError::Config(_))
        ));
        let rule = Rule::from_text("AND(v1, v3)").unwrap();
        assert!(matches!(
            run_election(&ElectionConfig::new(rule, 2, 1, ok.clone(), 0)),
            Err(QvoteError::Config(_))
        ));
        assert!(matches!(Rule::from_text("AND(v1"), Err(QvoteError::Parse(_))));
        let rule = Rule::from_text("NOT(v1)").unwrap();
        assert!(matches!(
            run_election(&ElectionConfig::new(rule, 2, 1, vec![bell_ballot()], 0)),
            Err(QvoteError::Config(_))
        ));
    }
}
