//! Self-check suite: every closed-form property of the voting channels and
//! protocols, recomputed by exact simulation and by sampling.
//!
//! Each check reports PASS or FAIL against a fixed tolerance. One check,
//! `product_pair_same_as_bell`, reports DISCREPANCY: the claim that the
//! product ballots `((1+i)/2, (1-i)/2)` and `((1-i)/2, (1+i)/2)` behave like
//! the Bell ballot (1/2 under both AND and OR) does not hold. The full
//! channel gives 1/4 and 3/4, which is what the multiplicativity and
//! inclusion-exclusion identities predict.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ballots::{bell_ballot, canonical_ballot, realize, BallotAssignment, BallotSpec};
use crate::density::{
    apply_unitary, partial_trace, projector_probability, pure_to_density, tensor, trace_product,
    winning_probability, DensityOperator, Matrix, Projector, PureState,
};
use crate::error::{QvoteError, Result};
use crate::protocol::{estimate_wp, run_election, Decision, ElectionConfig, Rule};
use crate::qlogic::{and_channel_matrix, and_fold, or_fold, quantum_and, quantum_not, quantum_or, ToffoliGate};
use crate::random::{random_ast, random_density};
use crate::rule::{evaluate_algebraic, evaluate_density, parse, RuleAst};
use crate::stats::sigma_bound;
use crate::streams::aux_stream;

pub const DEFAULT_SEED: u64 = 0x5EED_2022;

const EXACT_TOL: f64 = 1e-9;
const EXAMPLE_TOL: f64 = 1e-12;
pub const MAJORITY: &str = "OR(AND(v1,v2), AND(v2,v3), AND(v1,v3))";
pub const ROLE_WEIGHTED: &str = "OR(v1, AND(v2, v3))";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Discrepancy,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Discrepancy => "DISCREPANCY",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckGroup {
    Lemmas,
    Theorems,
    Examples,
    Observations,
    Formulas,
    Protocol,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 6] = [
        CheckGroup::Lemmas,
        CheckGroup::Theorems,
        CheckGroup::Examples,
        CheckGroup::Observations,
        CheckGroup::Formulas,
        CheckGroup::Protocol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Lemmas => "lemmas",
            CheckGroup::Theorems => "theorems",
            CheckGroup::Examples => "examples",
            CheckGroup::Observations => "observations",
            CheckGroup::Formulas => "formulas",
            CheckGroup::Protocol => "protocol",
        }
    }
}

impl FromStr for CheckGroup {
    type Err = QvoteError;

    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckGroup::ALL.iter().map(|g| g.name()).collect();
                QvoteError::Config(format!("unknown check group {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub group: CheckGroup,
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub discrepancies: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    /// True when nothing failed. Discrepancies do not count as failures.
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Outcome of a check body before it is labelled.
struct Verdict {
    status: CheckStatus,
    detail: String,
}

fn within(max_err: f64, tol: f64, what: impl fmt::Display) -> Verdict {
    let status = if max_err <= tol { CheckStatus::Pass } else { CheckStatus::Fail };
    Verdict { status, detail: format!("{what}: max error {max_err:.3e} (tolerance {tol:.0e})") }
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: detail.into(),
    }
}

type CheckFn = fn(u64) -> Result<Verdict>;

const CHECKS: &[(CheckGroup, &str, CheckFn)] = &[
    (CheckGroup::Lemmas, "toffoli_basis_cases", toffoli_basis_cases),
    (CheckGroup::Lemmas, "off_diagonal_annihilation", off_diagonal_annihilation),
    (CheckGroup::Lemmas, "and_multiplicativity", and_multiplicativity),
    (CheckGroup::Lemmas, "not_complement", not_complement),
    (CheckGroup::Lemmas, "or_inclusion_exclusion", or_inclusion_exclusion),
    (CheckGroup::Lemmas, "projector_completeness", projector_completeness),
    (CheckGroup::Theorems, "veto_theorem", veto_theorem),
    (CheckGroup::Theorems, "nomination_theorem", nomination_theorem),
    (CheckGroup::Theorems, "fold_associativity", fold_associativity),
    (CheckGroup::Examples, "two_voter_product", two_voter_product),
    (CheckGroup::Examples, "role_weighted_vote", role_weighted_vote),
    (CheckGroup::Examples, "majority_vote", majority_vote),
    (CheckGroup::Examples, "majority_independent_copies", majority_independent_copies),
    (CheckGroup::Examples, "canonical_embedding", canonical_embedding),
    (CheckGroup::Examples, "pure_vs_mixed_encoding", pure_vs_mixed_encoding),
    (CheckGroup::Observations, "bell_ballot_half", bell_ballot_half),
    (CheckGroup::Observations, "no_probabilistic_half", no_probabilistic_half),
    (CheckGroup::Observations, "product_pair_same_as_bell", product_pair_same_as_bell),
    (CheckGroup::Formulas, "oracle_equivalence", oracle_equivalence),
    (CheckGroup::Formulas, "parse_round_trip", parse_round_trip),
    (CheckGroup::Protocol, "monte_carlo_soundness", monte_carlo_soundness),
    (CheckGroup::Protocol, "veto_end_to_end", veto_end_to_end),
    (CheckGroup::Protocol, "nomination_end_to_end", nomination_end_to_end),
    (CheckGroup::Protocol, "record_view_agreement", record_view_agreement),
    (CheckGroup::Protocol, "determinism", determinism),
];

/// Names of every check in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(_, name, _)| *name).collect()
}

/// Runs every check (or only one group) with populations drawn from `seed`.
pub fn run_verification(filter: Option<CheckGroup>, seed: u64) -> VerifyReport {
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .filter(|(group, _, _)| filter.is_none_or(|f| f == *group))
        .map(|(group, name, check)| {
            let v = check(seed).unwrap_or_else(|e| Verdict {
                status: CheckStatus::Fail,
                detail: format!("error: {e}"),
            });
            CheckResult { group: *group, name: (*name).to_string(), status: v.status, detail: v.detail }
        })
        .collect();
    let count = |s: CheckStatus| checks.iter().filter(|c| c.status == s).count();
    VerifyReport {
        seed,
        passed: count(CheckStatus::Pass),
        failed: count(CheckStatus::Fail),
        discrepancies: count(CheckStatus::Discrepancy),
        checks,
    }
}

fn wp(rho: &DensityOperator) -> Result<f64> {
    winning_probability(rho)
}

fn random_pairs(seed: u64, label: u64, count: usize) -> Result<Vec<(DensityOperator, DensityOperator)>> {
    let mut rng = aux_stream(seed, label);
    (0..count)
        .map(|_| Ok((random_density(1, &mut rng)?, random_density(1, &mut rng)?)))
        .collect()
}

fn basis(bit: usize) -> DensityOperator {
    DensityOperator::basis(1, bit).expect("single-qubit basis state")
}

/// Random single-qubit ballot with WP inside `range`.
fn ballot_in(rng: &mut ChaCha8Rng, range: std::ops::RangeInclusive<f64>) -> Result<DensityOperator> {
    loop {
        let rho = random_density(1, rng)?;
        if range.contains(&wp(&rho)?) {
            return Ok(rho);
        }
    }
}

fn toffoli_basis_cases(_seed: u64) -> Result<Verdict> {
    let t = ToffoliGate::new();
    let mut worst = 0.0f64;
    for a in 0..2usize {
        for b in 0..2usize {
            let input = DensityOperator::basis(3, a << 2 | b << 1)?;
            let out = apply_unitary(&input, t.entries())?;
            let third = partial_trace(&out, &[0, 1])?;
            let value = projector_probability(&third, &Projector::one())?;
            worst = worst.max((value - (a * b) as f64).abs());
        }
    }
    Ok(within(worst, EXACT_TOL, "Tr(P1 on qubit 3 of T(|ab0><ab0|)T†) = a·b over 4 basis inputs"))
}

fn off_diagonal_annihilation(seed: u64) -> Result<Verdict> {
    let mut rng = aux_stream(seed, 2);
    let p1 = Projector::one();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let sigma = random_density(1, &mut rng)?;
        for (a, b) in [(0, 1), (1, 0)] {
            let mut ket_bra = Matrix::zeros(2, 2);
            ket_bra[(a, b)] = Complex64::new(1.0, 0.0);
            let out = and_channel_matrix(&ket_bra.kronecker(sigma.entries()), 2, 0, 1)?;
            worst = worst.max(trace_product(p1.entries(), &out).norm());
        }
    }
    Ok(within(worst, EXACT_TOL, "Tr(P1 AND(|a><b| ⊗ σ)) = 0 for a ≠ b, 50 random σ"))
}

fn and_multiplicativity(seed: u64) -> Result<Verdict> {
    let mut worst = 0.0f64;
    for (rho, sigma) in random_pairs(seed, 3, 200)? {
        let got = wp(&quantum_and(&tensor(&rho, &sigma)?)?)?;
        worst = worst.max((got - wp(&rho)? * wp(&sigma)?).abs());
    }
    Ok(within(worst, EXACT_TOL, "WP(AND(ρ⊗σ)) = WP(ρ)·WP(σ), 200 random pairs"))
}

fn not_complement(seed: u64) -> Result<Verdict> {
    let mut worst = 0.0f64;
    for (rho, _) in random_pairs(seed, 3, 200)? {
        worst = worst.max((wp(&quantum_not(&rho)?)? - (1.0 - wp(&rho)?)).abs());
    }
    Ok(within(worst, EXACT_TOL, "WP(NOT ρ) = 1 − WP(ρ), 200 random states"))
}

fn or_inclusion_exclusion(seed: u64) -> Result<Verdict> {
    let mut worst = 0.0f64;
    for (rho, sigma) in random_pairs(seed, 3, 200)? {
        let (x, y) = (wp(&rho)?, wp(&sigma)?);
        let got = wp(&quantum_or(&tensor(&rho, &sigma)?)?)?;
        worst = worst.max((got - (x + y - x * y)).abs());
    }
    Ok(within(worst, EXACT_TOL, "WP(OR(ρ⊗σ)) = x + y − xy, 200 random pairs"))
}

fn projector_completeness(seed: u64) -> Result<Verdict> {
    let mut worst = 0.0f64;
    for (rho, _) in random_pairs(seed, 3, 200)? {
        let total = projector_probability(&rho, &Projector::zero())? + projector_probability(&rho, &Projector::one())?;
        worst = worst.max((total - 1.0).abs());
    }
    Ok(within(worst, EXACT_TOL, "Tr(P0 ρ) + Tr(P1 ρ) = 1, 200 random states"))
}

/// Random ballot lists, half with one planted `extreme` ballot; returns
/// (list, planted) pairs. Unplanted ballots keep WP in `safe`.
fn planted_lists(
    seed: u64,
    label: u64,
    extreme: usize,
    safe: std::ops::RangeInclusive<f64>,
) -> Result<Vec<(Vec<DensityOperator>, bool)>> {
    let mut rng = aux_stream(seed, label);
    (0..100)
        .map(|i| {
            let len = rng.random_range(2..=6);
            let mut list = (0..len).map(|_| ballot_in(&mut rng, safe.clone())).collect::<Result<Vec<_>>>()?;
            let planted = i % 2 == 0;
            if planted {
                let at = rng.random_range(0..len);
                list[at] = basis(extreme);
            }
            Ok((list, planted))
        })
        .collect()
}

fn veto_theorem(seed: u64) -> Result<Verdict> {
    let mut wrong = 0;
    for (list, planted) in planted_lists(seed, 4, 0, 0.05..=1.0)? {
        let is_zero = wp(&and_fold(&list)?)?.abs() <= EXACT_TOL;
        wrong += usize::from(is_zero != planted);
    }
    Ok(verdict(wrong == 0, format!("WP(AND-fold) = 0 iff a |0><0| ballot is present: {wrong}/100 mismatches")))
}

fn nomination_theorem(seed: u64) -> Result<Verdict> {
    let mut wrong = 0;
    for (list, planted) in planted_lists(seed, 5, 1, 0.0..=0.95)? {
        let is_one = (wp(&or_fold(&list)?)? - 1.0).abs() <= EXACT_TOL;
        wrong += usize::from(is_one != planted);
    }
    Ok(verdict(wrong == 0, format!("WP(OR-fold) = 1 iff a |1><1| ballot is present: {wrong}/100 mismatches")))
}

fn right_fold_and(list: &[DensityOperator]) -> Result<DensityOperator> {
    let (last, rest) = list.split_last().expect("non-empty");
    rest.iter().rev().try_fold(last.clone(), |acc, rho| quantum_and(&tensor(rho, &acc)?))
}

fn fold_associativity(seed: u64) -> Result<Verdict> {
    let mut rng = aux_stream(seed, 6);
    let mut worst_wp = 0.0f64;
    let mut worst_state = 0.0f64;
    for _ in 0..100 {
        let len = rng.random_range(3..=6);
        let list = (0..len).map(|_| random_density(1, &mut rng)).collect::<Result<Vec<_>>>()?;
        let left = and_fold(&list)?;
        let right = right_fold_and(&list)?;
        worst_wp = worst_wp.max((wp(&left)? - wp(&right)?).abs());
        worst_state = worst_state.max(left.max_abs_diff(&right));
    }
    let mut v = within(worst_wp, EXACT_TOL, "left and right AND folds agree in WP, 100 lists");
    v.detail.push_str(&format!("; largest entrywise state difference {worst_state:.3e}"));
    Ok(v)
}

fn two_voter_product(_seed: u64) -> Result<Verdict> {
    let got = wp(&and_fold(&[canonical_ballot(0.6)?, canonical_ballot(0.6)?])?)?;
    Ok(within((got - 0.36).abs(), EXAMPLE_TOL, format!("AND(Θ0.6, Θ0.6) has WP {got}")))
}

fn product_ballots(probs: &[f64]) -> Result<BallotAssignment> {
    BallotAssignment::from_product(probs.iter().map(|&r| canonical_ballot(r)).collect::<Result<Vec<_>>>()?)
}

fn role_weighted_vote(seed: u64) -> Result<Verdict> {
    let ast = parse(ROLE_WEIGHTED)?;
    let mut rng = aux_stream(seed, 7);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (p2, p3): (f64, f64) = (rng.random(), rng.random());
        let agree = wp(&evaluate_density(&ast, &product_ballots(&[1.0, p2, p3])?)?)?;
        worst = worst.max((agree - 1.0).abs());
        let fallback = wp(&evaluate_density(&ast, &product_ballots(&[0.0, p2, p3])?)?)?;
        worst = worst.max((fallback - p2 * p3).abs());
    }
    Ok(within(
        worst,
        EXACT_TOL,
        "professor agrees ⇒ WP 1; professor disagrees ⇒ WP = product of associates, 50 draws",
    ))
}

fn majority_vote(_seed: u64) -> Result<Verdict> {
    let ast = parse(MAJORITY)?;
    let density = wp(&evaluate_density(&ast, &product_ballots(&[0.6, 0.6, 0.0])?)?)?;
    let algebraic = evaluate_algebraic(&ast, &[0.6, 0.6, 0.0])?;
    let err = (density - 0.36).abs().max((algebraic - 0.36).abs());
    Ok(within(err, EXAMPLE_TOL, format!("majority with (0.6, 0.6, 0): density {density}, algebraic {algebraic}")))
}

fn majority_independent_copies(_seed: u64) -> Result<Verdict> {
    let ast = parse(MAJORITY)?;
    let density = wp(&evaluate_density(&ast, &product_ballots(&[0.5, 0.5, 0.5])?)?)?;
    Ok(within(
        (density - 0.578125).abs(),
        EXAMPLE_TOL,
        format!("majority with (0.5, 0.5, 0.5) is {density} (classical majority would be 0.5)"),
    ))
}

fn canonical_embedding(_seed: u64) -> Result<Verdict> {
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let r = f64::from(i) / 100.0;
        worst = worst.max((wp(&canonical_ballot(r)?)? - r).abs());
    }
    Ok(within(worst, EXAMPLE_TOL, "WP(Θr) = r on r = 0, 0.01, ..., 1"))
}

fn pure_vs_mixed_encoding(seed: u64) -> Result<Verdict> {
    let mut rng = aux_stream(seed, 8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..=4);
        let probs: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        let ast = random_ast(m, 4, &mut rng);
        let pure = realize(&probs.iter().map(|&r| BallotSpec::probabilistic(r)).collect::<Vec<_>>(), m)?;
        let mixed = realize(&probs.iter().map(|&r| BallotSpec::classical_mixture(r)).collect::<Vec<_>>(), m)?;
        let a = wp(&evaluate_density(&ast, &pure)?)?;
        let b = wp(&evaluate_density(&ast, &mixed)?)?;
        worst = worst.max((a - b).abs());
    }
    Ok(within(worst, EXACT_TOL, "superposition and mixture encodings give equal WP, 100 formulas"))
}

fn bell_ballot_half(_seed: u64) -> Result<Verdict> {
    let rho = bell_ballot().to_density()?;
    let and = wp(&quantum_and(&rho)?)?;
    let or = wp(&quantum_or(&rho)?)?;
    let err = (and - 0.5).abs().max((or - 0.5).abs());
    Ok(within(err, EXAMPLE_TOL, format!("Bell ballot: AND {and}, OR {or}")))
}

/// Smallest `|xy - 1/2| + |x + y - xy - 1/2|` on the 1e-3 grid of the unit square.
pub fn probabilistic_half_residual() -> f64 {
    let grid: Vec<f64> = (0..=1000).map(|i| f64::from(i) / 1000.0).collect();
    let mut best = f64::INFINITY;
    for &x in &grid {
        for &y in &grid {
            let veto = x * y;
            let nomination = x + y - veto;
            best = best.min((veto - 0.5).abs() + (nomination - 0.5).abs());
        }
    }
    best
}

/// Discriminant of `x^2 - x + 1/2`.
pub fn half_quadratic_discriminant() -> f64 {
    let (a, b, c) = (1.0, -1.0, 0.5);
    b * b - 4.0 * a * c
}

fn no_probabilistic_half(_seed: u64) -> Result<Verdict> {
    let residual = probabilistic_half_residual();
    let disc = half_quadratic_discriminant();
    Ok(verdict(
        residual > 0.01 && disc == -1.0,
        format!("min grid residual {residual:.6} (must exceed 0.01); discriminant {disc}"),
    ))
}

/// WP under AND and OR of `((1+i)/2, (1-i)/2) ⊗ ((1-i)/2, (1+i)/2)`, by the
/// full Toffoli channel.
pub fn product_pair_wps() -> Result<(f64, f64)> {
    let h = |re: f64, im: f64| Complex64::new(re / 2.0, im / 2.0);
    let rho1 = pure_to_density(&PureState::new(vec![h(1.0, 1.0), h(1.0, -1.0)])?);
    let rho2 = pure_to_density(&PureState::new(vec![h(1.0, -1.0), h(1.0, 1.0)])?);
    let joint = tensor(&rho1, &rho2)?;
    Ok((wp(&quantum_and(&joint)?)?, wp(&quantum_or(&joint)?)?))
}

fn product_pair_same_as_bell(_seed: u64) -> Result<Verdict> {
    let (and, or) = product_pair_wps()?;
    // Both ballots have WP 1/2, so the lemmas predict 1/4 and 3/4.
    let lemma_err = (and - 0.25).abs().max((or - 0.75).abs());
    let claim_err = (and - 0.5).abs().max((or - 0.5).abs());
    let detail = format!(
        "channel gives AND {and}, OR {or}; lemma prediction 0.25 / 0.75; claimed 0.5 / 0.5"
    );
    let status = if lemma_err > EXAMPLE_TOL {
        CheckStatus::Fail
    } else if claim_err > EXAMPLE_TOL {
        CheckStatus::Discrepancy
    } else {
        CheckStatus::Pass
    };
    Ok(Verdict { status, detail })
}

fn oracle_equivalence(seed: u64) -> Result<Verdict> {
    let mut rng = aux_stream(seed, 9);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let m = rng.random_range(1..=5);
        let ast = random_ast(m, 4, &mut rng);
        let ballots = (0..m).map(|_| random_density(1, &mut rng)).collect::<Result<Vec<_>>>()?;
        let probs = ballots.iter().map(wp).collect::<Result<Vec<_>>>()?;
        let assignment = BallotAssignment::from_product(ballots)?;
        let density = wp(&evaluate_density(&ast, &assignment)?)?;
        worst = worst.max((density - evaluate_algebraic(&ast, &probs)?).abs());
    }
    Ok(within(worst, EXACT_TOL, "density and algebraic evaluators agree, 500 random formulas"))
}

fn parse_round_trip(seed: u64) -> Result<Verdict> {
    let mut rng = aux_stream(seed, 10);
    let mut broken = 0;
    for _ in 0..500 {
        let ast: RuleAst = random_ast(9, 5, &mut rng);
        if parse(&ast.to_string()).ok().as_ref() != Some(&ast) {
            broken += 1;
        }
    }
    Ok(verdict(broken == 0, format!("pretty-print then parse is the identity: {broken}/500 mismatches")))
}

fn monte_carlo_soundness(seed: u64) -> Result<Verdict> {
    let ballots = vec![
        BallotSpec::probabilistic(0.6),
        BallotSpec::probabilistic(0.6),
        BallotSpec::probabilistic(0.5),
    ];
    let cfg = ElectionConfig::new(Rule::Qlv, 3, 10, ballots, seed);
    let est = estimate_wp(&cfg, 1000)?;
    let bound = sigma_bound(0.18, est.samples, 4.0);
    let err = (est.empirical_mean - 0.18).abs();
    Ok(verdict(
        (est.analytic_wp - 0.18).abs() <= EXACT_TOL && err <= bound,
        format!(
            "QLV (0.6, 0.6, 0.5): analytic {:.12}, empirical {:.4} over {} samples, |error| {err:.4} ≤ {bound:.4}",
            est.analytic_wp, est.empirical_mean, est.samples
        ),
    ))
}

fn end_to_end(seed: u64, label: u64, rule: Rule, forced_bit: u8, expect: Decision) -> Result<usize> {
    let mut rng = aux_stream(seed, label);
    let mut hits = 0;
    for run in 0..100u64 {
        let m = rng.random_range(1..=6);
        let mut ballots: Vec<BallotSpec> = (0..m).map(|_| BallotSpec::probabilistic(rng.random())).collect();
        ballots[rng.random_range(0..m)] = BallotSpec::classical(forced_bit);
        let n = rng.random_range(1..=9);
        let out = run_election(&ElectionConfig::new(rule.clone(), m, n, ballots, seed ^ run))?;
        hits += usize::from(out.decision == expect);
    }
    Ok(hits)
}

fn veto_end_to_end(seed: u64) -> Result<Verdict> {
    let hits = end_to_end(seed, 11, Rule::Qlv, 0, Decision::Disagree)?;
    Ok(verdict(hits == 100, format!("QLV with a classical 0 ballot decided Disagree in {hits}/100 runs")))
}

fn nomination_end_to_end(seed: u64) -> Result<Verdict> {
    let hits = end_to_end(seed, 12, Rule::Qln, 1, Decision::Agree)?;
    Ok(verdict(hits == 100, format!("QLN with a classical 1 ballot decided Agree in {hits}/100 runs")))
}

fn record_view_agreement(seed: u64) -> Result<Verdict> {
    let mut rng = aux_stream(seed, 13);
    let mut split = 0;
    for run in 0..100u64 {
        let m = rng.random_range(1..=4);
        let ballots: Vec<BallotSpec> = (0..m).map(|_| BallotSpec::probabilistic(rng.random())).collect();
        let rule = if run % 2 == 0 { Rule::Qlv } else { Rule::Qln };
        let n = rng.random_range(1..=8);
        let out = run_election(&ElectionConfig::new(rule, m, n, ballots, seed ^ run))?;
        split += usize::from(out.machine_decisions.iter().any(|d| *d != out.decision));
    }
    Ok(verdict(split == 0, format!("every machine reached the common decision; {split}/100 runs split")))
}

fn determinism(seed: u64) -> Result<Verdict> {
    let cfg = ElectionConfig::new(
        Rule::Formula(parse(MAJORITY)?),
        3,
        16,
        vec![BallotSpec::probabilistic(0.6), BallotSpec::probabilistic(0.6), BallotSpec::probabilistic(0.3)],
        seed,
    );
    let a = serde_json::to_string(&run_election(&cfg)?).expect("outcome serializes");
    let b = serde_json::to_string(&run_election(&cfg)?).expect("outcome serializes");
    Ok(verdict(a == b, "same configuration and seed give byte-identical outcomes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_has_only_the_known_discrepancy() {
        let report = run_verification(None, DEFAULT_SEED);
        for c in &report.checks {
            assert_ne!(c.status, CheckStatus::Fail, "{}: {}", c.name, c.detail);
        }
        assert_eq!(report.checks.len(), CHECKS.len());
        assert_eq!(report.discrepancies, 1);
        assert_eq!(report.get("product_pair_same_as_bell").unwrap().status, CheckStatus::Discrepancy);
        assert!(report.ok());
    }

    #[test]
    fn filter_selects_group() {
        let report = run_verification(Some(CheckGroup::Lemmas), 1);
        assert_eq!(report.checks.len(), 6);
        assert!(report.checks.iter().all(|c| c.group == CheckGroup::Lemmas));
        assert!("lemmas".parse::<CheckGroup>().is_ok());
        assert!("lemma".parse::<CheckGroup>().is_err());
    }

    #[test]
    fn observation_two_values() {
        // Independent brute force (numpy over the same grid) gave 0.414302.
        assert!((probabilistic_half_residual() - 0.414302).abs() < 1e-9);
        assert_eq!(half_quadratic_discriminant(), -1.0);
    }
}
