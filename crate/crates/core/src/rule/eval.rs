use std::collections::HashMap;

use super::RuleAst;
use crate::ballots::BallotAssignment;
use crate::density::DensityOperator;
use crate::error::{QvoteError, Result};
use crate::qlogic::{quantum_not, Connective, FoldWorkspace};

fn check_arity(ast: &RuleAst) -> Result<()> {
    match ast {
        RuleAst::Atom(0) => Err(QvoteError::Evaluation("voter indices start at v1".into())),
        RuleAst::Atom(_) => Ok(()),
        RuleAst::Not(c) => check_arity(c),
        RuleAst::And(cs) | RuleAst::Or(cs) => {
            if cs.len() < 2 {
                return Err(QvoteError::Arity(format!("{ast} needs at least two operands")));
            }
            cs.iter().try_for_each(check_arity)
        }
    }
}

fn count_atoms(ast: &RuleAst, counts: &mut HashMap<usize, usize>) {
    match ast {
        RuleAst::Atom(v) => *counts.entry(*v).or_default() += 1,
        RuleAst::Not(c) => count_atoms(c, counts),
        RuleAst::And(cs) | RuleAst::Or(cs) => cs.iter().for_each(|c| count_atoms(c, counts)),
    }
}

/// True if some AND/OR node has every voter of `group` among its direct
/// atom children.
fn has_sibling_node(ast: &RuleAst, group: &[usize]) -> bool {
    match ast {
        RuleAst::Atom(_) => false,
        RuleAst::Not(c) => has_sibling_node(c, group),
        RuleAst::And(cs) | RuleAst::Or(cs) => {
            let direct = |v: &usize| cs.iter().any(|c| *c == RuleAst::Atom(*v));
            group.iter().all(direct) || cs.iter().any(|c| has_sibling_node(c, group))
        }
    }
}

fn validate(ast: &RuleAst, ballots: &BallotAssignment) -> Result<()> {
    check_arity(ast)?;
    let m = ballots.voter_count();
    if ast.max_voter() > m {
        return Err(QvoteError::Evaluation(format!(
            "formula mentions v{} but the election has {m} voters",
            ast.max_voter()
        )));
    }
    let mut counts = HashMap::new();
    count_atoms(ast, &mut counts);
    for group in ballots.groups().iter().filter(|g| g.is_joint()) {
        let voters = group.voters();
        let each_once = voters.iter().all(|v| counts.get(v) == Some(&1));
        if !each_once || !has_sibling_node(ast, voters) {
            let names: Vec<String> = voters.iter().map(|v| format!("v{v}")).collect();
            return Err(QvoteError::Evaluation(format!(
                "joint ballot over {{{}}} must appear exactly once, as sibling operands of one AND or OR",
                names.join(", ")
            )));
        }
    }
    Ok(())
}

/// Single-qubit aggregate of the formula over the realized ballots.
///
/// Each atom occurrence consumes a fresh copy of its voter's state. Joint
/// ballots enter a fold as one block; their qubits are folded in when the
/// corresponding sibling atoms are reached.
pub fn evaluate_density(ast: &RuleAst, ballots: &BallotAssignment) -> Result<DensityOperator> {
    validate(ast, ballots)?;
    let mut fresh = ballots.voter_count() + 1;
    eval_node(ast, ballots, &mut fresh)
}

fn eval_node(ast: &RuleAst, ballots: &BallotAssignment, fresh: &mut usize) -> Result<DensityOperator> {
    match ast {
        RuleAst::Atom(v) => Ok(ballots.group_of(*v)?.state().clone()),
        RuleAst::Not(c) => quantum_not(&eval_node(c, ballots, fresh)?),
        RuleAst::And(cs) => fold(Connective::And, cs, ballots, fresh),
        RuleAst::Or(cs) => fold(Connective::Or, cs, ballots, fresh),
    }
}

fn fold(conn: Connective, children: &[RuleAst], ballots: &BallotAssignment, fresh: &mut usize) -> Result<DensityOperator> {
    let mut ws = FoldWorkspace::new(conn);
    for child in children {
        if let RuleAst::Atom(v) = child {
            let group = ballots.group_of(*v)?;
            if group.is_joint() {
                if !ws.is_pending(*v) {
                    ws.absorb(group.state(), group.voters())?;
                }
                ws.combine(*v)?;
                continue;
            }
        }
        let operand = eval_node(child, ballots, fresh)?;
        let key = *fresh;
        *fresh += 1;
        ws.absorb(&operand, &[key])?;
        ws.combine(key)?;
    }
    ws.finish()
}

/// Winning probability by the closed forms: AND multiplies, OR is
/// `x + y - xy`, NOT is `1 - x`, folded left like the channels.
pub fn evaluate_algebraic(ast: &RuleAst, probs: &[f64]) -> Result<f64> {
    check_arity(ast)?;
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(QvoteError::Domain(format!("probability {p} is outside [0, 1]")));
    }
    if ast.max_voter() > probs.len() {
        return Err(QvoteError::Evaluation(format!(
            "formula mentions v{} but only {} probabilities were given",
            ast.max_voter(),
            probs.len()
        )));
    }
    Ok(algebra(ast, probs))
}

fn algebra(ast: &RuleAst, probs: &[f64]) -> f64 {
    match ast {
        RuleAst::Atom(v) => probs[v - 1],
        RuleAst::Not(c) => 1.0 - algebra(c, probs),
        RuleAst::And(cs) => cs.iter().map(|c| algebra(c, probs)).fold(1.0, |acc, x| acc * x),
        RuleAst::Or(cs) => cs
            .iter()
            .map(|c| algebra(c, probs))
            .reduce(|acc, x| acc + x - acc * x)
            .unwrap_or(0.0),
    }
}

/// [`evaluate_algebraic`] over realized product ballots.
pub fn algebraic_wp(ast: &RuleAst, ballots: &BallotAssignment) -> Result<f64> {
    let probs = ballots.winning_probabilities()?;
    evaluate_algebraic(ast, &probs)
}
