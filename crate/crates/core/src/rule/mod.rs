//! Voting-rule formulas.
//!
//! ```text
//! formula := atom | "NOT" "(" formula ")" | ("AND" | "OR") "(" formula ("," formula)+ ")"
//! atom    := "v" nonzero-digit digit*
//! ```
//!
//! Every occurrence of an atom stands for a fresh, independent copy of
//! that voter's ballot. A formula that mentions a voter twice is therefore
//! not the classical boolean function of the ballots: `OR(AND(v1,v2),
//! AND(v2,v3), AND(v1,v3))` with three 50/50 voters evaluates to
//! 0.578125, not 0.5.

mod eval;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{algebraic_wp, evaluate_algebraic, evaluate_density};
pub use parse::{parse, MAX_NESTING};

/// Parse tree of a rule formula. Voter indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleAst {
    Atom(usize),
    Not(Box<RuleAst>),
    And(Vec<RuleAst>),
    Or(Vec<RuleAst>),
}

impl RuleAst {
    /// `AND(v1, ..., vm)`, or just `v1` for a single voter.
    pub fn veto(voters: usize) -> Self {
        Self::over_all(voters, RuleAst::And)
    }

    /// `OR(v1, ..., vm)`, or just `v1` for a single voter.
    pub fn nomination(voters: usize) -> Self {
        Self::over_all(voters, RuleAst::Or)
    }

    fn over_all(voters: usize, node: fn(Vec<RuleAst>) -> RuleAst) -> Self {
        if voters <= 1 {
            RuleAst::Atom(1)
        } else {
            node((1..=voters).map(RuleAst::Atom).collect())
        }
    }

    /// Largest voter index mentioned.
    pub fn max_voter(&self) -> usize {
        match self {
            RuleAst::Atom(v) => *v,
            RuleAst::Not(c) => c.max_voter(),
            RuleAst::And(cs) | RuleAst::Or(cs) => cs.iter().map(RuleAst::max_voter).max().unwrap_or(0),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RuleAst::Atom(_) => 1,
            RuleAst::Not(c) => 1 + c.depth(),
            RuleAst::And(cs) | RuleAst::Or(cs) => 1 + cs.iter().map(RuleAst::depth).max().unwrap_or(0),
        }
    }

    /// True if no `NOT` appears anywhere in the tree.
    pub fn is_monotone(&self) -> bool {
        match self {
            RuleAst::Atom(_) => true,
            RuleAst::Not(_) => false,
            RuleAst::And(cs) | RuleAst::Or(cs) => cs.iter().all(RuleAst::is_monotone),
        }
    }
}

impl fmt::Display for RuleAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, cs: &[RuleAst]| {
            write!(f, "{name}(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")
        };
        match self {
            RuleAst::Atom(v) => write!(f, "v{v}"),
            RuleAst::Not(c) => write!(f, "NOT({c})"),
            RuleAst::And(cs) => list(f, "AND", cs),
            RuleAst::Or(cs) => list(f, "OR", cs),
        }
    }
}

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}
