//! Simulation of quantum computed voting.
//!
//! Ballots are single-qubit density operators (or entangled joint states
//! shared by several voters). Quantum voting machines aggregate them with
//! the quantum logical AND (veto) or OR (nomination) channel, or with any
//! formula built from AND, OR and NOT, measure the aggregate against
//! `|1><1|`, exchange their records and decide by at-least-half majority.

pub mod ballots;
pub mod config;
pub mod density;
pub mod error;
pub mod protocol;
pub mod qlogic;
pub mod random;
pub mod rule;
pub mod stats;
pub mod streams;
pub mod verify;

pub use ballots::{bell_ballot, canonical_ballot, realize, BallotAssignment, BallotSpec};
pub use density::{DensityOperator, Projector, PureState};
pub use error::{QvoteError, Result};
pub use protocol::{
    estimate_wp, run_election, Decision, ElectionConfig, ElectionOutcome, Estimate, Rule, Schedule, TieRule,
};
pub use rule::{parse, RuleAst};
