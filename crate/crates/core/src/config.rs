//! JSON election configuration files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "rule": "qlv",
//!   "voters": 3,
//!   "machines": 5,
//!   "ballots": [
//!     {"kind": "probabilistic", "r": 0.6},
//!     {"kind": "probabilistic", "r": 0.6},
//!     {"kind": "classical", "bit": 0}
//!   ],
//!   "seed": 42,
//!   "trials": 1
//! }
//! ```
//!
//! `rule` is `"qlv"`, `"qln"` or a formula such as `"OR(v1, AND(v2, v3))"`.

use serde::{Deserialize, Serialize};

use crate::ballots::BallotSpec;
use crate::error::{QvoteError, Result};
use crate::protocol::{ElectionConfig, Rule, Schedule, TieRule};

pub const CONFIG_VERSION: u32 = 1;

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    pub rule: String,
    pub voters: usize,
    pub machines: usize,
    pub ballots: Vec<BallotSpec>,
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: u64,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| QvoteError::Config(format!("invalid config JSON: {e}")))?;
        if file.version != CONFIG_VERSION {
            return Err(QvoteError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_election(&self) -> Result<ElectionConfig> {
        if self.trials == 0 {
            return Err(QvoteError::Config("trials must be at least 1".into()));
        }
        let rule = Rule::from_text(&self.rule)?;
        Ok(ElectionConfig {
            rule,
            voters: self.voters,
            machines: self.machines,
            ballots: self.ballots.clone(),
            seed: self.seed,
            trials: self.trials,
            tie: TieRule::default(),
            schedule: Schedule::default(),
        })
    }
}
