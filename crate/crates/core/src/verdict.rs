use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of a sampled check. `HeuristicPass` marks evidence that is not
/// backed by an exact argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    HeuristicPass,
}

impl Verdict {
    pub fn passed(self) -> bool {
        !matches!(self, Verdict::Fail)
    }

    pub fn from_margin(margin: f64, tol: f64) -> Self {
        if margin >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::HeuristicPass => "heuristic-pass",
        })
    }
}
