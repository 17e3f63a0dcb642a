//! Span-progress check for zero-respecting runs on the chain instance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SupportVerdict {
    Pass,
    /// First query whose support leaves E_r; `round` and `coordinate` are
    /// 1-based, `machine` 0-based.
    Violation { round: usize, machine: usize, coordinate: usize },
}

/// Per-round, per-machine query supports with the communicated union of each
/// round.
#[derive(Debug, Clone, Default)]
pub struct SupportTracker {
    pub rounds: Vec<Vec<Vec<usize>>>,
}

impl SupportTracker {
    pub fn from_run(run: &RunResult) -> Result<Self> {
        let rounds = run
            .support_history
            .clone()
            .ok_or_else(|| Error::contract("run has no support history; enable record_support"))?;
        Ok(SupportTracker { rounds })
    }

    /// Union over machines of the coordinates touched in round `r` (0-based).
    pub fn union(&self, r: usize) -> Vec<usize> {
        let mut u: Vec<usize> = self.rounds[r].iter().flatten().copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    }

    /// Every query made during round r must lie in the first r coordinates.
    pub fn verdict(&self) -> SupportVerdict {
        for (r, machines) in self.rounds.iter().enumerate() {
            for (m, supp) in machines.iter().enumerate() {
                if let Some(&j) = supp.iter().find(|&&j| j > r) {
                    return SupportVerdict::Violation {
                        round: r + 1,
                        machine: m,
                        coordinate: j + 1,
                    };
                }
            }
        }
        SupportVerdict::Pass
    }
}

pub fn check_support_progress(run: &RunResult) -> Result<SupportVerdict> {
    Ok(SupportTracker::from_run(run)?.verdict())
}
