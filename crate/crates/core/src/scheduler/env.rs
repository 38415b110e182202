use crate::channel::PairTable;
use crate::error::Result;

use super::schedule::ScheduleMatrix;

/// Which per-pair quantity drives the reward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RewardMode {
    /// Semantic similarity `ξ`.
    #[default]
    Similarity,
    /// SINR `γ`.
    Sinr,
}

/// Per-pair quality of one slot; entries of unscheduled pairs are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotOutcome {
    pub similarity: PairTable<f64>,
    pub sinr: PairTable<f64>,
}

impl SlotOutcome {
    pub fn values(&self, mode: RewardMode) -> &PairTable<f64> {
        match mode {
            RewardMode::Similarity => &self.similarity,
            RewardMode::Sinr => &self.sinr,
        }
    }
}

/// Environment side of the scheduling MDP: scores one slot's schedule.
pub trait SlotEvaluator {
    fn users(&self) -> usize;

    fn evaluate(&mut self, schedule: &ScheduleMatrix) -> Result<SlotOutcome>;
}
