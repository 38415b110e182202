//! Max-min user scheduling: schedule matrices, the MDP, DDPG and an
//! exhaustive oracle for small instances.

mod agent;
mod ddpg;
mod env;
mod mdp;
mod oracle;
mod project;
mod replay;
mod schedule;

pub use agent::{train_scheduler, EpisodeConfig, SchedulerRun};
pub use ddpg::{DdpgConfig, DdpgNets};
pub use env::{RewardMode, SlotEvaluator, SlotOutcome};
pub use mdp::{accumulated, maxmin_objective, reward, state_update, DemandSet, SchedulerState, SlotRecord};
pub use oracle::{exhaustive_oracle, OracleResult, ORACLE_LIMIT};
pub use project::project_to_schedule;
pub use replay::{ReplayBuffer, ReplayTransition};
pub use schedule::{LinkSet, ScheduleMatrix};
