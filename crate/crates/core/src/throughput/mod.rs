//! Semantic-throughput accounting, the max-min objective, the SINR→similarity
//! surrogate and the comparison schemes.

mod accounting;
mod baseline;
mod surrogate;

pub use accounting::{maxmin_objective, semantic_throughput, LdpcReference, ThroughputConfig};
pub use baseline::{
    concurrent_schedules, run_baseline, training_groups, BaselineInput, CodecBank, PairThroughput, Scheme,
    ThroughputReport,
};
pub use surrogate::{equal_split_frames, SimilaritySurrogate, SurrogateEvaluator};
