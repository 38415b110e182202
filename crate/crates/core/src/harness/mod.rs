//! Experiment orchestration: config files, seeded workloads, the nested
//! scheduling/training loop, the IRS-size sweep, scheme comparison and CSV output.

mod config;
mod csv;
mod run;
mod schemes;
mod sweep;

pub use config::{
    load_scenario, CodecSection, Config, DdpgSection, EvaluatorSetting, RewardSetting, ScenarioSection, SweepSection,
};
pub use self::csv::{baseline_rows, emit_csv, episode_rows, fmt_float, BaselineRow, CsvRecord, EpisodeRow, LossRow};
pub use run::{
    calibration_samples, for_seeds, init_codec, pretrain, quantized_composite, refine, run_xddrl, CodecEvaluator, RunRecord, Workload,
};
pub use schemes::{compare_schemes, train_scheme};
pub use sweep::{grid, sweep_irs_size, SweepRow};
