//! Physical layer: UPA steering, Rician IRS links, direct links, the
//! IRS-composited channel, and per-link SINR.

mod fading;
mod geometry;
mod irs;
mod realization;
mod sinr;

pub use fading::{complex_gaussian, rician_sample};
pub use geometry::{array_response, los_component, Position, UpaGeometry};
pub use irs::{irs_phase_activation, quantize_phase, IrsPhaseVector};
pub use realization::{composite_channel, ChannelConfig, ChannelRealization, PairTable};
pub use sinr::{sinr, SinrTable, TransmitFrames};
