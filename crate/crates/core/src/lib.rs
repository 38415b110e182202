pub mod autodiff;
pub mod channel;
pub mod error;
pub mod harness;
pub mod scalar;
pub mod scheduler;
pub mod semantic;
pub mod throughput;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Tensor64 = autodiff::Tensor<f64>;
pub type Tensor32 = autodiff::Tensor<f32>;
pub type ParameterSet64 = autodiff::ParameterSet<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type Codec64 = semantic::Codec<f64>;
pub type Codec32 = semantic::Codec<f32>;
pub type ToyImage64 = semantic::ToyImage<f64>;
pub type DdpgNets64 = scheduler::DdpgNets<f64>;
pub type DdpgNets32 = scheduler::DdpgNets<f32>;
