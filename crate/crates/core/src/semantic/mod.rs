//! The semantic codec: toy images, encoder, CSI embedding, channel
//! attention, superposition, the simulated link, decoder and metrics.

mod codec;
mod embed;
mod frame;
mod image;
mod metrics;
mod train;
mod transmit;

pub use codec::{Codec, CodecConfig, CodecVariant, ForwardInput, ForwardOutput, LinkCsi, NoiseDraw, PhaseMode, IRS_PARAM};
pub use embed::{c2v_embed, c2v_embed_on_tape, CsiEmbedding};
pub use frame::{apply_attention, superpose_and_normalize, AttentionVector, SemanticFrame, Superposition};
pub use image::ToyImage;
pub use metrics::{mse, psnr, psnr_from_mse, ssim};
pub use train::{evaluate, train_e2e, train_e2e_groups, EvalReport, LinkMetrics, TrainConfig, TrainReport};
pub use transmit::transmit;
