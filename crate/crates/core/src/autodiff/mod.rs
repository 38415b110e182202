//! Minimal reverse-mode automatic differentiation over real tensors.
//!
//! Complex quantities are carried as separate real and imaginary planes, so
//! every primitive here is real-valued.

pub mod container;
pub mod nn;
mod optim;
mod params;
mod tape;
mod tensor;

pub use optim::{Adam, Optimizer, Sgd};
pub use params::{Binding, ParameterSet};
pub use tape::{matmul_values, Gradients, Tape, Var};
pub use tensor::Tensor;
