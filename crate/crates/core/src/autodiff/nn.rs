//! Dense multi-layer perceptrons built from tape primitives.

use rand::Rng;

use crate::error::Result;
use crate::scalar::Real;

use super::params::{Binding, ParameterSet};
use super::tape::{Tape, Var};
use super::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Real>(self, tape: &mut Tape<T>, x: Var) -> Var {
        match self {
            Activation::Identity => x,
            Activation::Relu => tape.relu(x),
            Activation::Tanh => tape.tanh(x),
            Activation::Sigmoid => tape.sigmoid(x),
        }
    }
}

/// Stack of affine layers named `{prefix}.l{i}.w` / `{prefix}.l{i}.b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    prefix: String,
    sizes: Vec<usize>,
    hidden: Activation,
    output: Activation,
}

impl Mlp {
    /// `sizes` lists the input width followed by every layer's output width.
    pub fn new(prefix: impl Into<String>, sizes: &[usize], hidden: Activation, output: Activation) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least one layer");
        Self {
            prefix: prefix.into(),
            sizes: sizes.to_vec(),
            hidden,
            output,
        }
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn weight_name(&self, layer: usize) -> String {
        format!("{}.l{}.w", self.prefix, layer)
    }

    pub fn bias_name(&self, layer: usize) -> String {
        format!("{}.l{}.b", self.prefix, layer)
    }

    /// Uniform Glorot initialisation, zero biases.
    pub fn init<T: Real, R: Rng + ?Sized>(&self, params: &mut ParameterSet<T>, rng: &mut R) -> Result<()> {
        for l in 0..self.layers() {
            let (fi, fo) = (self.sizes[l], self.sizes[l + 1]);
            let a = (6.0 / (fi + fo) as f64).sqrt();
            let w = (0..fi * fo).map(|_| T::lit(rng.random_range(-a..a))).collect();
            params.insert(self.weight_name(l), Tensor::matrix(fi, fo, w)?)?;
            params.insert(self.bias_name(l), Tensor::zeros([fo]))?;
        }
        Ok(())
    }

    /// Sets the last layer's weights and bias to zero.
    pub fn zero_output_layer<T: Real>(&self, params: &mut ParameterSet<T>) -> Result<()> {
        let l = self.layers() - 1;
        for name in [self.weight_name(l), self.bias_name(l)] {
            params.get_mut(&name)?.values_mut().iter_mut().for_each(|v| *v = T::zero());
        }
        Ok(())
    }

    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, binding: &Binding, x: Var) -> Result<Var> {
        let mut h = x;
        for l in 0..self.layers() {
            let w = binding.var(&self.weight_name(l))?;
            let b = binding.var(&self.bias_name(l))?;
            h = tape.affine(h, w, b)?;
            let act = if l + 1 == self.layers() { self.output } else { self.hidden };
            h = act.apply(tape, h);
        }
        Ok(h)
    }
}
