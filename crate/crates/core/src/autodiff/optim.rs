use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::params::ParameterSet;

/// Applies accumulated gradients to a parameter set, then clears them.
pub trait Optimizer<T: Real> {
    fn step(&mut self, params: &mut ParameterSet<T>) -> Result<()>;
    fn learning_rate(&self) -> T;
    fn set_learning_rate(&mut self, lr: T);
}

fn check_finite<T: Real>(params: &ParameterSet<T>) -> Result<()> {
    for (name, t) in params.iter() {
        if let Some(g) = t.grad() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    name: format!("{name}.grad"),
                });
            }
        }
    }
    Ok(())
}

/// Plain gradient descent.
#[derive(Clone, Debug)]
pub struct Sgd<T> {
    pub lr: T,
}

impl<T: Real> Sgd<T> {
    pub fn new(lr: T) -> Self {
        Self { lr }
    }
}

impl<T: Real> Optimizer<T> for Sgd<T> {
    fn step(&mut self, params: &mut ParameterSet<T>) -> Result<()> {
        check_finite(params)?;
        for (_, t) in params.iter_mut() {
            if let Some(g) = t.grad().map(<[T]>::to_vec) {
                for (v, gv) in t.values_mut().iter_mut().zip(g) {
                    *v = *v - self.lr * gv;
                }
            }
            t.clear_grad();
        }
        Ok(())
    }

    fn learning_rate(&self) -> T {
        self.lr
    }

    fn set_learning_rate(&mut self, lr: T) {
        self.lr = lr;
    }
}

/// Adam with bias-corrected first and second moments.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    steps: i32,
    moments: HashMap<String, (Vec<T>, Vec<T>)>,
    rates: HashMap<String, T>,
}

impl<T: Real> Adam<T> {
    /// Moments (0.9, 0.999), epsilon 1e-8.
    pub fn new(lr: T) -> Self {
        Self {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            steps: 0,
            moments: HashMap::new(),
            rates: HashMap::new(),
        }
    }

    /// Uses `lr` instead of the global rate for parameter `name`.
    pub fn with_parameter_rate(mut self, name: impl Into<String>, lr: T) -> Self {
        self.rates.insert(name.into(), lr);
        self
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }
}

impl<T: Real> Optimizer<T> for Adam<T> {
    fn step(&mut self, params: &mut ParameterSet<T>) -> Result<()> {
        check_finite(params)?;
        self.steps += 1;
        let c1 = T::one() - self.beta1.powi(self.steps);
        let c2 = T::one() - self.beta2.powi(self.steps);
        for (name, t) in params.iter_mut() {
            let Some(g) = t.grad().map(<[T]>::to_vec) else {
                continue;
            };
            let lr = self.rates.get(name).copied().unwrap_or(self.lr);
            let (m, v) = self
                .moments
                .entry(name.to_string())
                .or_insert_with(|| (vec![T::zero(); g.len()], vec![T::zero(); g.len()]));
            for (((p, gv), mv), vv) in t.values_mut().iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mv = self.beta1 * *mv + (T::one() - self.beta1) * gv;
                *vv = self.beta2 * *vv + (T::one() - self.beta2) * gv * gv;
                let mhat = *mv / c1;
                let vhat = *vv / c2;
                *p = *p - lr * mhat / (vhat.sqrt() + self.eps);
            }
            t.clear_grad();
        }
        Ok(())
    }

    fn learning_rate(&self) -> T {
        self.lr
    }

    fn set_learning_rate(&mut self, lr: T) {
        self.lr = lr;
    }
}
