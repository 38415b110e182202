use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::tape::{Gradients, Tape, Var};
use super::tensor::Tensor;

/// Named table of trainable tensors, kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterSet<T> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
    index: HashMap<String, usize>,
}

/// Tape handles for every entry of a [`ParameterSet`] bound to one tape.
#[derive(Clone, Debug)]
pub struct Binding {
    vars: Vec<Var>,
    index: HashMap<String, usize>,
}

impl Binding {
    pub fn var(&self, name: &str) -> Result<Var> {
        self.index
            .get(name)
            .map(|&i| self.vars[i])
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }
}

impl<T: Real> ParameterSet<T> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            tensors: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Adds a trainable entry. Names are unique and contain no whitespace.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> Result<()> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!("bad parameter name `{name}`")));
        }
        if self.index.contains_key(&name) {
            return Err(Error::invalid(format!("duplicate parameter `{name}`")));
        }
        let mut tensor = tensor;
        tensor.set_requires_grad(true);
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.tensors.push(tensor);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.index
            .get(name)
            .map(|&i| &self.tensors[i])
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor<T>> {
        match self.index.get(name) {
            Some(&i) => Ok(&mut self.tensors[i]),
            None => Err(Error::UnknownParameter(name.to_string())),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor<T>)> {
        self.names.iter().map(String::as_str).zip(self.tensors.iter_mut())
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Excludes an entry from gradient flow.
    pub fn freeze(&mut self, name: &str) -> Result<()> {
        self.get_mut(name)?.set_requires_grad(false);
        Ok(())
    }

    pub fn unfreeze(&mut self, name: &str) -> Result<()> {
        self.get_mut(name)?.set_requires_grad(true);
        Ok(())
    }

    pub fn is_frozen(&self, name: &str) -> Result<bool> {
        Ok(!self.get(name)?.requires_grad())
    }

    /// Records every entry as a leaf of `tape`.
    pub fn bind(&self, tape: &mut Tape<T>) -> Binding {
        Binding {
            vars: self.tensors.iter().map(|t| tape.leaf(t)).collect(),
            index: self.index.clone(),
        }
    }

    /// Adds the gradients of a backward pass into each entry's accumulator.
    pub fn accumulate(&mut self, binding: &Binding, grads: &Gradients<T>) -> Result<()> {
        for (tensor, &var) in self.tensors.iter_mut().zip(&binding.vars) {
            if !tensor.requires_grad() {
                continue;
            }
            if let Some(g) = grads.get(var) {
                tensor.accumulate_grad(g)?;
            }
        }
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        self.tensors.iter_mut().for_each(Tensor::clear_grad);
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.names != other.names {
            return Err(Error::invalid("parameter sets have different names"));
        }
        for (n, (a, b)) in self.names.iter().zip(self.tensors.iter().zip(&other.tensors)) {
            if a.shape() != b.shape() {
                return Err(Error::Shape {
                    op: "parameter layout",
                    lhs: a.shape().to_vec(),
                    rhs: b.shape().to_vec(),
                })
                .map_err(|e| e.context(n.clone()));
            }
        }
        Ok(())
    }

    /// `self ← tau · online + (1 − tau) · self`, entry by entry.
    pub fn blend_from(&mut self, online: &Self, tau: T) -> Result<()> {
        self.check_same_layout(online)?;
        let keep = T::one() - tau;
        for (dst, src) in self.tensors.iter_mut().zip(&online.tensors) {
            for (d, &s) in dst.values_mut().iter_mut().zip(src.values()) {
                *d = tau * s + keep * *d;
            }
        }
        Ok(())
    }

    /// Euclidean distance between two sets with the same layout.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.check_same_layout(other)?;
        let sq = self
            .tensors
            .iter()
            .zip(&other.tensors)
            .flat_map(|(a, b)| a.values().iter().zip(b.values()))
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum::<T>();
        Ok(sq.sqrt())
    }

    /// Keeps only the entries whose name starts with `prefix`.
    pub fn subset(&self, prefix: &str) -> Self {
        let mut out = Self::new();
        for (name, t) in self.iter() {
            if name.starts_with(prefix) {
                let mut t = t.clone();
                let rg = t.requires_grad();
                t.clear_grad();
                out.insert(name, t).expect("names already unique");
                out.tensors.last_mut().unwrap().set_requires_grad(rg);
            }
        }
        out
    }
}
