use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major real tensor with an optional gradient accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    values: Vec<T>,
    requires_grad: bool,
    grad: Option<Vec<T>>,
}

pub(crate) fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: impl Into<Vec<usize>>, values: Vec<T>) -> Result<Self> {
        let shape = shape.into();
        if numel(&shape) != values.len() {
            return Err(Error::Shape {
                op: "tensor",
                lhs: shape,
                rhs: vec![values.len()],
            });
        }
        Ok(Self {
            shape,
            values,
            requires_grad: false,
            grad: None,
        })
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        let n = numel(&shape);
        Self {
            shape,
            values: vec![T::zero(); n],
            requires_grad: false,
            grad: None,
        }
    }

    pub fn filled(shape: impl Into<Vec<usize>>, value: T) -> Self {
        let mut t = Self::zeros(shape);
        t.values.iter_mut().for_each(|v| *v = value);
        t
    }

    pub fn scalar(value: T) -> Self {
        Self {
            shape: Vec::new(),
            values: vec![value],
            requires_grad: false,
            grad: None,
        }
    }

    /// A `[1, n]` row.
    pub fn row(values: Vec<T>) -> Self {
        Self {
            shape: vec![1, values.len()],
            values,
            requires_grad: false,
            grad: None,
        }
    }

    /// A `[rows, cols]` matrix from row-major values.
    pub fn matrix(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        Self::new(vec![rows, cols], values)
    }

    pub fn with_grad(mut self) -> Self {
        self.requires_grad = true;
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn set_requires_grad(&mut self, flag: bool) {
        self.requires_grad = flag;
        if !flag {
            self.grad = None;
        }
    }

    pub fn grad(&self) -> Option<&[T]> {
        self.grad.as_deref()
    }

    pub fn clear_grad(&mut self) {
        self.grad = None;
    }

    /// Adds `g` into the accumulator, allocating it on first use.
    pub fn accumulate_grad(&mut self, g: &[T]) -> Result<()> {
        if g.len() != self.values.len() {
            return Err(Error::Shape {
                op: "accumulate_grad",
                lhs: self.shape.clone(),
                rhs: vec![g.len()],
            });
        }
        match &mut self.grad {
            Some(acc) => acc.iter_mut().zip(g).for_each(|(a, &b)| *a = *a + b),
            None => self.grad = Some(g.to_vec()),
        }
        Ok(())
    }

    pub fn reshape(mut self, shape: impl Into<Vec<usize>>) -> Result<Self> {
        let shape = shape.into();
        if numel(&shape) != self.values.len() {
            return Err(Error::Shape {
                op: "reshape",
                lhs: self.shape,
                rhs: shape,
            });
        }
        self.shape = shape;
        Ok(self)
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> Option<T> {
        (self.values.len() == 1).then(|| self.values[0])
    }

    pub fn l2_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }
}
