use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Length-`L` complex symbol vector produced by the encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticFrame<T> {
    symbols: Vec<Complex<T>>,
    normalized: bool,
}

impl<T: Real> SemanticFrame<T> {
    pub fn new(symbols: Vec<Complex<T>>) -> Self {
        Self {
            symbols,
            normalized: false,
        }
    }

    /// Frame from separate real and imaginary planes.
    pub fn from_planes(re: &[T], im: &[T]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Shape {
                op: "frame planes",
                lhs: vec![re.len()],
                rhs: vec![im.len()],
            });
        }
        Ok(Self::new(re.iter().zip(im).map(|(&a, &b)| Complex::new(a, b)).collect()))
    }

    pub fn symbols(&self) -> &[Complex<T>] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Mean per-symbol power `mean |s_i|²`.
    pub fn mean_power(&self) -> T {
        if self.symbols.is_empty() {
            return T::zero();
        }
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<T>() / T::from_usize_lossy(self.symbols.len())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            symbols: self.symbols.iter().map(|&s| s * c).collect(),
            normalized: false,
        }
    }

    /// Rescaled to unit mean power; fails for an all-zero frame.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.mean_power();
        if !(p > T::zero()) {
            return Err(Error::invalid("cannot normalise a zero-power frame"));
        }
        Ok(Self {
            symbols: self.scaled(T::one() / p.sqrt()).symbols,
            normalized: true,
        })
    }
}

/// Real attention weights on the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionVector<T> {
    weights: Vec<T>,
}

impl<T: Real> AttentionVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if weights.iter().any(|&w| w < T::zero() || !w.is_finite())
            || (total - T::one()).abs() > T::lit(1e-9)
        {
            return Err(Error::invalid("attention weights must be non-negative and sum to 1"));
        }
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![T::one() / T::from_usize_lossy(len); len],
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Hadamard product `a ⊙ s`, applied to both planes.
pub fn apply_attention<T: Real>(s: &SemanticFrame<T>, a: &AttentionVector<T>) -> Result<SemanticFrame<T>> {
    if s.len() != a.len() {
        return Err(Error::Shape {
            op: "apply_attention",
            lhs: vec![s.len()],
            rhs: vec![a.len()],
        });
    }
    Ok(SemanticFrame::new(
        s.symbols.iter().zip(&a.weights).map(|(&x, &w)| x * w).collect(),
    ))
}

/// One transmitter's outgoing signal: the unit-power sum of its scheduled
/// components, plus those components scaled by the same factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Superposition<T> {
    pub frame: SemanticFrame<T>,
    pub components: Vec<(usize, SemanticFrame<T>)>,
}

impl<T: Real> Superposition<T> {
    pub fn component(&self, dest: usize) -> Option<&SemanticFrame<T>> {
        self.components.iter().find(|(d, _)| *d == dest).map(|(_, f)| f)
    }
}

/// `s_r = Σ_j B[r, j]·s^a_{r,j}`, scaled to unit mean symbol power.
///
/// `components` pairs each destination with its attention-weighted frame;
/// `row` is the transmitter's schedule row.
pub fn superpose_and_normalize<T: Real>(
    components: &[(usize, SemanticFrame<T>)],
    row: &[bool],
) -> Result<Superposition<T>> {
    let active: Vec<&(usize, SemanticFrame<T>)> = components
        .iter()
        .filter(|(d, _)| row.get(*d).copied().unwrap_or(false))
        .collect();
    let first = active
        .first()
        .ok_or_else(|| Error::invalid("superposition needs at least one scheduled destination"))?;
    let len = first.1.len();
    let mut sum = vec![Complex::new(T::zero(), T::zero()); len];
    for (_, f) in &active {
        if f.len() != len {
            return Err(Error::Shape {
                op: "superpose",
                lhs: vec![len],
                rhs: vec![f.len()],
            });
        }
        sum.iter_mut().zip(&f.symbols).for_each(|(a, &b)| *a = *a + b);
    }
    let raw = SemanticFrame::new(sum);
    let power = raw.mean_power();
    if !(power > T::zero()) {
        return Err(Error::invalid("superposition has zero power"));
    }
    let scale = T::one() / power.sqrt();
    Ok(Superposition {
        frame: raw.normalized()?,
        components: active.iter().map(|(d, f)| (*d, f.scaled(scale))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn uniform_and_one_hot_attention() {
        let s = SemanticFrame::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 4.0), c(2.0, 2.0)]);
        let u = apply_attention(&s, &AttentionVector::uniform(4)).unwrap();
        for (a, b) in u.symbols().iter().zip(s.symbols()) {
            assert!((a - b * 0.25).norm() < 1e-15);
        }
        let hot = AttentionVector::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let h = apply_attention(&s, &hot).unwrap();
        assert_eq!(h.symbols(), &[c(0.0, 0.0), c(-3.0, 0.5), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(apply_attention(&s, &AttentionVector::uniform(3)).is_err());
    }

    #[test]
    fn unit_power_frame_is_unchanged() {
        let s = SemanticFrame::new(vec![c(1.0, 0.0), c(0.0, -1.0)]);
        let out = superpose_and_normalize(&[(1, s.clone())], &[false, true]).unwrap();
        for (a, b) in out.frame.symbols().iter().zip(s.symbols()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(out.frame.is_normalized());
    }

    #[test]
    fn identical_frames_scale_back() {
        let s = SemanticFrame::new(vec![c(0.6, 0.8), c(-1.0, 0.0)]);
        let out = superpose_and_normalize(&[(1, s.clone()), (2, s.clone())], &[false, true, true]).unwrap();
        for (a, b) in out.frame.symbols().iter().zip(s.symbols()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_sum_and_no_destination_fail() {
        let s = SemanticFrame::new(vec![c(1.0, 0.0)]);
        let neg = s.scaled(-1.0);
        assert!(superpose_and_normalize(&[(0, s.clone()), (1, neg)], &[true, true]).is_err());
        assert!(superpose_and_normalize(&[(0, s)], &[false]).is_err());
    }
}
