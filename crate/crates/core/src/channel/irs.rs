use num_complex::Complex;

use crate::scalar::Real;

/// Phase configuration of the reflecting surface, one phase per element in
/// `[0, 2π)`. A quantized vector holds only `0` and `π`.
#[derive(Clone, Debug, PartialEq)]
pub struct IrsPhaseVector<T> {
    phases: Vec<T>,
    quantized: bool,
}

fn wrap<T: Real>(p: T) -> T {
    let tau = T::TAU();
    let w = p % tau;
    let w = if w < T::zero() { w + tau } else { w };
    if w >= tau { T::zero() } else { w }
}

impl<T: Real> IrsPhaseVector<T> {
    /// Continuous phases, wrapped into `[0, 2π)`.
    pub fn continuous(phases: Vec<T>) -> Self {
        Self {
            phases: phases.into_iter().map(wrap).collect(),
            quantized: false,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            phases: vec![T::zero(); n],
            quantized: true,
        }
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn is_quantized(&self) -> bool {
        self.quantized
    }

    /// Unit-modulus reflection coefficients `e^{jφ_n}`.
    pub fn reflection(&self) -> Vec<Complex<T>> {
        self.phases.iter().map(|&p| Complex::from_polar(T::one(), p)).collect()
    }

    /// Snaps every phase to the angularly nearer of `{0, π}`; exact ties go to 0.
    pub fn quantize(&self) -> Self {
        Self {
            phases: self.phases.iter().map(|&p| quantize_phase(p)).collect(),
            quantized: true,
        }
    }
}

pub fn quantize_phase<T: Real>(phase: T) -> T {
    let p = wrap(phase);
    let tau = T::TAU();
    let to_zero = p.min(tau - p);
    let to_pi = (p - T::PI()).abs();
    let tie = T::lit(8.0) * T::epsilon() * tau;
    if to_zero <= to_pi + tie {
        T::zero()
    } else {
        T::PI()
    }
}

/// Maps raw reals to phases `π·(tanh(p) + 1)`, wrapped into `[0, 2π)`.
pub fn irs_phase_activation<T: Real>(raw: &[T]) -> IrsPhaseVector<T> {
    IrsPhaseVector::continuous(raw.iter().map(|&p| T::PI() * (p.tanh() + T::one())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn activation_limits() {
        let v = irs_phase_activation(&[0.0f64, -40.0, 12.0]);
        assert!((v.phases()[0] - PI).abs() < 1e-15);
        assert!(v.phases()[1].abs() < 1e-12);
        let near = v.phases()[2];
        assert!(near < TAU && (TAU - near < 1e-9 || near == 0.0));
    }

    #[test]
    fn quantization_examples() {
        assert_eq!(quantize_phase(0.2f64), 0.0);
        assert_eq!(quantize_phase(2.9f64), PI);
        assert_eq!(quantize_phase(5.8f64), 0.0);
        assert_eq!(quantize_phase(FRAC_PI_2), 0.0);
        assert_eq!(quantize_phase(3.0 * FRAC_PI_2), 0.0);
        assert_eq!(quantize_phase(-0.1f64), 0.0);
        assert_eq!(quantize_phase(PI + 1.0), PI);
    }
}
