use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Circularly-symmetric complex Gaussian with total variance `variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// Rician draw `sqrt(κ/(κ+1))·los + sqrt(1/(κ+1))·w`, `w ~ CN(0, 1)` per entry.
pub fn rician_sample<T: Real, R: Rng + ?Sized>(
    los: &[Complex<T>],
    kappa: T,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    if !kappa.is_finite() || kappa < T::zero() {
        return Err(Error::invalid(format!("Rician factor must be finite and ≥ 0, got {kappa}")));
    }
    let total = kappa + T::one();
    let a = (kappa / total).sqrt();
    let b = (T::one() / total).sqrt();
    Ok(los
        .iter()
        .map(|&l| l * a + complex_gaussian::<T, R>(rng, 1.0) * b)
        .collect())
}
