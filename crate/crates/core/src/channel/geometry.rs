use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point in the 2-D deployment plane, in metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Position<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("position coordinates must be finite"));
        }
        Ok(Self { x, y })
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Azimuth of `self` as seen from `origin`.
    pub fn azimuth_from(&self, origin: &Self) -> T {
        (self.y - origin.y).atan2(self.x - origin.x)
    }
}

/// Uniform planar array with half-wavelength element spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpaGeometry<T> {
    n_h: usize,
    n_v: usize,
    wavelength: T,
}

impl<T: Real> UpaGeometry<T> {
    pub fn new(n_h: usize, n_v: usize, wavelength: T) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::invalid("UPA needs at least one element per axis"));
        }
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return Err(Error::invalid("wavelength must be positive"));
        }
        Ok(Self { n_h, n_v, wavelength })
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn elements(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn spacing(&self) -> T {
        self.wavelength / T::lit(2.0)
    }

    /// Wavenumber `2π/λ`.
    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }
}

/// Steering vector of the UPA: entry `(m, n)` (flattened row-major) is
/// `exp(jπ(m·sin(az)·cos(el) + n·sin(el)))`.
pub fn array_response<T: Real>(azimuth: T, elevation: T, geom: &UpaGeometry<T>) -> Vec<Complex<T>> {
    let u = azimuth.sin() * elevation.cos();
    let v = elevation.sin();
    let mut out = Vec::with_capacity(geom.elements());
    for m in 0..geom.n_h {
        for n in 0..geom.n_v {
            let phase = T::PI() * (T::from_usize_lossy(m) * u + T::from_usize_lossy(n) * v);
            out.push(Complex::from_polar(T::one(), phase));
        }
    }
    out
}

/// Line-of-sight IRS vector: propagation phase `exp(−j·k0·d)` times the
/// array response.
pub fn los_component<T: Real>(
    distance: T,
    azimuth: T,
    elevation: T,
    geom: &UpaGeometry<T>,
) -> Result<Vec<Complex<T>>> {
    if !(distance > T::zero()) {
        return Err(Error::invalid(format!("distance must be positive, got {distance}")));
    }
    let rot = Complex::from_polar(T::one(), -geom.wavenumber() * distance);
    Ok(array_response(azimuth, elevation, geom)
        .into_iter()
        .map(|a| a * rot)
        .collect())
}
