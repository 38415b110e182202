use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grayscale image with pixels in `[0, 1]`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyImage<T> {
    height: usize,
    width: usize,
    pixels: Vec<T>,
}

impl<T: Real> ToyImage<T> {
    pub fn new(height: usize, width: usize, pixels: Vec<T>) -> Result<Self> {
        if pixels.len() != height * width {
            return Err(Error::Shape {
                op: "image",
                lhs: vec![height, width],
                rhs: vec![pixels.len()],
            });
        }
        if pixels.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::invalid("pixels must lie in [0, 1]"));
        }
        Ok(Self { height, width, pixels })
    }

    /// Clamps every value into `[0, 1]` (NaN becomes 0).
    pub fn from_clamped(height: usize, width: usize, values: &[T]) -> Result<Self> {
        let pixels = values
            .iter()
            .map(|&v| if v.is_nan() { T::zero() } else { v.max(T::zero()).min(T::one()) })
            .collect();
        Self::new(height, width, pixels)
    }

    pub fn constant(height: usize, width: usize, value: T) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Procedural square image: a smooth linear gradient with one to three
    /// filled rectangles or discs on top.
    pub fn generate<R: Rng + ?Sized>(side: usize, rng: &mut R) -> Self {
        let base: f64 = rng.random_range(0.15..0.6);
        let gx: f64 = rng.random_range(-0.35..0.35);
        let gy: f64 = rng.random_range(-0.35..0.35);
        let mut px: Vec<f64> = (0..side * side)
            .map(|i| {
                let (y, x) = ((i / side) as f64 / side as f64, (i % side) as f64 / side as f64);
                base + gx * (x - 0.5) + gy * (y - 0.5)
            })
            .collect();
        let shapes = rng.random_range(1..=3);
        for _ in 0..shapes {
            let level: f64 = rng.random_range(0.0..1.0);
            let cx: f64 = rng.random_range(0.15..0.85) * side as f64;
            let cy: f64 = rng.random_range(0.15..0.85) * side as f64;
            let rx: f64 = rng.random_range(0.1..0.35) * side as f64;
            let ry: f64 = rng.random_range(0.1..0.35) * side as f64;
            let disc = rng.random_bool(0.5);
            for (i, p) in px.iter_mut().enumerate() {
                let (y, x) = ((i / side) as f64 + 0.5, (i % side) as f64 + 0.5);
                let (dx, dy) = ((x - cx) / rx, (y - cy) / ry);
                let inside = if disc { dx * dx + dy * dy <= 1.0 } else { dx.abs() <= 1.0 && dy.abs() <= 1.0 };
                if inside {
                    *p = level;
                }
            }
        }
        let pixels = px.into_iter().map(|v| T::lit(v.clamp(0.0, 1.0))).collect();
        Self {
            height: side,
            width: side,
            pixels,
        }
    }

    pub fn dataset<R: Rng + ?Sized>(count: usize, side: usize, rng: &mut R) -> Vec<Self> {
        (0..count).map(|_| Self::generate(side, rng)).collect()
    }
}
