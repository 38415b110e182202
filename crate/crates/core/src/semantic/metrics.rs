use crate::error::{Error, Result};
use crate::scalar::Real;

use super::image::ToyImage;

fn same_shape<T: Real>(op: &'static str, a: &ToyImage<T>, b: &ToyImage<T>) -> Result<()> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::Shape {
            op,
            lhs: vec![a.height(), a.width()],
            rhs: vec![b.height(), b.width()],
        });
    }
    Ok(())
}

pub fn mse<T: Real>(a: &ToyImage<T>, b: &ToyImage<T>) -> Result<T> {
    same_shape("mse", a, b)?;
    Ok(mse_values(a.pixels(), b.pixels()))
}

pub(crate) fn mse_values<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>() / T::from_usize_lossy(a.len().max(1))
}

/// Single-window SSIM over the whole image, dynamic range 1,
/// `c1 = 0.01²`, `c2 = 0.03²`, population statistics.
pub fn ssim<T: Real>(a: &ToyImage<T>, b: &ToyImage<T>) -> Result<T> {
    same_shape("ssim", a, b)?;
    Ok(ssim_values(a.pixels(), b.pixels()))
}

pub(crate) fn ssim_values<T: Real>(a: &[T], b: &[T]) -> T {
    let n = T::from_usize_lossy(a.len().max(1));
    let c1 = T::lit(0.01 * 0.01);
    let c2 = T::lit(0.03 * 0.03);
    let two = T::lit(2.0);
    let mu_a = a.iter().copied().sum::<T>() / n;
    let mu_b = b.iter().copied().sum::<T>() / n;
    let (mut var_a, mut var_b, mut cov) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mu_a, y - mu_b);
        var_a = var_a + dx * dx;
        var_b = var_b + dy * dy;
        cov = cov + dx * dy;
    }
    let (var_a, var_b, cov) = (var_a / n, var_b / n, cov / n);
    ((two * mu_a * mu_b + c1) * (two * cov + c2))
        / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
}

/// `10·log10(1/MSE)`; identical images give `+∞`.
pub fn psnr<T: Real>(a: &ToyImage<T>, b: &ToyImage<T>) -> Result<T> {
    same_shape("psnr", a, b)?;
    Ok(psnr_from_mse(mse_values(a.pixels(), b.pixels())))
}

pub fn psnr_from_mse<T: Real>(mse: T) -> T {
    if mse == T::zero() {
        T::infinity()
    } else {
        T::lit(10.0) * (T::one() / mse).log10()
    }
}
