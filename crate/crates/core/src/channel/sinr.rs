use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::ScheduleMatrix;
use crate::semantic::Superposition;

use super::realization::PairTable;

/// Outgoing signals of every active transmitter, keyed by user index.
pub type TransmitFrames<T> = BTreeMap<usize, Superposition<T>>;

/// SINR for the scheduled pairs of one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrTable<T> {
    values: PairTable<Option<T>>,
}

impl<T: Real> SinrTable<T> {
    pub fn get(&self, r: usize, k: usize) -> Result<T> {
        if r >= self.values.users() || k >= self.values.users() {
            return Err(Error::Unscheduled(r, k));
        }
        self.values.get(r, k).ok_or(Error::Unscheduled(r, k))
    }

    /// `(r, k, γ)` for every scheduled pair, row-major.
    pub fn entries(&self) -> Vec<(usize, usize, T)> {
        let n = self.values.users();
        (0..n)
            .flat_map(|r| (0..n).map(move |k| (r, k)))
            .filter_map(|(r, k)| self.values.get(r, k).map(|g| (r, k, g)))
            .collect()
    }
}

fn mean_power<T: Real>(symbols: impl Iterator<Item = Complex<T>>, len: usize) -> T {
    symbols.map(|s| s.norm_sqr()).sum::<T>() / T::from_usize_lossy(len)
}

/// `γ_{r,k} = P|h_{r,k}|² / (σ² + I^e + I^t)` for every scheduled pair.
///
/// `I^e` is the power of transmitter `r`'s components for other destinations
/// seen through `h_{r,k}`; `I^t` is the power of the other transmitters that
/// are scheduled towards `k`. Both are averaged over the frame's symbols.
pub fn sinr<T: Real>(
    schedule: &ScheduleMatrix,
    composite: &PairTable<Complex<T>>,
    frames: &TransmitFrames<T>,
    noise_power: T,
    transmit_power: T,
) -> Result<SinrTable<T>> {
    let users = schedule.users();
    if composite.users() != users {
        return Err(Error::invalid("channel table and schedule disagree on user count"));
    }
    let mut values = PairTable::filled(users, None);
    for (r, k) in schedule.links() {
        let tx = frames
            .get(&r)
            .ok_or_else(|| Error::invalid(format!("no frame for transmitter {r}")))?;
        let len = tx.frame.len();
        if len == 0 {
            return Err(Error::invalid("frame length L must be positive"));
        }
        let gain = composite.get(r, k).norm_sqr();

        let mut others = vec![Complex::new(T::zero(), T::zero()); len];
        for (dest, comp) in &tx.components {
            if *dest != k && schedule.get(r, *dest) {
                others.iter_mut().zip(comp.symbols()).for_each(|(a, &b)| *a = *a + b);
            }
        }
        let encoding = transmit_power * gain * mean_power(others.into_iter(), len);

        let mut transmission = T::zero();
        for j in schedule.transmitters_to(k) {
            if j == r {
                continue;
            }
            let other = frames
                .get(&j)
                .ok_or_else(|| Error::invalid(format!("no frame for transmitter {j}")))?;
            let p = mean_power(other.frame.symbols().iter().copied(), other.frame.len().max(1));
            transmission = transmission + transmit_power * composite.get(j, k).norm_sqr() * p;
        }
        let gamma = transmit_power * gain / (noise_power + encoding + transmission);
        values.set(r, k, Some(gamma));
    }
    Ok(SinrTable { values })
}
