use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;

use crate::channel::{complex_gaussian, PairTable, TransmitFrames};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::ScheduleMatrix;

use super::frame::SemanticFrame;

/// Passes every transmitter's frame through its composite channels:
/// `y_k = Σ_r B[r,k]·sqrt(P_t)·h_{r,k}·s_r + n`, `n ~ CN(0, σ²)`.
///
/// Returns one vector per non-transmitting user. A user with no scheduled
/// transmitter receives pure noise.
pub fn transmit<T: Real, R: Rng + ?Sized>(
    schedule: &ScheduleMatrix,
    composite: &PairTable<Complex<T>>,
    frames: &TransmitFrames<T>,
    noise_power: T,
    transmit_power: T,
    rng: &mut R,
) -> Result<BTreeMap<usize, SemanticFrame<T>>> {
    let users = schedule.users();
    if composite.users() != users {
        return Err(Error::invalid("channel table and schedule disagree on user count"));
    }
    let len = frames
        .values()
        .map(|f| f.frame.len())
        .next()
        .ok_or_else(|| Error::invalid("no transmitted frames"))?;
    if len == 0 {
        return Err(Error::invalid("frame length must be positive"));
    }
    for r in schedule.transmitters() {
        match frames.get(&r) {
            Some(f) if f.frame.len() == len => {}
            Some(f) => {
                return Err(Error::Shape {
                    op: "transmit",
                    lhs: vec![len],
                    rhs: vec![f.frame.len()],
                })
            }
            None => return Err(Error::invalid(format!("transmitter {r} has no frame"))),
        }
    }
    let sqrt_p = transmit_power.sqrt();
    let transmitters = schedule.transmitters();
    let mut out = BTreeMap::new();
    for k in (0..users).filter(|k| !transmitters.contains(k)) {
        let mut y = vec![Complex::new(T::zero(), T::zero()); len];
        for r in schedule.transmitters_to(k) {
            let h = *composite.get(r, k) * sqrt_p;
            for (yi, &s) in y.iter_mut().zip(frames[&r].frame.symbols()) {
                *yi = *yi + h * s;
            }
        }
        if noise_power > T::zero() {
            for yi in y.iter_mut() {
                *yi = *yi + complex_gaussian(rng, noise_power.to_f64_lossy());
            }
        }
        out.insert(k, SemanticFrame::new(y));
    }
    Ok(out)
}
