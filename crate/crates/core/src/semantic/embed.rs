use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sinusoidal embedding of a 2-D input into `L` reals.
#[derive(Clone, Debug, PartialEq)]
pub struct CsiEmbedding<T> {
    values: Vec<T>,
}

impl<T: Real> CsiEmbedding<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || !len.is_multiple_of(4) {
        return Err(Error::invalid(format!("embedding length {len} must be a positive multiple of 4")));
    }
    Ok(())
}

/// Per-slot frequencies of one half: `10000^{-2i/(L/2)}` repeated for the
/// sine slot `2i` and cosine slot `2i+1`.
fn half_frequencies<T: Real>(len: usize) -> Vec<T> {
    let half = len / 2;
    (0..half)
        .map(|slot| {
            let i = (slot / 2) as f64;
            T::lit(10000f64.powf(-2.0 * i / half as f64))
        })
        .collect()
}

/// First half encodes `x`, second half `y`; slot `2i` holds the sine and
/// `2i+1` the cosine at frequency `10000^{-2i/(L/2)}`.
pub fn c2v_embed<T: Real>(x: T, y: T, len: usize) -> Result<CsiEmbedding<T>> {
    check_len(len)?;
    let freqs = half_frequencies::<T>(len);
    let mut values = Vec::with_capacity(len);
    for v in [x, y] {
        for (slot, &f) in freqs.iter().enumerate() {
            let arg = v * f;
            values.push(if slot % 2 == 0 { arg.sin() } else { arg.cos() });
        }
    }
    Ok(CsiEmbedding { values })
}

/// Same embedding recorded on a tape; `x` and `y` are `[1, 1]` nodes and the
/// result is `[1, len]`, differentiable in both inputs.
pub fn c2v_embed_on_tape<T: Real>(tape: &mut Tape<T>, x: Var, y: Var, len: usize) -> Result<Var> {
    check_len(len)?;
    let half = len / 2;
    let freqs = tape.constant([1, half], half_frequencies(len))?;
    let sin_mask = tape.constant(
        [1, half],
        (0..half).map(|s| if s % 2 == 0 { T::one() } else { T::zero() }).collect(),
    )?;
    let cos_mask = tape.constant(
        [1, half],
        (0..half).map(|s| if s % 2 == 1 { T::one() } else { T::zero() }).collect(),
    )?;
    let mut parts = Vec::with_capacity(2);
    for v in [x, y] {
        let arg = tape.mul(v, freqs)?;
        let s = tape.sin(arg);
        let c = tape.cos(arg);
        let s = tape.mul(s, sin_mask)?;
        let c = tape.mul(c, cos_mask)?;
        parts.push(tape.add(s, c)?);
    }
    tape.concat(&parts)
}
