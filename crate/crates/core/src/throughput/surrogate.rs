use num_complex::Complex;

use crate::channel::{sinr, PairTable, TransmitFrames};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::{ScheduleMatrix, SlotEvaluator, SlotOutcome};
use crate::semantic::{SemanticFrame, Superposition};

/// Monotone piecewise-linear map from SINR to expected similarity.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilaritySurrogate {
    knots: Vec<(f64, f64)>,
}

impl SimilaritySurrogate {
    /// Isotonic (pool-adjacent-violators) fit of `(γ, ξ)` samples. Samples
    /// sharing a `γ` are averaged first; fitted values are clamped to `[0, 1]`.
    pub fn fit(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty calibration table"));
        }
        if samples.iter().any(|&(g, x)| !(g >= 0.0 && g.is_finite() && x.is_finite())) {
            return Err(Error::invalid("calibration samples need finite ξ and finite γ ≥ 0"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        // (γ values in block, weighted mean, weight)
        let mut blocks: Vec<(Vec<f64>, f64, f64)> = Vec::new();
        for (g, x) in sorted {
            match blocks.last_mut() {
                Some((gs, mean, w)) if *gs.last().expect("nonempty block") == g => {
                    *mean = (*mean * *w + x) / (*w + 1.0);
                    *w += 1.0;
                }
                _ => blocks.push((vec![g], x, 1.0)),
            }
            while blocks.len() > 1 && blocks[blocks.len() - 2].1 > blocks[blocks.len() - 1].1 {
                let (gs, m2, w2) = blocks.pop().expect("two blocks");
                let (g1, m1, w1) = blocks.last_mut().expect("two blocks");
                *m1 = (*m1 * *w1 + m2 * w2) / (*w1 + w2);
                *w1 += w2;
                g1.extend(gs);
            }
        }
        let knots = blocks
            .into_iter()
            .flat_map(|(gs, m, _)| gs.into_iter().map(move |g| (g, m.clamp(0.0, 1.0))))
            .collect();
        Ok(Self { knots })
    }

    /// Uses `knots` as given; they must be sorted by strictly increasing `γ`
    /// with nondecreasing values in `[0, 1]`.
    pub fn from_knots(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("empty calibration table"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 >= w[0].1) {
                return Err(Error::invalid("surrogate knots must increase in γ and be nondecreasing"));
            }
        }
        if knots.iter().any(|&(g, x)| !(g >= 0.0 && (0.0..=1.0).contains(&x))) {
            return Err(Error::invalid("surrogate knots need γ ≥ 0 and ξ in [0, 1]"));
        }
        Ok(Self { knots })
    }

    /// Curve calibrated against the pretrained shared codec on the five-user
    /// scenario (16×16 images, L = 128, 3×3 surface, seed 0): every schedule
    /// of at most two links, 16 test images, 12 bins.
    pub fn calibrated() -> Self {
        Self::from_knots(CALIBRATED.to_vec()).expect("valid built-in table")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Value at the first knot, returned for every `γ` below it.
    pub fn floor(&self) -> f64 {
        self.knots[0].1
    }

    pub fn evaluate(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("SINR {gamma} must be ≥ 0")));
        }
        let k = &self.knots;
        let i = k.partition_point(|&(g, _)| g <= gamma);
        Ok(if i == 0 {
            k[0].1
        } else if i == k.len() {
            k[k.len() - 1].1
        } else {
            let (g0, x0) = k[i - 1];
            let (g1, x1) = k[i];
            x0 + (x1 - x0) * (gamma - g0) / (g1 - g0)
        })
    }
}

const CALIBRATED: &[(f64, f64)] = &[
    (0.30751884605495083, 0.24931512401677416),
    (1.0882850760169203, 0.4918450452337902),
    (1.9078819181463516, 0.5747994567098758),
    (1.979686038765505, 0.5817120086474852),
    (2.1017412982212784, 0.6054198260017676),
    (10.596112665473974, 0.7733597801041967),
    (41.58832828187215, 0.8634256972301809),
    (98.36869219555045, 0.8697429592360824),
    (168.99779307672773, 0.871153291783886),
    (216.14044173992417, 0.8738957725003066),
    (257.31552365456184, 0.8754252918068497),
    (298.4487793253606, 0.8754252918068497),
];

/// Unit-power frames in which every transmitter splits its power equally
/// over its scheduled receivers, using mutually orthogonal sequences.
pub fn equal_split_frames<T: Real>(schedule: &ScheduleMatrix, symbols: usize) -> Result<TransmitFrames<T>> {
    if symbols == 0 {
        return Err(Error::invalid("frame length L must be positive"));
    }
    let mut frames = TransmitFrames::new();
    for r in schedule.transmitters() {
        let dests = schedule.receivers_of(r);
        let m = dests.len();
        if m > symbols {
            return Err(Error::invalid("more receivers than symbols"));
        }
        let amp = T::one() / T::from_usize_lossy(m).sqrt();
        let l = T::from_usize_lossy(symbols);
        let components: Vec<(usize, SemanticFrame<T>)> = dests
            .iter()
            .enumerate()
            .map(|(q, &d)| {
                let f = T::from_usize_lossy(q);
                let s = (0..symbols)
                    .map(|n| Complex::from_polar(amp, T::TAU() * f * T::from_usize_lossy(n) / l))
                    .collect();
                (d, SemanticFrame::new(s))
            })
            .collect();
        let mut sum = vec![Complex::new(T::zero(), T::zero()); symbols];
        for (_, c) in &components {
            sum.iter_mut().zip(c.symbols()).for_each(|(a, &b)| *a = *a + b);
        }
        frames.insert(
            r,
            Superposition {
                frame: SemanticFrame::new(sum),
                components,
            },
        );
    }
    Ok(frames)
}

/// Scores schedules by SINR under equal-split frames and maps SINR to
/// similarity through a surrogate; no codec is run.
#[derive(Clone, Debug)]
pub struct SurrogateEvaluator<T> {
    composite: PairTable<Complex<T>>,
    noise_power: T,
    transmit_power: T,
    symbols: usize,
    surrogate: SimilaritySurrogate,
}

impl<T: Real> SurrogateEvaluator<T> {
    pub fn new(
        composite: PairTable<Complex<T>>,
        noise_power: T,
        transmit_power: T,
        symbols: usize,
        surrogate: SimilaritySurrogate,
    ) -> Self {
        Self {
            composite,
            noise_power,
            transmit_power,
            symbols,
            surrogate,
        }
    }
}

impl<T: Real> SlotEvaluator for SurrogateEvaluator<T> {
    fn users(&self) -> usize {
        self.composite.users()
    }

    fn evaluate(&mut self, schedule: &ScheduleMatrix) -> Result<SlotOutcome> {
        let users = self.users();
        let mut similarity = PairTable::filled(users, 0.0);
        let mut gamma = PairTable::filled(users, 0.0);
        if !schedule.is_empty() {
            let frames = equal_split_frames::<T>(schedule, self.symbols)?;
            let table = sinr(schedule, &self.composite, &frames, self.noise_power, self.transmit_power)?;
            for (r, k, g) in table.entries() {
                let g = g.to_f64_lossy();
                gamma.set(r, k, g);
                similarity.set(r, k, self.surrogate.evaluate(g)?);
            }
        }
        Ok(SlotOutcome { similarity, sinr: gamma })
    }
}
