use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{ChannelRealization, PairTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::{DemandSet, LinkSet, ScheduleMatrix};
use crate::semantic::{
    apply_attention, evaluate, ssim, Codec, LinkCsi, NoiseDraw, PhaseMode, SemanticFrame, ToyImage,
};

use super::accounting::{semantic_throughput, ThroughputConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Jsce,
    SemanticTdma,
    SemanticNoma,
    JsceNoIrs,
    IndependentCodebook,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Jsce,
        Scheme::SemanticTdma,
        Scheme::SemanticNoma,
        Scheme::JsceNoIrs,
        Scheme::IndependentCodebook,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Jsce => "jsce",
            Scheme::SemanticTdma => "semantic-tdma",
            Scheme::SemanticNoma => "semantic-noma",
            Scheme::JsceNoIrs => "jsce-no-irs",
            Scheme::IndependentCodebook => "independent-codebook",
        }
    }

    /// Whether the scheme's codec runs without the reflecting surface.
    pub fn without_irs(self) -> bool {
        self == Scheme::JsceNoIrs
    }

    /// Slot-by-slot schedules. JSCE-family schemes reuse `concurrent`;
    /// TDMA serves one demand pair per slot round-robin; NOMA serves one
    /// transmitter and all its demand receivers per slot round-robin.
    pub fn schedules(self, demand: &DemandSet, concurrent: &[ScheduleMatrix], slots: usize) -> Result<Vec<ScheduleMatrix>> {
        let users = demand.users();
        match self {
            Scheme::Jsce | Scheme::JsceNoIrs | Scheme::IndependentCodebook => {
                if concurrent.len() != slots {
                    return Err(Error::invalid(format!(
                        "{} needs {slots} schedules, got {}",
                        self.label(),
                        concurrent.len()
                    )));
                }
                Ok(concurrent.to_vec())
            }
            Scheme::SemanticTdma => (0..slots)
                .map(|t| ScheduleMatrix::from_links(users, &[demand.pairs()[t % demand.len()]]))
                .collect(),
            Scheme::SemanticNoma => {
                let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
                for &(r, k) in demand.pairs() {
                    groups.entry(r).or_default().push((r, k));
                }
                let groups: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
                (0..slots)
                    .map(|t| ScheduleMatrix::from_links(users, &groups[t % groups.len()]))
                    .collect()
            }
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.label() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scheme `{s}`")))
    }
}

/// Greedy packing of demand pairs into `slots` half-duplex schedules. Slot
/// `t` offers the pairs starting from the `t`-th least served one.
pub fn concurrent_schedules(demand: &DemandSet, slots: usize) -> Result<Vec<ScheduleMatrix>> {
    let users = demand.users();
    let mut served = vec![0usize; demand.len()];
    let mut out = Vec::with_capacity(slots);
    for _ in 0..slots {
        let mut order: Vec<usize> = (0..demand.len()).collect();
        order.sort_by_key(|&i| (served[i], i));
        let mut links: Vec<(usize, usize)> = Vec::new();
        for i in order {
            let mut trial = links.clone();
            trial.push(demand.pairs()[i]);
            if ScheduleMatrix::from_links(users, &trial).is_ok() {
                links = trial;
                served[i] += 1;
            }
        }
        out.push(ScheduleMatrix::from_links(users, &links)?);
    }
    Ok(out)
}

/// Distinct nonempty schedules as link sets, in order of first use.
pub fn training_groups(schedules: &[ScheduleMatrix]) -> Result<Vec<LinkSet>> {
    let mut seen: Vec<&ScheduleMatrix> = Vec::new();
    for s in schedules {
        if !s.is_empty() && !seen.contains(&s) {
            seen.push(s);
        }
    }
    seen.into_iter().map(LinkSet::from_schedule).collect()
}

/// Trained codecs keyed by scheme.
#[derive(Clone, Debug, Default)]
pub struct CodecBank<T> {
    codecs: BTreeMap<Scheme, Codec<T>>,
}

impl<T: Real> CodecBank<T> {
    pub fn new() -> Self {
        Self { codecs: BTreeMap::new() }
    }

    pub fn insert(&mut self, scheme: Scheme, codec: Codec<T>) {
        self.codecs.insert(scheme, codec);
    }

    pub fn get(&self, scheme: Scheme) -> Result<&Codec<T>> {
        self.codecs
            .get(&scheme)
            .ok_or_else(|| Error::Untrained(scheme.label().to_string()))
    }

    pub fn schemes(&self) -> impl Iterator<Item = Scheme> + '_ {
        self.codecs.keys().copied()
    }
}

/// Everything a baseline evaluation shares across schemes.
pub struct BaselineInput<'a, T> {
    pub channel: &'a ChannelRealization<T>,
    pub demand: &'a DemandSet,
    pub slots: usize,
    /// Schedules of the JSCE-family schemes.
    pub concurrent: &'a [ScheduleMatrix],
    pub images: &'a [ToyImage<T>],
    pub throughput: ThroughputConfig,
    /// Noise seed; slot `t` uses stream `t`.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairThroughput {
    pub pair: (usize, usize),
    /// Slots in which the pair was scheduled.
    pub served: usize,
    /// Time-averaged similarity `(1/T)·Σ_t B_t·ξ_t`.
    pub similarity: f64,
    /// Mean SINR over served slots (0 when never served).
    pub sinr: f64,
    /// `Γ` of the time-averaged similarity.
    pub throughput: f64,
    /// `|h|` of the pair's channel under the scheme.
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThroughputReport {
    pub scheme: String,
    pub pairs: Vec<PairThroughput>,
    pub min_throughput: f64,
    pub mean_throughput: f64,
    pub min_similarity: f64,
    pub mean_similarity: f64,
    pub mean_gain: f64,
    pub parameter_count: usize,
}

impl ThroughputReport {
    fn new(scheme: Scheme, pairs: Vec<PairThroughput>, parameter_count: usize) -> Self {
        let n = pairs.len() as f64;
        let min = |f: fn(&PairThroughput) -> f64| pairs.iter().map(f).fold(f64::INFINITY, f64::min);
        let mean = |f: fn(&PairThroughput) -> f64| pairs.iter().map(f).sum::<f64>() / n;
        Self {
            scheme: scheme.label().to_string(),
            min_throughput: min(|p| p.throughput),
            mean_throughput: mean(|p| p.throughput),
            min_similarity: min(|p| p.similarity),
            mean_similarity: mean(|p| p.similarity),
            mean_gain: mean(|p| p.gain),
            parameter_count,
            pairs,
        }
    }
}

fn slot_rng(seed: u64, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot as u64);
    rng
}

/// Evaluates one scheme over `input.slots` slots with its trained codec.
/// IRS phases are quantized; every scheme sees the same realization, test
/// images and per-slot noise seeds.
pub fn run_baseline<T: Real>(scheme: Scheme, bank: &CodecBank<T>, input: &BaselineInput<'_, T>) -> Result<ThroughputReport> {
    input.throughput.validate()?;
    if input.slots == 0 || input.images.is_empty() {
        return Err(Error::invalid("baseline needs T ≥ 1 and test images"));
    }
    let codec = bank.get(scheme)?;
    let owned;
    let channel = if scheme.without_irs() {
        owned = input.channel.without_irs();
        &owned
    } else {
        input.channel
    };
    let schedules = scheme.schedules(input.demand, input.concurrent, input.slots)?;
    let users = input.demand.users();
    let phases = codec.irs_phases(PhaseMode::Quantized);
    let composite = if channel.irs_elements() > 0 {
        channel.composite_table(&phases)?
    } else {
        let mut t = PairTable::filled(users, Complex::new(T::zero(), T::zero()));
        for r in 0..users {
            for k in 0..users {
                if r != k {
                    t.set(r, k, channel.direct(r, k));
                }
            }
        }
        t
    };

    let mut sums: BTreeMap<(usize, usize), (usize, f64, f64)> =
        input.demand.pairs().iter().map(|&p| (p, (0, 0.0, 0.0))).collect();
    for (t, schedule) in schedules.iter().enumerate() {
        if schedule.is_empty() {
            continue;
        }
        let links = LinkSet::from_schedule(schedule)?;
        let mut rng = slot_rng(input.seed, t);
        let report = evaluate(codec, channel, &links, input.images, PhaseMode::Quantized, &mut rng)
            .map_err(|e| e.context(format!("{scheme}, slot {t}")))?;
        let similarity: Vec<f64> = if scheme == Scheme::SemanticNoma {
            let mut rng = slot_rng(input.seed, t);
            sic_similarity(codec, channel, &composite, &links, input.images, &mut rng)
                .map_err(|e| e.context(format!("{scheme}, slot {t}")))?
        } else {
            report.links.iter().map(|l| l.ssim).collect()
        };
        for (l, s) in report.links.iter().zip(similarity) {
            if let Some(acc) = sums.get_mut(&l.link) {
                acc.0 += 1;
                acc.1 += s;
                acc.2 += l.sinr;
            }
        }
    }

    let slots = input.slots as f64;
    let pairs = sums
        .into_iter()
        .map(|(pair, (served, s, g))| {
            let similarity = s / slots;
            Ok(PairThroughput {
                pair,
                served,
                similarity,
                sinr: if served > 0 { g / served as f64 } else { 0.0 },
                throughput: semantic_throughput(&input.throughput, similarity.clamp(-1.0, 1.0))?,
                gain: composite.get(pair.0, pair.1).norm().to_f64_lossy(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThroughputReport::new(scheme, pairs, codec.scalar_count()))
}

/// Attention-weighted semantic component the transmitter would send for `image` on `link`.
fn reencode<T: Real>(codec: &Codec<T>, image: &ToyImage<T>, link: (usize, usize), h: Complex<T>) -> Result<SemanticFrame<T>> {
    let s = codec.encode_semantic(image, link)?;
    let a = codec.channel_attention(&s, &codec.csi_embedding(h)?)?;
    apply_attention(&s, &a)
}

/// Mean SSIM per link with successive interference cancellation at each
/// receiver: same-transmitter components are decoded strongest-link first,
/// re-encoded and subtracted before the receiver decodes its own.
///
/// The transmit normalisation is estimated from the re-encoded components,
/// and images are assigned to links exactly as in [`evaluate`].
fn sic_similarity<T: Real>(
    codec: &Codec<T>,
    channel: &ChannelRealization<T>,
    composite: &PairTable<Complex<T>>,
    links: &LinkSet,
    images: &[ToyImage<T>],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let m = images.len();
    let p = links.len();
    let l = codec.config().symbols;
    let stride = (m / p).max(1);
    let sqrt_p = channel.transmit_power.sqrt();
    let noise_power = channel.noise_power.to_f64_lossy();
    let noise = (noise_power > 0.0).then(|| NoiseDraw::<T>::sample(&links.receivers(), m, l, noise_power, rng));
    let csi = |link: (usize, usize), h: Complex<T>, embed: Complex<T>| LinkCsi {
        link,
        h,
        embed,
        noise_power: channel.noise_power,
        transmit_power: channel.transmit_power,
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![0.0; p];
    for b in 0..m {
        let source = |j: usize| &images[(b + j * stride) % m];
        // transmitted frames, normalised per transmitter
        let comps: Vec<SemanticFrame<T>> = links
            .links()
            .iter()
            .enumerate()
            .map(|(j, &(r, k))| reencode(codec, source(j), (r, k), *composite.get(r, k)))
            .collect::<Result<_>>()?;
        let mut sent: BTreeMap<usize, Vec<Complex<T>>> = BTreeMap::new();
        for (j, &(r, _)) in links.links().iter().enumerate() {
            let s = sent.entry(r).or_insert_with(|| vec![zero; l]);
            s.iter_mut().zip(comps[j].symbols()).for_each(|(a, &c)| *a = *a + c);
        }
        let sent: BTreeMap<usize, SemanticFrame<T>> = sent
            .into_iter()
            .map(|(r, s)| Ok((r, SemanticFrame::new(s).normalized()?)))
            .collect::<Result<_>>()?;

        for (j, &(r, k)) in links.links().iter().enumerate() {
            let mut y = vec![zero; l];
            for tx in links.transmitters_to(k) {
                let h = *composite.get(tx, k) * sqrt_p;
                y.iter_mut().zip(sent[&tx].symbols()).for_each(|(a, &s)| *a = *a + h * s);
            }
            if let Some(n) = &noise {
                let (nr, ni) = &n.per_receiver[&k];
                for (i, a) in y.iter_mut().enumerate() {
                    *a = *a + Complex::new(nr[b * l + i], ni[b * l + i]);
                }
            }
            let h_rk = *composite.get(r, k);
            let mut others: Vec<(usize, usize)> = links.receivers_of(r).into_iter().filter(|&d| d != k).map(|d| (r, d)).collect();
            others.sort_by(|a, b| {
                composite
                    .get(b.0, b.1)
                    .norm_sqr()
                    .partial_cmp(&composite.get(a.0, a.1).norm_sqr())
                    .expect("finite gains")
                    .then(a.cmp(b))
            });
            if !others.is_empty() {
                let received = SemanticFrame::new(y.clone());
                let mut estimates: Vec<SemanticFrame<T>> = Vec::new();
                for &(tx, d) in others.iter().chain(std::iter::once(&(r, k))) {
                    let h_d = *composite.get(tx, d);
                    let w = codec.decode(&received, &csi((tx, d), h_rk, h_d))?;
                    estimates.push(reencode(codec, &w, (tx, d), h_d)?);
                }
                let mut total = vec![zero; l];
                for e in &estimates {
                    total.iter_mut().zip(e.symbols()).for_each(|(a, &c)| *a = *a + c);
                }
                let power = SemanticFrame::new(total).mean_power();
                let inv_norm = if power > T::zero() { T::one() / power.sqrt() } else { T::zero() };
                for &(tx, d) in &others {
                    let h_d = *composite.get(tx, d);
                    let w = codec.decode(&SemanticFrame::new(y.clone()), &csi((tx, d), h_rk, h_d))?;
                    let e = reencode(codec, &w, (tx, d), h_d)?;
                    let h = h_rk * sqrt_p * inv_norm;
                    y.iter_mut().zip(e.symbols()).for_each(|(a, &c)| *a = *a - h * c);
                }
            }
            let w = codec.decode(&SemanticFrame::new(y), &csi((r, k), h_rk, h_rk))?;
            out[j] += ssim(source(j), &w)?.to_f64_lossy();
        }
    }
    Ok(out.into_iter().map(|s| s / m as f64).collect())
}
