use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::channel::{ChannelRealization, PairTable};
use crate::error::{Error, Result};
use crate::scheduler::{
    train_scheduler, DdpgNets, LinkSet, ScheduleMatrix, SchedulerRun, SlotEvaluator, SlotOutcome,
};
use crate::semantic::{evaluate, train_e2e, train_e2e_groups, Codec, CodecVariant, PhaseMode, ToyImage, TrainConfig};
use crate::throughput::{SimilaritySurrogate, SurrogateEvaluator};

use super::config::{Config, EvaluatorSetting};

/// Random streams of one seeded run; each consumer owns its stream.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Stream {
    Channel = 0,
    Data = 1,
    Init = 2,
    Pretrain = 3,
    Inner = 4,
    Eval = 5,
    Scheduler = 6,
    Sweep = 7,
    Baseline = 8,
}

pub(crate) fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

/// Channel realization and image sets of one seed.
#[derive(Clone, Debug)]
pub struct Workload {
    pub channel: ChannelRealization<f64>,
    pub train: Vec<ToyImage<f64>>,
    pub test: Vec<ToyImage<f64>>,
}

impl Workload {
    pub fn draw(cfg: &Config, seed: u64) -> Result<Self> {
        Self::draw_with(cfg, seed, cfg.scenario.irs_rows, cfg.scenario.irs_cols)
    }

    /// Same seed streams with a `rows × cols` surface.
    pub fn draw_with(cfg: &Config, seed: u64, rows: usize, cols: usize) -> Result<Self> {
        let channel = ChannelRealization::generate(&cfg.channel_config_with(rows, cols)?, &mut stream(seed, Stream::Channel))?;
        let mut data = stream(seed, Stream::Data);
        let side = cfg.scenario.image_side;
        let train = ToyImage::dataset(cfg.scenario.train_images, side, &mut data);
        let test = ToyImage::dataset(cfg.scenario.test_images, side, &mut data);
        Ok(Self { channel, train, test })
    }
}

/// Fresh shared codec for `seed`, sized to `irs_elements`.
pub fn init_codec(cfg: &Config, seed: u64, irs_elements: usize) -> Result<Codec<f64>> {
    Codec::new(cfg.codec_config(CodecVariant::Shared, irs_elements), &[], &mut stream(seed, Stream::Init))
}

/// All-pairs training of the shared codec (IRS included), the warm start
/// of every per-schedule refinement. Every ordered pair is simulated as its
/// own link in each step. Returns the codec and its loss trace.
pub fn pretrain(cfg: &Config, seed: u64, work: &Workload) -> Result<(Codec<f64>, Vec<f64>)> {
    let mut codec = init_codec(cfg, seed, work.channel.irs_elements())?;
    let users = cfg.users();
    let groups = LinkSet::all_pairs(users)?
        .links()
        .iter()
        .map(|&l| LinkSet::new(users, &[l]))
        .collect::<Result<Vec<_>>>()?;
    let report = train_e2e_groups(
        &mut codec,
        &work.channel,
        &groups,
        &work.train,
        &cfg.train_config(cfg.codec.pretrain_epochs),
        &mut stream(seed, Stream::Pretrain),
    )
    .map_err(|e| e.context("pretraining"))?;
    Ok((codec, report.loss_trace))
}

/// Two-stage refinement on `links` from a warm start: continuous phases with
/// a trainable surface, then quantized phases with the surface frozen.
pub fn refine(
    cfg: &Config,
    codec: &mut Codec<f64>,
    channel: &ChannelRealization<f64>,
    links: &LinkSet,
    train: &[ToyImage<f64>],
    irs_epochs: usize,
    finetune_epochs: usize,
    train_irs: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let mut trace = Vec::new();
    if irs_epochs > 0 {
        let tc = TrainConfig {
            train_irs,
            ..cfg.train_config(irs_epochs)
        };
        trace.extend(train_e2e(codec, channel, links, train, &tc, rng)?.loss_trace);
    }
    if finetune_epochs > 0 {
        let tc = TrainConfig {
            train_irs: false,
            phase_mode: PhaseMode::Quantized,
            ..cfg.train_config(finetune_epochs)
        };
        trace.extend(train_e2e(codec, channel, links, train, &tc, rng)?.loss_trace);
    }
    Ok(trace)
}

/// Scores a schedule by refining a copy of the warm-start codec on the
/// scheduled links and measuring quantized-phase test metrics. Results are
/// cached per schedule; each schedule's randomness derives from its bits.
pub struct CodecEvaluator<'a> {
    cfg: &'a Config,
    base: &'a Codec<f64>,
    work: &'a Workload,
    seed: u64,
    cache: HashMap<Vec<bool>, SlotOutcome>,
}

impl<'a> CodecEvaluator<'a> {
    pub fn new(cfg: &'a Config, base: &'a Codec<f64>, work: &'a Workload, seed: u64) -> Self {
        Self {
            cfg,
            base,
            work,
            seed,
            cache: HashMap::new(),
        }
    }

    fn schedule_rng(&self, schedule: &ScheduleMatrix) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(schedule.bits().iter().map(|&b| b as u8).collect::<Vec<_>>());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(Stream::Inner as u64);
        rng
    }
}

impl SlotEvaluator for CodecEvaluator<'_> {
    fn users(&self) -> usize {
        self.work.channel.users()
    }

    fn evaluate(&mut self, schedule: &ScheduleMatrix) -> Result<SlotOutcome> {
        if let Some(hit) = self.cache.get(schedule.bits()) {
            return Ok(hit.clone());
        }
        let users = self.users();
        let mut similarity = PairTable::filled(users, 0.0);
        let mut sinr = PairTable::filled(users, 0.0);
        if !schedule.is_empty() {
            let links = LinkSet::from_schedule(schedule)?;
            let mut codec = self.base.clone();
            let mut rng = self.schedule_rng(schedule);
            refine(
                self.cfg,
                &mut codec,
                &self.work.channel,
                &links,
                &self.work.train,
                self.cfg.codec.inner_epochs,
                0,
                true,
                &mut rng,
            )?;
            let report = evaluate(&codec, &self.work.channel, &links, &self.work.test, PhaseMode::Quantized, &mut rng)?;
            for l in &report.links {
                similarity.set(l.link.0, l.link.1, l.ssim);
                sinr.set(l.link.0, l.link.1, l.sinr);
            }
        }
        let outcome = SlotOutcome { similarity, sinr };
        self.cache.insert(schedule.bits().to_vec(), outcome.clone());
        Ok(outcome)
    }
}

/// Composite channel of every ordered pair under the codec's quantized phases.
pub fn quantized_composite(codec: &Codec<f64>, channel: &ChannelRealization<f64>) -> Result<PairTable<Complex<f64>>> {
    if channel.irs_elements() > 0 {
        return channel.composite_table(&codec.irs_phases(PhaseMode::Quantized));
    }
    let users = channel.users();
    let mut t = PairTable::filled(users, Complex::new(0.0, 0.0));
    for r in 0..users {
        for k in 0..users {
            if r != k {
                t.set(r, k, channel.direct(r, k));
            }
        }
    }
    Ok(t)
}

/// `(γ, ξ)` samples for fitting the similarity surrogate. Every schedule of
/// at most `max_links` links is scored by its equal-split SINR and by the
/// quantized-phase SSIM of `codec` on the first `images` test images; the
/// samples are sorted by `γ` and averaged over `bins` consecutive groups.
pub fn calibration_samples(
    cfg: &Config,
    seed: u64,
    work: &Workload,
    codec: &Codec<f64>,
    max_links: usize,
    images: usize,
    bins: usize,
) -> Result<Vec<(f64, f64)>> {
    if bins == 0 || images == 0 {
        return Err(Error::invalid("calibration needs at least one bin and one image"));
    }
    let test = &work.test[..images.min(work.test.len())];
    let mut probe = SurrogateEvaluator::new(
        quantized_composite(codec, &work.channel)?,
        work.channel.noise_power,
        work.channel.transmit_power,
        cfg.scenario.symbols,
        SimilaritySurrogate::from_knots(vec![(0.0, 0.0)])?,
    );
    let mut rng = stream(seed, Stream::Eval);
    let mut samples = Vec::new();
    for schedule in ScheduleMatrix::enumerate(cfg.users())? {
        let n = schedule.link_count();
        if n == 0 || n > max_links {
            continue;
        }
        let gamma = probe.evaluate(&schedule)?.sinr;
        let report = evaluate(codec, &work.channel, &LinkSet::from_schedule(&schedule)?, test, PhaseMode::Quantized, &mut rng)?;
        samples.extend(report.links.iter().map(|l| (*gamma.get(l.link.0, l.link.1), l.ssim)));
    }
    check_nonempty(&samples, "calibration sample set")?;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let per = samples.len().div_ceil(bins);
    Ok(samples
        .chunks(per)
        .map(|c| {
            let n = c.len() as f64;
            (c.iter().map(|s| s.0).sum::<f64>() / n, c.iter().map(|s| s.1).sum::<f64>() / n)
        })
        .collect())
}

/// Outcome of one scheduling run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub config_hash: String,
    /// Final-slot reward per episode.
    pub reward_trace: Vec<f64>,
    /// Greedy schedules of the trained actor.
    pub schedules: Vec<ScheduleMatrix>,
    pub objective: f64,
    pub best_schedules: Vec<ScheduleMatrix>,
    pub best_objective: f64,
    /// Not part of [`hash`](Self::hash).
    pub wall_clock: f64,
}

impl RunRecord {
    /// Hex SHA-256 over every field except the wall-clock time.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config_hash.as_bytes());
        h.update(self.seed.to_le_bytes());
        for r in &self.reward_trace {
            h.update(r.to_bits().to_le_bytes());
        }
        for s in self.schedules.iter().chain(&self.best_schedules) {
            h.update(s.to_string().as_bytes());
            h.update(b";");
        }
        h.update(self.objective.to_bits().to_le_bytes());
        h.update(self.best_objective.to_bits().to_le_bytes());
        hex::encode(h.finalize())
    }
}

/// Outer DDPG scheduling loop over a pretrained codec.
///
/// With the surrogate evaluator slots are scored from the SINR of the
/// codec's quantized surface; with the codec evaluator every new schedule
/// triggers `inner_epochs` of warm-started backpropagation on its links.
pub fn run_xddrl(cfg: &Config, seed: u64, work: &Workload, pretrained: &Codec<f64>) -> Result<RunRecord> {
    let start = Instant::now();
    let demand = cfg.demand()?;
    let users = cfg.users();
    let mut nets = DdpgNets::<f64>::new(users + 1, users * users, cfg.ddpg_config(), &mut stream(seed, Stream::Init))?;
    let episodes = cfg.episode_config();
    let mut rng = stream(seed, Stream::Scheduler);
    let run: SchedulerRun = match cfg.ddpg.evaluator {
        EvaluatorSetting::Surrogate => {
            let mut ev = SurrogateEvaluator::new(
                quantized_composite(pretrained, &work.channel)?,
                work.channel.noise_power,
                work.channel.transmit_power,
                cfg.scenario.symbols,
                SimilaritySurrogate::calibrated(),
            );
            train_scheduler(&mut nets, &mut ev, &demand, &episodes, &mut rng)?
        }
        EvaluatorSetting::Codec => {
            let mut ev = CodecEvaluator::new(cfg, pretrained, work, seed);
            train_scheduler(&mut nets, &mut ev, &demand, &episodes, &mut rng)?
        }
    };
    Ok(RunRecord {
        seed,
        config_hash: cfg.hash(),
        reward_trace: run.reward_trace,
        schedules: run.schedules,
        objective: run.objective,
        best_schedules: run.best_schedules,
        best_objective: run.best_objective,
        wall_clock: start.elapsed().as_secs_f64(),
    })
}

/// Runs `f` once per seed on a worker pool and returns results sorted by seed.
pub fn for_seeds<R, F>(seeds: &[u64], f: F) -> Result<Vec<(u64, R)>>
where
    R: Send,
    F: Fn(u64) -> Result<R> + Sync,
{
    use rayon::prelude::*;
    let mut out: Vec<(u64, R)> = seeds
        .par_iter()
        .map(|&s| f(s).map(|r| (s, r)).map_err(|e| e.context(format!("seed {s}"))))
        .collect::<Result<_>>()?;
    out.sort_by_key(|(s, _)| *s);
    Ok(out)
}

pub(crate) fn check_nonempty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(format!("{what} is empty")));
    }
    Ok(())
}
