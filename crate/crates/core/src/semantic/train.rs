use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::autodiff::{Adam, Optimizer, Tape};
use crate::channel::{sinr, ChannelRealization, PairTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::{LinkSet, ScheduleMatrix};

use super::codec::{Codec, ForwardInput, ForwardOutput, NoiseDraw, PhaseMode, IRS_PARAM};
use super::image::ToyImage;
use super::metrics::{mse_values, psnr_from_mse, ssim_values};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Rate for the IRS parameters.
    pub irs_learning_rate: f64,
    pub train_irs: bool,
    pub phase_mode: PhaseMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            irs_learning_rate: 2e-2,
            train_irs: true,
            phase_mode: PhaseMode::Continuous,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean minibatch loss per epoch.
    pub loss_trace: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.loss_trace.last().copied()
    }
}

fn gather<T: Real>(images: &[ToyImage<T>], idx: &[usize]) -> Vec<T> {
    idx.iter().flat_map(|&i| images[i].pixels().iter().copied()).collect()
}

/// Self-supervised end-to-end training of `codec` (including `irs.p` when
/// `cfg.train_irs`) on the links of `links`. Every link draws its own
/// permutation of `images` each epoch; channel noise is resampled per step.
///
/// For a warm start pass a clone of a pretrained codec.
pub fn train_e2e<T: Real, R: Rng + ?Sized>(
    codec: &mut Codec<T>,
    channel: &ChannelRealization<T>,
    links: &LinkSet,
    images: &[ToyImage<T>],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    train_e2e_groups(codec, channel, std::slice::from_ref(links), images, cfg, rng)
}

/// Like [`train_e2e`], for several link sets that never share a slot (one
/// per distinct schedule). Each step simulates every group separately and
/// descends the mean of the group losses.
pub fn train_e2e_groups<T: Real, R: Rng + ?Sized>(
    codec: &mut Codec<T>,
    channel: &ChannelRealization<T>,
    groups: &[LinkSet],
    images: &[ToyImage<T>],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    if images.is_empty() {
        return Err(Error::invalid("training needs at least one image"));
    }
    if groups.is_empty() || groups.iter().any(LinkSet::is_empty) {
        return Err(Error::invalid("training needs at least one link"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    if !(cfg.learning_rate >= 0.0) || !(cfg.irs_learning_rate >= 0.0) {
        return Err(Error::invalid("learning rate must be nonnegative"));
    }
    codec.set_irs_trainable(cfg.train_irs)?;
    let mut opt = Adam::new(T::lit(cfg.learning_rate)).with_parameter_rate(IRS_PARAM, T::lit(cfg.irs_learning_rate));
    let m = images.len();
    let steps = m.div_ceil(cfg.batch_size);
    let symbols = codec.config().symbols;
    let noise_power = channel.noise_power.to_f64_lossy();
    let group_scale = T::one() / T::from_usize_lossy(groups.len());
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let perms: Vec<Vec<Vec<usize>>> = groups
            .iter()
            .map(|g| {
                (0..g.len())
                    .map(|_| {
                        let mut p: Vec<usize> = (0..m).collect();
                        p.shuffle(rng);
                        p
                    })
                    .collect()
            })
            .collect();
        let mut total = 0.0;
        for step in 0..steps {
            let lo = step * cfg.batch_size;
            let hi = (lo + cfg.batch_size).min(m);
            let batch = hi - lo;
            let mut tape = Tape::new();
            let binding = codec.params().bind(&mut tape);
            let mut loss = None;
            for (links, perms) in groups.iter().zip(&perms) {
                let xs: Vec<Vec<T>> = perms.iter().map(|p| gather(images, &p[lo..hi])).collect();
                let noise =
                    (noise_power > 0.0).then(|| NoiseDraw::sample(&links.receivers(), batch, symbols, noise_power, rng));
                let out = codec.forward(
                    &mut tape,
                    &binding,
                    &ForwardInput {
                        channel,
                        links,
                        batch,
                        images: &xs,
                        noise: noise.as_ref(),
                        phase_mode: cfg.phase_mode,
                    },
                )?;
                loss = Some(match loss {
                    None => out.loss,
                    Some(acc) => tape.add(acc, out.loss)?,
                });
            }
            let loss = loss.expect("at least one group");
            let loss = if groups.len() > 1 { tape.scale(loss, group_scale) } else { loss };
            let value = tape.item(loss).to_f64_lossy();
            if !value.is_finite() {
                trace.push(value);
                return Err(Error::Diverged { epoch, trace });
            }
            total += value;
            let grads = tape.backward(loss)?;
            codec.params_mut().accumulate(&binding, &grads)?;
            opt.step(codec.params_mut())?;
        }
        trace.push(total / steps as f64);
    }
    Ok(TrainReport { loss_trace: trace })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkMetrics {
    pub link: (usize, usize),
    pub ssim: f64,
    pub psnr: f64,
    pub mse: f64,
    /// Mean SINR over the evaluated images (NaN when the links are not a
    /// valid schedule).
    pub sinr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub links: Vec<LinkMetrics>,
}

impl EvalReport {
    pub fn mean_ssim(&self) -> f64 {
        self.links.iter().map(|l| l.ssim).sum::<f64>() / self.links.len() as f64
    }

    pub fn min_ssim(&self) -> f64 {
        self.links.iter().map(|l| l.ssim).fold(f64::INFINITY, f64::min)
    }

    pub fn mean_mse(&self) -> f64 {
        self.links.iter().map(|l| l.mse).sum::<f64>() / self.links.len() as f64
    }

    pub fn mean_psnr(&self) -> f64 {
        psnr_from_mse(self.mean_mse())
    }

    pub fn get(&self, link: (usize, usize)) -> Option<&LinkMetrics> {
        self.links.iter().find(|l| l.link == link)
    }
}

/// Test-set metrics per link. Link `j` sees the images rotated by
/// `j·⌊M/P⌋`, so concurrent links carry different content.
pub fn evaluate<T: Real, R: Rng + ?Sized>(
    codec: &Codec<T>,
    channel: &ChannelRealization<T>,
    links: &LinkSet,
    images: &[ToyImage<T>],
    mode: PhaseMode,
    rng: &mut R,
) -> Result<EvalReport> {
    if images.is_empty() || links.is_empty() {
        return Err(Error::invalid("evaluation needs images and links"));
    }
    let m = images.len();
    let p = links.len();
    let stride = (m / p).max(1);
    let idx: Vec<Vec<usize>> = (0..p).map(|j| (0..m).map(|b| (b + j * stride) % m).collect()).collect();
    let xs: Vec<Vec<T>> = idx.iter().map(|i| gather(images, i)).collect();
    let noise_power = channel.noise_power.to_f64_lossy();
    let noise = (noise_power > 0.0)
        .then(|| NoiseDraw::sample(&links.receivers(), m, codec.config().symbols, noise_power, rng));
    let mut tape = Tape::new();
    let binding = codec.params().bind(&mut tape);
    let out = codec.forward(
        &mut tape,
        &binding,
        &ForwardInput {
            channel,
            links,
            batch: m,
            images: &xs,
            noise: noise.as_ref(),
            phase_mode: mode,
        },
    )?;
    let px = codec.config().pixels();
    let sinr_sum = mean_sinr(codec, &tape, &out, channel, links, m)?;
    let mut report = Vec::with_capacity(p);
    for (j, &link) in links.links().iter().enumerate() {
        let recon = tape.value(out.recon[j]);
        let (mut s, mut e) = (0.0, 0.0);
        for (b, &i) in idx[j].iter().enumerate() {
            let w = images[i].pixels();
            let w_hat: Vec<T> = recon[b * px..(b + 1) * px].iter().map(|&v| v.max(T::zero()).min(T::one())).collect();
            s += ssim_values(w, &w_hat).to_f64_lossy();
            e += mse_values(w, &w_hat).to_f64_lossy();
        }
        let mse = e / m as f64;
        report.push(LinkMetrics {
            link,
            ssim: s / m as f64,
            psnr: psnr_from_mse(mse),
            mse,
            sinr: sinr_sum[j],
        });
    }
    Ok(EvalReport { links: report })
}

/// Per-link SINR of a forward pass, averaged over the batch rows.
fn mean_sinr<T: Real>(
    codec: &Codec<T>,
    tape: &Tape<T>,
    out: &ForwardOutput,
    channel: &ChannelRealization<T>,
    links: &LinkSet,
    batch: usize,
) -> Result<Vec<f64>> {
    let Ok(schedule) = ScheduleMatrix::from_links(links.users(), links.links()) else {
        return Ok(vec![f64::NAN; links.len()]);
    };
    let mut composite = PairTable::filled(links.users(), Complex::new(T::zero(), T::zero()));
    for (&(r, k), &(hr, hi)) in links.links().iter().zip(&out.channel) {
        composite.set(r, k, Complex::new(tape.item(hr), tape.item(hi)));
    }
    let mut acc = vec![0.0; links.len()];
    for row in 0..batch {
        let frames = codec.frames_from(tape, out, links, row)?;
        let table = sinr(&schedule, &composite, &frames, channel.noise_power, channel.transmit_power)?;
        for (a, &(r, k)) in acc.iter_mut().zip(links.links()) {
            *a += table.get(r, k)?.to_f64_lossy();
        }
    }
    Ok(acc.into_iter().map(|a| a / batch as f64).collect())
}
