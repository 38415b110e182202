//! The joint source-channel codec and its differentiable link simulation.
//!
//! One [`Codec`] holds every trainable tensor: encoder, encoder-side channel
//! attention, decoder-side attention, decoder, and the raw IRS parameters
//! `irs.p`. The surface is part of the network: the composite channel of
//! every link is computed on the tape from `irs.p`, so the phases train by
//! backpropagation together with the codec weights.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::autodiff::nn::{Activation, Mlp};
use crate::autodiff::{Binding, ParameterSet, Tape, Tensor, Var};
use crate::channel::{irs_phase_activation, ChannelRealization, IrsPhaseVector, TransmitFrames};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::LinkSet;

use super::embed::{c2v_embed, c2v_embed_on_tape, CsiEmbedding};
use super::frame::{AttentionVector, SemanticFrame, Superposition};
use super::image::ToyImage;

pub const IRS_PARAM: &str = "irs.p";

/// Keeps the power normalisation finite for an all-zero frame.
const POWER_FLOOR: f64 = 1e-24;

/// Shared codec (one parameter set for every link, CSI fused through
/// attention) or independent per-pair codebooks without CSI fusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodecVariant {
    Shared,
    Independent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodecConfig {
    pub image_side: usize,
    /// Complex symbols per frame (`L`).
    pub symbols: usize,
    pub hidden: usize,
    pub attention_hidden: usize,
    /// IRS elements; 0 removes the surface from the network.
    pub irs_elements: usize,
    pub variant: CodecVariant,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            image_side: 16,
            symbols: 128,
            hidden: 256,
            attention_hidden: 128,
            irs_elements: 0,
            variant: CodecVariant::Shared,
        }
    }
}

impl CodecConfig {
    pub fn pixels(&self) -> usize {
        self.image_side * self.image_side
    }
}

/// How IRS phases enter the channel: continuous activation of `irs.p`
/// (differentiable) or its 1-bit quantization (constant).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMode {
    Continuous,
    Quantized,
}

/// Receiver-side knowledge for decoding one link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkCsi<T> {
    pub link: (usize, usize),
    /// Composite channel used for equalisation.
    pub h: Complex<T>,
    /// Channel value fed to the CSI embedding; normally equal to `h`.
    pub embed: Complex<T>,
    pub noise_power: T,
    pub transmit_power: T,
}

impl<T: Real> LinkCsi<T> {
    pub fn new(link: (usize, usize), h: Complex<T>, noise_power: T, transmit_power: T) -> Self {
        Self {
            link,
            h,
            embed: h,
            noise_power,
            transmit_power,
        }
    }
}

/// Complex Gaussian noise planes per receiver, each `batch × L`.
#[derive(Clone, Debug, Default)]
pub struct NoiseDraw<T> {
    pub per_receiver: BTreeMap<usize, (Vec<T>, Vec<T>)>,
}

impl<T: Real> NoiseDraw<T> {
    /// Total variance `noise_power` per complex symbol.
    pub fn sample<R: Rng + ?Sized>(receivers: &[usize], batch: usize, symbols: usize, noise_power: f64, rng: &mut R) -> Self {
        let s = (noise_power / 2.0).sqrt();
        let mut draw = |n: usize| -> Vec<T> {
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    T::lit(z * s)
                })
                .collect()
        };
        let per_receiver = receivers
            .iter()
            .map(|&k| (k, (draw(batch * symbols), draw(batch * symbols))))
            .collect();
        Self { per_receiver }
    }
}

/// Inputs of one batched forward pass.
pub struct ForwardInput<'a, T> {
    pub channel: &'a ChannelRealization<T>,
    pub links: &'a LinkSet,
    pub batch: usize,
    /// Per link (in `links` order): `batch × pixels` row-major images.
    pub images: &'a [Vec<T>],
    pub noise: Option<&'a NoiseDraw<T>>,
    pub phase_mode: PhaseMode,
}

/// Handles into the recorded graph.
pub struct ForwardOutput {
    pub loss: Var,
    /// Reconstructions per link, `batch × pixels`.
    pub recon: Vec<Var>,
    /// Composite channel `(re, im)` per link, each `[1, 1]`.
    pub channel: Vec<(Var, Var)>,
    /// Attention-weighted, unnormalised components per link.
    pub components: Vec<(Var, Var)>,
    /// Per transmitter: normalised frame planes and the `[batch, 1]` norm.
    pub transmitted: BTreeMap<usize, (Var, Var, Var)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Codec<T> {
    cfg: CodecConfig,
    params: ParameterSet<T>,
    /// Pairs owning a private codebook (independent variant only).
    pairs: Vec<(usize, usize)>,
}

fn pair_tag(link: (usize, usize)) -> String {
    format!("pair{}_{}", link.0, link.1)
}

impl<T: Real> Codec<T> {
    /// Fresh randomly initialised codec. `pairs` is only used by the
    /// independent variant, which allocates one encoder/decoder per pair.
    pub fn new<R: Rng + ?Sized>(cfg: CodecConfig, pairs: &[(usize, usize)], rng: &mut R) -> Result<Self> {
        if cfg.symbols == 0 || !cfg.symbols.is_multiple_of(4) {
            return Err(Error::invalid("symbol count must be a positive multiple of 4"));
        }
        if cfg.image_side == 0 || cfg.hidden == 0 || cfg.attention_hidden == 0 {
            return Err(Error::invalid("codec sizes must be positive"));
        }
        let mut codec = Self {
            pairs: match cfg.variant {
                CodecVariant::Shared => Vec::new(),
                CodecVariant::Independent => {
                    if pairs.is_empty() {
                        return Err(Error::invalid("independent codebooks need at least one pair"));
                    }
                    pairs.to_vec()
                }
            },
            cfg,
            params: ParameterSet::new(),
        };
        let mut params = ParameterSet::new();
        match codec.cfg.variant {
            CodecVariant::Shared => {
                codec.encoder_mlp(None).init(&mut params, rng)?;
                codec.attention_mlp("enc_att").init(&mut params, rng)?;
                codec.attention_mlp("dec_att").init(&mut params, rng)?;
                codec.decoder_mlp(None).init(&mut params, rng)?;
            }
            CodecVariant::Independent => {
                for &p in &codec.pairs {
                    codec.encoder_mlp(Some(p)).init(&mut params, rng)?;
                    codec.decoder_mlp(Some(p)).init(&mut params, rng)?;
                }
            }
        }
        if codec.cfg.irs_elements > 0 {
            let raw = (0..codec.cfg.irs_elements)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    T::lit(z)
                })
                .collect();
            params.insert(IRS_PARAM, Tensor::row(raw))?;
        }
        codec.params = params;
        Ok(codec)
    }

    /// Wraps a loaded parameter set, checking that it matches `cfg`.
    pub fn from_params(cfg: CodecConfig, pairs: &[(usize, usize)], params: ParameterSet<T>) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let template = Self::new(cfg, pairs, &mut rng)?;
        if template.params.names() != params.names() {
            return Err(Error::invalid("parameter names do not match the codec layout"));
        }
        for ((n, a), (_, b)) in template.params.iter().zip(params.iter()) {
            if a.shape() != b.shape() {
                return Err(Error::Shape {
                    op: "codec parameters",
                    lhs: a.shape().to_vec(),
                    rhs: b.shape().to_vec(),
                }
                .context(n.to_string()));
            }
        }
        Ok(Self {
            cfg: template.cfg,
            params,
            pairs: template.pairs,
        })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParameterSet<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterSet<T> {
        &mut self.params
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn scalar_count(&self) -> usize {
        self.params.scalar_count()
    }

    /// Names of parameters that belong to one specific user pair.
    pub fn per_pair_parameters(&self) -> Vec<String> {
        self.params
            .names()
            .iter()
            .filter(|n| n.starts_with("pair"))
            .cloned()
            .collect()
    }

    pub fn set_irs_trainable(&mut self, trainable: bool) -> Result<()> {
        if self.params.contains(IRS_PARAM) {
            if trainable {
                self.params.unfreeze(IRS_PARAM)?;
            } else {
                self.params.freeze(IRS_PARAM)?;
            }
        }
        Ok(())
    }

    /// Current surface configuration under `mode`.
    pub fn irs_phases(&self, mode: PhaseMode) -> IrsPhaseVector<T> {
        match self.params.get(IRS_PARAM) {
            Ok(p) => {
                let v = irs_phase_activation(p.values());
                match mode {
                    PhaseMode::Continuous => v,
                    PhaseMode::Quantized => v.quantize(),
                }
            }
            Err(_) => IrsPhaseVector::zeros(0),
        }
    }

    fn encoder_mlp(&self, pair: Option<(usize, usize)>) -> Mlp {
        let prefix = match pair {
            Some(p) => format!("{}.enc", pair_tag(p)),
            None => "enc".to_string(),
        };
        let h = self.cfg.hidden;
        Mlp::new(prefix, &[self.cfg.pixels(), h, h, 2 * self.cfg.symbols], Activation::Relu, Activation::Identity)
    }

    fn decoder_mlp(&self, pair: Option<(usize, usize)>) -> Mlp {
        let prefix = match pair {
            Some(p) => format!("{}.dec", pair_tag(p)),
            None => "dec".to_string(),
        };
        let h = self.cfg.hidden;
        Mlp::new(prefix, &[2 * self.cfg.symbols, h, h, self.cfg.pixels()], Activation::Relu, Activation::Sigmoid)
    }

    fn attention_mlp(&self, prefix: &str) -> Mlp {
        let l = self.cfg.symbols;
        Mlp::new(prefix, &[l, self.cfg.attention_hidden, l], Activation::Tanh, Activation::Identity)
    }

    fn owner(&self, link: (usize, usize)) -> Result<Option<(usize, usize)>> {
        match self.cfg.variant {
            CodecVariant::Shared => Ok(None),
            CodecVariant::Independent => {
                if self.pairs.contains(&link) {
                    Ok(Some(link))
                } else {
                    Err(Error::invalid(format!("no codebook for pair {link:?}")))
                }
            }
        }
    }

    fn check_pixels(&self, len: usize, batch: usize) -> Result<()> {
        if len != batch * self.cfg.pixels() {
            return Err(Error::Shape {
                op: "encoder input",
                lhs: vec![batch, self.cfg.pixels()],
                rhs: vec![len],
            });
        }
        Ok(())
    }

    /// Encoder: images `[B, pixels]` → frame planes `([B, L], [B, L])`.
    fn encoder_graph(&self, tape: &mut Tape<T>, b: &Binding, link: (usize, usize), x: Var) -> Result<(Var, Var)> {
        let f = self.encoder_mlp(self.owner(link)?).forward(tape, b, x)?;
        let l = self.cfg.symbols;
        Ok((tape.slice_last(f, 0, l)?, tape.slice_last(f, l, l)?))
    }

    /// `softmax(MLP(channel-wise mean of the frame + e))`.
    fn attention_graph(&self, tape: &mut Tape<T>, b: &Binding, prefix: &str, re: Var, im: Var, e: Var) -> Result<Var> {
        let sum = tape.add(re, im)?;
        let mean = tape.scale(sum, T::lit(0.5));
        let u = tape.add(mean, e)?;
        let logits = self.attention_mlp(prefix).forward(tape, b, u)?;
        Ok(tape.softmax(logits))
    }

    /// Attention-weighted frame for one link.
    fn transmit_side(&self, tape: &mut Tape<T>, b: &Binding, link: (usize, usize), x: Var, h: (Var, Var)) -> Result<(Var, Var)> {
        let (re, im) = self.encoder_graph(tape, b, link, x)?;
        match self.cfg.variant {
            CodecVariant::Independent => Ok((re, im)),
            CodecVariant::Shared => {
                let e = c2v_embed_on_tape(tape, h.0, h.1, self.cfg.symbols)?;
                let a = self.attention_graph(tape, b, "enc_att", re, im, e)?;
                Ok((tape.mul(a, re)?, tape.mul(a, im)?))
            }
        }
    }

    /// MMSE scalar equaliser followed by the decoder network.
    #[allow(clippy::too_many_arguments)]
    fn receive_side(
        &self,
        tape: &mut Tape<T>,
        b: &Binding,
        link: (usize, usize),
        y: (Var, Var),
        h: (Var, Var),
        embed: (Var, Var),
        noise_power: T,
        transmit_power: T,
    ) -> Result<Var> {
        let sqrt_p = transmit_power.sqrt();
        let hr2 = tape.square(h.0);
        let hi2 = tape.square(h.1);
        let gain = tape.add(hr2, hi2)?;
        let gain = tape.scale(gain, transmit_power);
        let den = tape.offset(gain, noise_power);
        let gr = tape.div(h.0, den)?;
        let gr = tape.scale(gr, sqrt_p);
        let gi = tape.div(h.1, den)?;
        let gi = tape.scale(gi, -sqrt_p);
        // (gr + j·gi)(yr + j·yi)
        let a = tape.mul(y.0, gr)?;
        let c = tape.mul(y.1, gi)?;
        let eq_r = tape.sub(a, c)?;
        let a = tape.mul(y.1, gr)?;
        let c = tape.mul(y.0, gi)?;
        let eq_i = tape.add(a, c)?;

        let (zr, zi) = match self.cfg.variant {
            CodecVariant::Independent => (eq_r, eq_i),
            CodecVariant::Shared => {
                let e = c2v_embed_on_tape(tape, embed.0, embed.1, self.cfg.symbols)?;
                let att = self.attention_graph(tape, b, "dec_att", eq_r, eq_i, e)?;
                let l = T::from_usize_lossy(self.cfg.symbols);
                let zr = tape.mul(att, eq_r)?;
                let zi = tape.mul(att, eq_i)?;
                (tape.scale(zr, l), tape.scale(zi, l))
            }
        };
        let z = tape.concat(&[zr, zi])?;
        self.decoder_mlp(self.owner(link)?).forward(tape, b, z)
    }

    /// Composite channel of every link as `[1, 1]` tape nodes.
    pub fn link_channels(
        &self,
        tape: &mut Tape<T>,
        b: &Binding,
        channel: &ChannelRealization<T>,
        links: &LinkSet,
        mode: PhaseMode,
    ) -> Result<Vec<(Var, Var)>> {
        let n = channel.irs_elements();
        if n != self.cfg.irs_elements {
            return Err(Error::invalid(format!(
                "channel has {n} IRS elements but the codec was built for {}",
                self.cfg.irs_elements
            )));
        }
        let p = links.len();
        let direct: Vec<Complex<T>> = links.links().iter().map(|&(r, k)| channel.direct(r, k)).collect();
        let (hr, hi) = if n > 0 && mode == PhaseMode::Continuous {
            let mut cr = vec![T::zero(); n * p];
            let mut ci = vec![T::zero(); n * p];
            for (j, &(r, k)) in links.links().iter().enumerate() {
                for (e, w) in channel.cascade_weights(r, k).into_iter().enumerate() {
                    cr[e * p + j] = w.re;
                    ci[e * p + j] = w.im;
                }
            }
            let raw = b.var(IRS_PARAM)?;
            let t = tape.tanh(raw);
            let t = tape.offset(t, T::one());
            let phi = tape.scale(t, T::PI());
            let c = tape.cos(phi);
            let s = tape.sin(phi);
            let cr = tape.constant([n, p], cr)?;
            let ci = tape.constant([n, p], ci)?;
            let dr = tape.constant([1, p], direct.iter().map(|h| h.re).collect())?;
            let di = tape.constant([1, p], direct.iter().map(|h| h.im).collect())?;
            let ccr = tape.matmul(c, cr)?;
            let sci = tape.matmul(s, ci)?;
            let re = tape.sub(ccr, sci)?;
            let re = tape.add(re, dr)?;
            let cci = tape.matmul(c, ci)?;
            let scr = tape.matmul(s, cr)?;
            let im = tape.add(cci, scr)?;
            let im = tape.add(im, di)?;
            (re, im)
        } else {
            let phases = self.irs_phases(mode);
            let mut re = Vec::with_capacity(p);
            let mut im = Vec::with_capacity(p);
            for &(r, k) in links.links() {
                let h = if n > 0 { channel.composite(r, k, &phases)? } else { channel.direct(r, k) };
                re.push(h.re);
                im.push(h.im);
            }
            (tape.constant([1, p], re)?, tape.constant([1, p], im)?)
        };
        (0..p)
            .map(|j| Ok((tape.slice_last(hr, j, 1)?, tape.slice_last(hi, j, 1)?)))
            .collect()
    }

    /// Records the full link simulation: encode → attention → superposition
    /// and power normalisation → IRS-composited channel plus noise →
    /// equalise → decode. The loss is the mean over links of the per-link MSE.
    pub fn forward(&self, tape: &mut Tape<T>, b: &Binding, input: &ForwardInput<'_, T>) -> Result<ForwardOutput> {
        let links = input.links.links();
        if input.images.len() != links.len() {
            return Err(Error::invalid("one image batch per link is required"));
        }
        if input.links.users() != input.channel.users() {
            return Err(Error::invalid("link set and channel disagree on user count"));
        }
        let batch = input.batch;
        let l = self.cfg.symbols;
        let px = self.cfg.pixels();
        let noise_power = input.channel.noise_power;
        let transmit_power = input.channel.transmit_power;
        let sqrt_p = transmit_power.sqrt();

        let hs = self.link_channels(tape, b, input.channel, input.links, input.phase_mode)?;

        let mut xs = Vec::with_capacity(links.len());
        let mut components = Vec::with_capacity(links.len());
        for (j, &link) in links.iter().enumerate() {
            self.check_pixels(input.images[j].len(), batch)?;
            let x = tape.constant([batch, px], input.images[j].clone())?;
            xs.push(x);
            components.push(self.transmit_side(tape, b, link, x, hs[j])?);
        }

        let mut transmitted = BTreeMap::new();
        for r in input.links.transmitters() {
            let mut acc: Option<(Var, Var)> = None;
            for (j, &(tx, _)) in links.iter().enumerate() {
                if tx != r {
                    continue;
                }
                let (cr, ci) = components[j];
                acc = Some(match acc {
                    None => (cr, ci),
                    Some((ar, ai)) => (tape.add(ar, cr)?, tape.add(ai, ci)?),
                });
            }
            let (sr, si) = acc.expect("transmitter has a link");
            let pr = tape.square(sr);
            let pi = tape.square(si);
            let pw = tape.add(pr, pi)?;
            let pw = tape.mean_last(pw);
            let pw = tape.offset(pw, T::lit(POWER_FLOOR));
            let norm = tape.sqrt(pw);
            let nr = tape.div(sr, norm)?;
            let ni = tape.div(si, norm)?;
            transmitted.insert(r, (nr, ni, norm));
        }

        let mut received = BTreeMap::new();
        for k in input.links.receivers() {
            let mut yr: Option<Var> = None;
            let mut yi: Option<Var> = None;
            for (j, &(r, dest)) in links.iter().enumerate() {
                if dest != k {
                    continue;
                }
                let (hr, hi) = hs[j];
                let (sr, si, _) = transmitted[&r];
                let a = tape.mul(sr, hr)?;
                let c = tape.mul(si, hi)?;
                let re = tape.sub(a, c)?;
                let a = tape.mul(si, hr)?;
                let c = tape.mul(sr, hi)?;
                let im = tape.add(a, c)?;
                let re = tape.scale(re, sqrt_p);
                let im = tape.scale(im, sqrt_p);
                yr = Some(match yr {
                    None => re,
                    Some(v) => tape.add(v, re)?,
                });
                yi = Some(match yi {
                    None => im,
                    Some(v) => tape.add(v, im)?,
                });
            }
            let (mut yr, mut yi) = (yr.expect("receiver has a link"), yi.expect("receiver has a link"));
            if let Some(noise) = input.noise {
                if let Some((nr, ni)) = noise.per_receiver.get(&k) {
                    if nr.len() != batch * l || ni.len() != batch * l {
                        return Err(Error::Shape {
                            op: "noise",
                            lhs: vec![batch, l],
                            rhs: vec![nr.len()],
                        });
                    }
                    let nr = tape.constant([batch, l], nr.clone())?;
                    let ni = tape.constant([batch, l], ni.clone())?;
                    yr = tape.add(yr, nr)?;
                    yi = tape.add(yi, ni)?;
                }
            }
            received.insert(k, (yr, yi));
        }

        let mut recon = Vec::with_capacity(links.len());
        let mut total: Option<Var> = None;
        for (j, &(r, k)) in links.iter().enumerate() {
            let w_hat = self.receive_side(tape, b, (r, k), received[&k], hs[j], hs[j], noise_power, transmit_power)?;
            let d = tape.sub(w_hat, xs[j])?;
            let sq = tape.square(d);
            let m = tape.mean(sq);
            total = Some(match total {
                None => m,
                Some(t) => tape.add(t, m)?,
            });
            recon.push(w_hat);
        }
        let total = total.ok_or_else(|| Error::invalid("no links to simulate"))?;
        let loss = tape.scale(total, T::one() / T::from_usize_lossy(links.len()));
        Ok(ForwardOutput {
            loss,
            recon,
            channel: hs,
            components,
            transmitted,
        })
    }

    /// Extracts batch row `row` of a forward pass as per-transmitter frames
    /// (normalised sum plus its equally scaled components).
    pub fn frames_from(&self, tape: &Tape<T>, out: &ForwardOutput, links: &LinkSet, row: usize) -> Result<TransmitFrames<T>> {
        let l = self.cfg.symbols;
        let slice = |v: Var| tape.value(v)[row * l..(row + 1) * l].to_vec();
        let mut frames = TransmitFrames::new();
        for (&r, &(nr, ni, norm)) in &out.transmitted {
            let scale = T::one() / tape.value(norm)[row];
            let mut comps = Vec::new();
            for (j, &(tx, k)) in links.links().iter().enumerate() {
                if tx == r {
                    let (cr, ci) = out.components[j];
                    comps.push((k, SemanticFrame::from_planes(&slice(cr), &slice(ci))?.scaled(scale)));
                }
            }
            let frame = SemanticFrame::from_planes(&slice(nr), &slice(ni))?.normalized()?;
            frames.insert(r, Superposition { frame, components: comps });
        }
        Ok(frames)
    }

    // Single-image operations, sharing the graph builders above.

    /// Semantic features of one image (unnormalised, length `L`).
    pub fn encode_semantic(&self, image: &ToyImage<T>, link: (usize, usize)) -> Result<SemanticFrame<T>> {
        if image.height() != self.cfg.image_side || image.width() != self.cfg.image_side {
            return Err(Error::Shape {
                op: "encode_semantic",
                lhs: vec![self.cfg.image_side, self.cfg.image_side],
                rhs: vec![image.height(), image.width()],
            });
        }
        let mut tape = Tape::new();
        let b = self.params.bind(&mut tape);
        let x = tape.constant([1, self.cfg.pixels()], image.pixels().to_vec())?;
        let (re, im) = self.encoder_graph(&mut tape, &b, link, x)?;
        SemanticFrame::from_planes(tape.value(re), tape.value(im))
    }

    pub fn csi_embedding(&self, h: Complex<T>) -> Result<CsiEmbedding<T>> {
        c2v_embed(h.re, h.im, self.cfg.symbols)
    }

    /// Encoder-side channel attention for a frame and an embedding.
    pub fn channel_attention(&self, s: &SemanticFrame<T>, e: &CsiEmbedding<T>) -> Result<AttentionVector<T>> {
        let l = self.cfg.symbols;
        if s.len() != l || e.len() != l {
            return Err(Error::Shape {
                op: "channel_attention",
                lhs: vec![s.len()],
                rhs: vec![e.len()],
            });
        }
        if self.cfg.variant == CodecVariant::Independent {
            return Ok(AttentionVector::uniform(l));
        }
        let mut tape = Tape::new();
        let b = self.params.bind(&mut tape);
        let re = tape.constant([1, l], s.symbols().iter().map(|c| c.re).collect())?;
        let im = tape.constant([1, l], s.symbols().iter().map(|c| c.im).collect())?;
        let ev = tape.constant([1, l], e.values().to_vec())?;
        let a = self.attention_graph(&mut tape, &b, "enc_att", re, im, ev)?;
        AttentionVector::new(tape.value(a).to_vec())
    }

    /// Reconstructs an image from a received vector.
    pub fn decode(&self, received: &SemanticFrame<T>, csi: &LinkCsi<T>) -> Result<ToyImage<T>> {
        let l = self.cfg.symbols;
        if received.len() != l {
            return Err(Error::Shape {
                op: "decode",
                lhs: vec![l],
                rhs: vec![received.len()],
            });
        }
        let mut tape = Tape::new();
        let b = self.params.bind(&mut tape);
        let yr = tape.constant([1, l], received.symbols().iter().map(|c| c.re).collect())?;
        let yi = tape.constant([1, l], received.symbols().iter().map(|c| c.im).collect())?;
        let hr = tape.constant([1, 1], vec![csi.h.re])?;
        let hi = tape.constant([1, 1], vec![csi.h.im])?;
        let er = tape.constant([1, 1], vec![csi.embed.re])?;
        let ei = tape.constant([1, 1], vec![csi.embed.im])?;
        let w = self.receive_side(&mut tape, &b, csi.link, (yr, yi), (hr, hi), (er, ei), csi.noise_power, csi.transmit_power)?;
        ToyImage::from_clamped(self.cfg.image_side, self.cfg.image_side, tape.value(w))
    }
}
