use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelConfig, Position, UpaGeometry};
use crate::error::{Error, Result};
use crate::scheduler::{DdpgConfig, DemandSet, EpisodeConfig, RewardMode};
use crate::semantic::{CodecConfig, CodecVariant, TrainConfig};
use crate::throughput::ThroughputConfig;

/// Deployment and workload. Users are numbered from 1 in files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSection {
    /// `[x, y]` per user, in metres.
    pub positions: Vec<[f64; 2]>,
    /// Optional explicit user count; must match `positions`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    pub irs_position: [f64; 2],
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub wavelength: f64,
    pub kappa: f64,
    pub noise_power: f64,
    pub transmit_power: f64,
    pub path_loss_exponent: f64,
    pub slots: usize,
    /// Ordered `[transmitter, receiver]` pairs.
    pub demand: Vec<[usize; 2]>,
    pub image_side: usize,
    pub symbols: usize,
    pub bit_depth: u32,
    pub bits_per_symbol: f64,
    pub bandwidth: f64,
    pub train_images: usize,
    pub test_images: usize,
    pub seeds: Vec<u64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            positions: vec![[1.13, 0.50], [-0.01, -0.21], [-1.10, -0.28], [0.19, 1.01], [0.20, 0.01]],
            users: None,
            irs_position: [0.0, 0.0],
            irs_rows: 3,
            irs_cols: 3,
            wavelength: 0.1,
            kappa: 10.0,
            noise_power: 0.1,
            transmit_power: 1.0,
            path_loss_exponent: 2.0,
            slots: 5,
            demand: vec![[1, 2], [1, 3], [1, 4]],
            image_side: 16,
            symbols: 128,
            bit_depth: 8,
            bits_per_symbol: 4.0,
            bandwidth: 1.0,
            train_images: 512,
            test_images: 64,
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodecSection {
    pub hidden: usize,
    pub attention_hidden: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub irs_learning_rate: f64,
    /// All-pairs warm-start training.
    pub pretrain_epochs: usize,
    /// Backpropagation epochs per scheduled slot.
    pub inner_epochs: usize,
    /// Continuous-phase epochs before quantization.
    pub irs_epochs: usize,
    /// Epochs with quantized, frozen phases.
    pub finetune_epochs: usize,
}

impl Default for CodecSection {
    fn default() -> Self {
        Self {
            hidden: 256,
            attention_hidden: 128,
            batch_size: 32,
            learning_rate: 1e-3,
            irs_learning_rate: 2e-2,
            pretrain_epochs: 15,
            inner_epochs: 50,
            irs_epochs: 5,
            finetune_epochs: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardSetting {
    #[default]
    Similarity,
    Sinr,
}

/// How slots are scored during scheduling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorSetting {
    /// SINR of equal-split frames mapped through the similarity surrogate.
    #[default]
    Surrogate,
    /// Warm-started codec retraining and evaluation per schedule.
    Codec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdpgSection {
    pub episodes: usize,
    pub discount: f64,
    pub tau: f64,
    pub replay_every: usize,
    pub target_every: usize,
    pub capacity: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub noise_scale: f64,
    pub noise_decay: f64,
    pub noise_clip: f64,
    pub reward: RewardSetting,
    pub evaluator: EvaluatorSetting,
}

impl Default for DdpgSection {
    fn default() -> Self {
        let d = DdpgConfig::default();
        Self {
            episodes: 200,
            discount: d.discount,
            tau: d.tau,
            replay_every: d.replay_every,
            target_every: d.target_every,
            capacity: d.capacity,
            batch_size: d.batch_size,
            hidden: d.hidden,
            actor_lr: d.actor_lr,
            critic_lr: d.critic_lr,
            noise_scale: d.noise_scale,
            noise_decay: d.noise_decay,
            noise_clip: d.noise_clip,
            reward: RewardSetting::Similarity,
            evaluator: EvaluatorSetting::Surrogate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    /// IRS element counts `N`; each is laid out as the most square grid.
    pub sizes: Vec<usize>,
    pub epochs: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            sizes: vec![0, 4, 9, 16, 25],
            epochs: 20,
        }
    }
}

/// A complete experiment description.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub scenario: ScenarioSection,
    pub codec: CodecSection,
    pub ddpg: DdpgSection,
    pub sweep: SweepSection,
}

/// 1-based line of byte offset `at`, and the `section.key` written there.
fn locate(text: &str, at: usize) -> (usize, String) {
    let at = at.min(text.len());
    let line_no = text[..at].matches('\n').count() + 1;
    let line = text.lines().nth(line_no - 1).unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim().to_string();
    let section = text[..at]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && !l.contains('='))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').to_string());
    match section {
        Some(s) if !key.is_empty() && !key.starts_with('[') => (line_no, format!("{s}.{key}")),
        _ => (line_no, key),
    }
}

impl Config {
    /// Parses, rejects unknown keys, fills defaults and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut unknown = Vec::new();
        let de = toml::Deserializer::new(text);
        let parsed: std::result::Result<Config, _> = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()));
        let cfg = parsed.map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => {
                    let (line, key) = locate(text, span.start);
                    Error::Config(format!("line {line}, key `{key}`: {msg}"))
                }
                None => Error::Config(msg),
            }
        })?;
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Every field written out, defaults included; reparses to `self`.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        let fail = |field: &str, why: &str| Err(Error::Config(format!("{field}: {why}")));
        let k = s.positions.len();
        if k < 2 {
            return fail("scenario.positions", "need at least two users");
        }
        if let Some(u) = s.users {
            if u != k {
                return fail("scenario.users", &format!("{u} users declared but {k} positioned"));
            }
        }
        if s.positions.iter().chain([&s.irs_position]).any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return fail("scenario.positions", "coordinates must be finite");
        }
        for (i, a) in s.positions.iter().enumerate() {
            if s.positions[..i].contains(a) {
                return fail("scenario.positions", &format!("user {} shares a position", i + 1));
            }
        }
        if (s.irs_rows == 0) != (s.irs_cols == 0) {
            return fail("scenario.irs_rows", "rows and columns must both be zero or both positive");
        }
        for (field, v) in [
            ("scenario.wavelength", s.wavelength),
            ("scenario.transmit_power", s.transmit_power),
            ("scenario.bits_per_symbol", s.bits_per_symbol),
            ("scenario.bandwidth", s.bandwidth),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(field, "must be positive");
            }
        }
        for (field, v) in [
            ("scenario.kappa", s.kappa),
            ("scenario.noise_power", s.noise_power),
            ("scenario.path_loss_exponent", s.path_loss_exponent),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(field, "must be nonnegative");
            }
        }
        for (field, v) in [
            ("scenario.slots", s.slots),
            ("scenario.image_side", s.image_side),
            ("scenario.train_images", s.train_images),
            ("scenario.test_images", s.test_images),
        ] {
            if v == 0 {
                return fail(field, "must be positive");
            }
        }
        if s.bit_depth == 0 {
            return fail("scenario.bit_depth", "must be positive");
        }
        if s.symbols == 0 || !s.symbols.is_multiple_of(4) {
            return fail("scenario.symbols", "must be a positive multiple of 4");
        }
        if s.demand.is_empty() {
            return fail("scenario.demand", "needs at least one pair");
        }
        for &[r, t] in &s.demand {
            if r == 0 || t == 0 || r > k || t > k {
                return fail("scenario.demand", &format!("pair [{r}, {t}] references an unpositioned user"));
            }
            if r == t {
                return fail("scenario.demand", &format!("pair [{r}, {t}] needs distinct users"));
            }
        }
        if s.seeds.is_empty() {
            return fail("scenario.seeds", "needs at least one seed");
        }
        let c = &self.codec;
        if c.hidden == 0 || c.attention_hidden == 0 || c.batch_size == 0 {
            return fail("codec", "widths and batch size must be positive");
        }
        if !(c.learning_rate >= 0.0 && c.irs_learning_rate >= 0.0) {
            return fail("codec.learning_rate", "must be nonnegative");
        }
        self.ddpg_config().validate().map_err(|e| Error::Config(format!("ddpg: {e}")))?;
        if self.sweep.sizes.is_empty() {
            return fail("sweep.sizes", "needs at least one size");
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.scenario.positions.len()
    }

    pub fn irs_elements(&self) -> usize {
        self.scenario.irs_rows * self.scenario.irs_cols
    }

    /// Demand pairs with 0-based user indices.
    pub fn demand(&self) -> Result<DemandSet> {
        let pairs: Vec<(usize, usize)> = self.scenario.demand.iter().map(|&[r, k]| (r - 1, k - 1)).collect();
        DemandSet::new(self.users(), &pairs)
    }

    /// Channel configuration with a `rows × cols` surface (none for 0 elements).
    pub fn channel_config_with(&self, rows: usize, cols: usize) -> Result<ChannelConfig<f64>> {
        let s = &self.scenario;
        Ok(ChannelConfig {
            positions: s.positions.iter().map(|p| Position::new(p[0], p[1])).collect::<Result<_>>()?,
            irs_position: Position::new(s.irs_position[0], s.irs_position[1])?,
            irs: if rows * cols > 0 { Some(UpaGeometry::new(rows, cols, s.wavelength)?) } else { None },
            kappa: s.kappa,
            noise_power: s.noise_power,
            transmit_power: s.transmit_power,
            path_loss_exponent: s.path_loss_exponent,
        })
    }

    pub fn channel_config(&self) -> Result<ChannelConfig<f64>> {
        self.channel_config_with(self.scenario.irs_rows, self.scenario.irs_cols)
    }

    pub fn codec_config(&self, variant: CodecVariant, irs_elements: usize) -> CodecConfig {
        CodecConfig {
            image_side: self.scenario.image_side,
            symbols: self.scenario.symbols,
            hidden: self.codec.hidden,
            attention_hidden: self.codec.attention_hidden,
            irs_elements,
            variant,
        }
    }

    /// Training settings for `epochs` epochs, IRS trainable, continuous phases.
    pub fn train_config(&self, epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: self.codec.batch_size,
            learning_rate: self.codec.learning_rate,
            irs_learning_rate: self.codec.irs_learning_rate,
            ..TrainConfig::default()
        }
    }

    pub fn ddpg_config(&self) -> DdpgConfig {
        let d = &self.ddpg;
        DdpgConfig {
            discount: d.discount,
            tau: d.tau,
            replay_every: d.replay_every,
            target_every: d.target_every,
            capacity: d.capacity,
            batch_size: d.batch_size,
            hidden: d.hidden,
            actor_lr: d.actor_lr,
            critic_lr: d.critic_lr,
            noise_scale: d.noise_scale,
            noise_decay: d.noise_decay,
            noise_clip: d.noise_clip,
        }
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            episodes: self.ddpg.episodes,
            slots: self.scenario.slots,
            reward_mode: match self.ddpg.reward {
                RewardSetting::Similarity => RewardMode::Similarity,
                RewardSetting::Sinr => RewardMode::Sinr,
            },
        }
    }

    pub fn throughput_config(&self) -> ThroughputConfig {
        let s = &self.scenario;
        ThroughputConfig {
            bandwidth: s.bandwidth,
            source_bits: (s.image_side * s.image_side) as f64 * f64::from(s.bit_depth),
            bits_per_symbol: s.bits_per_symbol,
            symbols: s.symbols as f64,
        }
    }
}

/// Loads and validates a config file; missing fields take their defaults.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Config> {
    Config::load(path)
}
