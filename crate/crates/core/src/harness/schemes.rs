use crate::error::Result;
use crate::scheduler::LinkSet;
use crate::semantic::{train_e2e_groups, Codec, CodecVariant, PhaseMode, TrainConfig};
use crate::throughput::{concurrent_schedules, training_groups, run_baseline, BaselineInput, CodecBank, Scheme, ThroughputReport};

use super::config::Config;
use super::run::{stream, Stream, Workload};

/// Trains the codec of `scheme` from scratch on the distinct schedules the
/// scheme uses: `pretrain_epochs` with a trainable surface, then
/// `finetune_epochs` with quantized, frozen phases. Every scheme draws from
/// the same seed streams.
///
/// The independent-codebook codec holds one encoder/decoder for every ordered
/// pair of the deployment; only the pairs it schedules are trained.
pub fn train_scheme(cfg: &Config, seed: u64, scheme: Scheme, work: &Workload) -> Result<Codec<f64>> {
    let demand = cfg.demand()?;
    let slots = cfg.scenario.slots;
    let concurrent = concurrent_schedules(&demand, slots)?;
    let schedules = scheme.schedules(&demand, &concurrent, slots)?;
    let groups = training_groups(&schedules)?;
    let owned;
    let channel = if scheme.without_irs() {
        owned = work.channel.without_irs();
        &owned
    } else {
        &work.channel
    };
    let (variant, pairs) = match scheme {
        Scheme::IndependentCodebook => (CodecVariant::Independent, LinkSet::all_pairs(cfg.users())?.links().to_vec()),
        _ => (CodecVariant::Shared, Vec::new()),
    };
    let mut codec = Codec::new(cfg.codec_config(variant, channel.irs_elements()), &pairs, &mut stream(seed, Stream::Init))?;
    let mut rng = stream(seed, Stream::Baseline);
    let ctx = |e: crate::Error| e.context(format!("training {scheme}"));
    train_e2e_groups(&mut codec, channel, &groups, &work.train, &cfg.train_config(cfg.codec.pretrain_epochs), &mut rng)
        .map_err(ctx)?;
    let ft = TrainConfig {
        train_irs: false,
        phase_mode: PhaseMode::Quantized,
        ..cfg.train_config(cfg.codec.finetune_epochs)
    };
    if ft.epochs > 0 {
        train_e2e_groups(&mut codec, channel, &groups, &work.train, &ft, &mut rng).map_err(ctx)?;
    }
    Ok(codec)
}

/// Trains and evaluates every scheme in `schemes` on one seed.
pub fn compare_schemes(cfg: &Config, seed: u64, schemes: &[Scheme], work: &Workload) -> Result<Vec<ThroughputReport>> {
    let demand = cfg.demand()?;
    let concurrent = concurrent_schedules(&demand, cfg.scenario.slots)?;
    let mut bank = CodecBank::new();
    for &s in schemes {
        bank.insert(s, train_scheme(cfg, seed, s, work)?);
    }
    let input = BaselineInput {
        channel: &work.channel,
        demand: &demand,
        slots: cfg.scenario.slots,
        concurrent: &concurrent,
        images: &work.test,
        throughput: cfg.throughput_config(),
        seed,
    };
    schemes.iter().map(|&s| run_baseline(s, &bank, &input)).collect()
}
