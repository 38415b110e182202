use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use irs_jsce::autodiff::container;
use irs_jsce::harness::{
    baseline_rows, compare_schemes, emit_csv, episode_rows, for_seeds, pretrain, quantized_composite, run_xddrl,
    sweep_irs_size, Config, LossRow, Workload,
};
use irs_jsce::scheduler::{exhaustive_oracle, RewardMode, ORACLE_LIMIT};
use irs_jsce::semantic::{Codec, CodecVariant};
use irs_jsce::throughput::{concurrent_schedules, Scheme, SimilaritySurrogate, SurrogateEvaluator};
use irs_jsce::{Error, Result};

#[derive(Parser)]
#[command(name = "irs-jsce", version, about = "IRS-assisted multi-user semantic communication experiments")]
struct Cli {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the scenario's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "IRS_JSCE_OUT", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the shared codec on all user pairs and save it.
    Pretrain,
    /// Run the nested scheduling/training loop.
    Train,
    /// Exact max-min schedule for small scenarios.
    Schedule {
        /// Cap on enumerated schedule sequences.
        #[arg(long, default_value_t = ORACLE_LIMIT)]
        limit: f64,
    },
    /// Quantized-phase metrics across IRS sizes.
    SweepIrs,
    /// Train and compare the transmission schemes.
    Baseline {
        /// Schemes to run (default: all).
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
    },
    /// Summarise every CSV in the output directory.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error\tkind={}\tmessage={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seeds: Vec<u64> = match cli.seed {
        Some(s) => vec![s],
        None => cfg.scenario.seeds.clone(),
    };
    std::fs::create_dir_all(&cli.out)?;
    std::fs::write(cli.out.join("config.toml"), cfg.canonical())?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Pretrain => {
            for (seed, (codec, trace)) in for_seeds(&seeds, |s| pretrain(&cfg, s, &Workload::draw(&cfg, s)?))? {
                container::save(codec.params(), out.join(format!("pretrain_seed{seed}.bin")))?;
                let rows: Vec<LossRow> = trace
                    .iter()
                    .enumerate()
                    .map(|(epoch, &loss)| LossRow { seed, epoch, loss })
                    .collect();
                emit_csv(&rows, out.join(format!("pretrain_seed{seed}.csv")))?;
                println!("seed {seed}: final loss {:.6}", trace.last().copied().unwrap_or(f64::NAN));
            }
        }
        Command::Train => {
            let records = for_seeds(&seeds, |s| {
                let work = Workload::draw(&cfg, s)?;
                let codec = pretrained(&cfg, s, &work, out)?;
                run_xddrl(&cfg, s, &work, &codec)
            })?;
            let mut all = Vec::new();
            for (seed, rec) in records {
                emit_csv(&episode_rows(&rec), out.join(format!("rewards_seed{seed}.csv")))?;
                println!(
                    "seed {seed}: objective {:.6} best {:.6} hash {} ({:.1}s)",
                    rec.objective,
                    rec.best_objective,
                    rec.hash(),
                    rec.wall_clock
                );
                all.push(rec);
            }
            emit_csv(&all, out.join("runs.csv"))?;
        }
        Command::Schedule { limit } => {
            let demand = cfg.demand()?;
            for seed in seeds {
                let work = Workload::draw(&cfg, seed)?;
                let codec = pretrained(&cfg, seed, &work, out)?;
                let mut ev = SurrogateEvaluator::new(
                    quantized_composite(&codec, &work.channel)?,
                    work.channel.noise_power,
                    work.channel.transmit_power,
                    cfg.scenario.symbols,
                    SimilaritySurrogate::calibrated(),
                );
                let best = exhaustive_oracle(&mut ev, &demand, cfg.scenario.slots, RewardMode::Similarity, *limit)?;
                let list: Vec<String> = best.schedules.iter().map(ToString::to_string).collect();
                println!("seed {seed}: objective {:.6} schedules {}", best.objective, list.join(" | "));
            }
            let fallback = concurrent_schedules(&demand, cfg.scenario.slots)?;
            let list: Vec<String> = fallback.iter().map(ToString::to_string).collect();
            println!("concurrent packing (0-based users): {}", list.join(" | "));
        }
        Command::SweepIrs => {
            for (seed, rows) in for_seeds(&seeds, |s| sweep_irs_size(&cfg, s, &cfg.sweep.sizes))? {
                for r in &rows {
                    println!("seed {seed}: N = {:>3}  SSIM {:.4}  PSNR {:.2} dB", r.elements, r.ssim, r.psnr);
                }
                emit_csv(&rows, out.join(format!("sweep_seed{seed}.csv")))?;
            }
        }
        Command::Baseline { schemes } => {
            let schemes: Vec<Scheme> = if schemes.is_empty() {
                Scheme::ALL.to_vec()
            } else {
                schemes.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            let reports = for_seeds(&seeds, |s| compare_schemes(&cfg, s, &schemes, &Workload::draw(&cfg, s)?))?;
            let mut rows = Vec::new();
            for (seed, list) in reports {
                for r in &list {
                    println!(
                        "seed {seed}: {:<22} min Γ {:.4}  mean ξ {:.4}  params {}",
                        r.scheme, r.min_throughput, r.mean_similarity, r.parameter_count
                    );
                    rows.extend(baseline_rows(seed, r));
                }
            }
            emit_csv(&rows, out.join("baselines.csv"))?;
        }
        Command::Report => report(out)?,
    }
    Ok(())
}

/// Loads `pretrain_seed{seed}.bin` from `out` when present, otherwise pretrains.
fn pretrained(cfg: &Config, seed: u64, work: &Workload, out: &Path) -> Result<Codec<f64>> {
    let path = out.join(format!("pretrain_seed{seed}.bin"));
    let codec_cfg = cfg.codec_config(CodecVariant::Shared, work.channel.irs_elements());
    if path.exists() {
        return Codec::from_params(codec_cfg, &[], container::load(&path)?).map_err(|e| e.context(path.display().to_string()));
    }
    Ok(pretrain(cfg, seed, work)?.0)
}

fn report(out: &Path) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(out)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!("no CSV files in {}", out.display())));
    }
    for path in files {
        let mut rd = csv::Reader::from_path(&path)?;
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        let mut rows = 0usize;
        for rec in rd.records() {
            let rec = rec?;
            rows += 1;
            for (c, v) in cols.iter_mut().zip(rec.iter()) {
                if let Ok(x) = v.parse::<f64>() {
                    c.push(x);
                }
            }
        }
        println!("{} ({rows} rows)", path.file_name().and_then(|n| n.to_str()).unwrap_or("?"));
        for (name, c) in header.iter().zip(&cols) {
            if c.len() == rows && rows > 0 && !matches!(name.as_str(), "seed" | "episode" | "epoch") {
                let mean = c.iter().sum::<f64>() / rows as f64;
                let min = c.iter().copied().fold(f64::INFINITY, f64::min);
                let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                println!("  {name:<16} mean {mean:>12.6}  min {min:>12.6}  max {max:>12.6}");
            }
        }
    }
    Ok(())
}
