use crate::error::Result;
use crate::scheduler::LinkSet;
use crate::semantic::{evaluate, PhaseMode};

use super::config::Config;
use super::run::{init_codec, refine, stream, Stream, Workload};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub elements: usize,
    pub rows: usize,
    pub cols: usize,
    pub ssim: f64,
    pub min_ssim: f64,
    pub psnr: f64,
}

/// Most square `rows × cols` factorisation of `n`, with `rows ≤ cols`.
pub fn grid(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let rows = (1..=n).take_while(|r| r * r <= n).filter(|r| n.is_multiple_of(*r)).last().unwrap_or(1);
    (rows, n / rows)
}

/// One row per surface size: a fresh codec trained with every ordered pair
/// scheduled at once, then evaluated with quantized phases. Channel, images
/// and network weights come from the same seed streams for every size.
pub fn sweep_irs_size(cfg: &Config, seed: u64, sizes: &[usize]) -> Result<Vec<SweepRow>> {
    super::run::check_nonempty(sizes, "size list")?;
    let links = LinkSet::all_pairs(cfg.users())?;
    sizes
        .iter()
        .map(|&n| {
            let (rows, cols) = grid(n);
            let work = Workload::draw_with(cfg, seed, rows, cols)?;
            let mut codec = init_codec(cfg, seed, n)?;
            let mut rng = stream(seed, Stream::Sweep);
            refine(cfg, &mut codec, &work.channel, &links, &work.train, cfg.sweep.epochs, 0, true, &mut rng)
                .map_err(|e| e.context(format!("IRS size {n}")))?;
            let report = evaluate(&codec, &work.channel, &links, &work.test, PhaseMode::Quantized, &mut stream(seed, Stream::Eval))?;
            Ok(SweepRow {
                elements: n,
                rows,
                cols,
                ssim: report.mean_ssim(),
                min_ssim: report.min_ssim(),
                psnr: report.mean_psnr(),
            })
        })
        .collect()
}
