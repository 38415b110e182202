use crate::channel::PairTable;
use crate::error::{Error, Result};
use crate::scheduler::{self, DemandSet, ScheduleMatrix, SlotRecord};

/// Semantic-throughput accounting constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ThroughputConfig {
    /// Normalised bandwidth `B`.
    pub bandwidth: f64,
    /// Bits per source image `I` (pixels × bit depth).
    pub source_bits: f64,
    /// Bits per symbol of the reference modulation (4 for 16-QAM).
    pub bits_per_symbol: f64,
    /// Semantic symbols per frame `L`.
    pub symbols: f64,
}

impl Default for ThroughputConfig {
    fn default() -> Self {
        Self {
            bandwidth: 1.0,
            source_bits: 2048.0,
            bits_per_symbol: 4.0,
            symbols: 128.0,
        }
    }
}

impl ThroughputConfig {
    /// `I` for a square image of `side` pixels at `depth` bits.
    pub fn for_image(side: usize, depth: u32, symbols: usize) -> Self {
        Self {
            source_bits: (side * side) as f64 * f64::from(depth),
            symbols: symbols as f64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth", self.bandwidth),
            ("source bits", self.source_bits),
            ("bits per symbol", self.bits_per_symbol),
            ("symbol count", self.symbols),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `C_r = L / I`.
    pub fn compression_ratio(&self) -> f64 {
        self.symbols / self.source_bits
    }

    /// `S = I / bits_per_symbol`, the reference symbol count of one image.
    pub fn reference_symbols(&self) -> f64 {
        self.source_bits / self.bits_per_symbol
    }
}

/// LDPC code of the bit-level reference link; documentation only, no coder is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdpcReference {
    pub block_length: usize,
    pub rate: f64,
    pub check_degree: usize,
    pub variable_degree: usize,
}

impl Default for LdpcReference {
    fn default() -> Self {
        Self {
            block_length: 1296,
            rate: 2.0 / 3.0,
            check_degree: 432,
            variable_degree: 144,
        }
    }
}

/// `Γ = B·(I/bits_per_symbol)/L · ξ` in suts per unit time.
pub fn semantic_throughput(cfg: &ThroughputConfig, similarity: f64) -> Result<f64> {
    cfg.validate()?;
    if !(-1.0..=1.0).contains(&similarity) {
        return Err(Error::invalid(format!("similarity {similarity} outside [-1, 1]")));
    }
    Ok(cfg.bandwidth * cfg.reference_symbols() / cfg.symbols * similarity)
}

/// `min_{(r,k) ∈ demand} (1/T)·Σ_t B_t[r,k]·ξ_t(r,k)`.
pub fn maxmin_objective(
    schedules: &[ScheduleMatrix],
    similarities: &[PairTable<f64>],
    demand: &DemandSet,
    slots: usize,
) -> Result<f64> {
    if schedules.len() != similarities.len() {
        return Err(Error::invalid("one similarity table per schedule is required"));
    }
    let history: Vec<SlotRecord> = schedules
        .iter()
        .zip(similarities)
        .map(|(s, v)| SlotRecord {
            schedule: s.clone(),
            values: v.clone(),
        })
        .collect();
    scheduler::maxmin_objective(&history, demand, slots)
}
