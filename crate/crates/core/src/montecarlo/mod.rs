//! Monte Carlo BER estimation.
//!
//! A cell is simulated in blocks of `batch_bits`. Block `b` draws all of its
//! randomness from generators keyed by `(cell seed, b)`, so its counters are a
//! pure function of its coordinates. Blocks are evaluated in parallel waves and
//! reduced in block order; the run stops at the first block boundary where the
//! stopping rule fires and any later blocks of the wave are discarded. The
//! result is therefore identical for every worker count.

mod stats;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{transmit_into, BranchObservation, FadingSampler, NoiseSpec, RicianParams};
use crate::error::{Error, Result};
use crate::modem::{Bit, Constellation, Modulation};
use crate::receiver::{detect_nearest, mrc_combine};
use crate::rng::{derive_seed, stream_rng, BIT_STREAM, CHANNEL_STREAM};

pub use stats::{ber_of, binomial_std_err, wilson_ci};
pub use sweep::{cell_seed, run_sweep, SweepGrid};

/// When to stop simulating a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingRule {
    pub min_bit_errors: u64,
    pub max_bits: u64,
    pub batch_bits: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 200,
            max_bits: 10_000_000,
            batch_bits: 10_000,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_bit_errors == 0 {
            return Err(Error::Parameter("min_bit_errors must be at least 1".into()));
        }
        if self.batch_bits == 0 || self.batch_bits > self.max_bits {
            return Err(Error::Parameter(format!(
                "batch_bits must satisfy 0 < batch_bits <= max_bits, got {} and {}",
                self.batch_bits, self.max_bits
            )));
        }
        Ok(())
    }
}

/// One simulation cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimPoint {
    pub modulation: Modulation,
    pub ebn0_db: f64,
    pub diversity: u32,
    pub rician: RicianParams,
    pub stop: StoppingRule,
    pub seed: u64,
}

impl SimPoint {
    pub fn validate(&self) -> Result<()> {
        self.modulation.validate()?;
        if self.diversity == 0 {
            return Err(Error::Parameter(
                "diversity order must be at least 1".into(),
            ));
        }
        self.rician.validate()?;
        self.stop.validate()?;
        NoiseSpec::new(self.ebn0_db, self.modulation.m)?;
        Ok(())
    }
}

impl std::fmt::Display for SimPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} Eb/N0={} dB L={} K={}",
            self.modulation, self.ebn0_db, self.diversity, self.rician.k_factor
        )
    }
}

/// Counters and derived rates for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub symbols_sent: u64,
    pub symbol_errors: u64,
    pub ber: f64,
    pub ser: f64,
    /// 95% Wilson interval on `ber`.
    pub ci95: (f64, f64),
}

impl BerEstimate {
    pub fn from_counts(counts: Counts) -> Result<Self> {
        Ok(Self {
            bits_sent: counts.bits,
            bit_errors: counts.bit_errors,
            symbols_sent: counts.symbols,
            symbol_errors: counts.symbol_errors,
            ber: ber_of(counts.bit_errors, counts.bits)?,
            ser: ber_of(counts.symbol_errors, counts.symbols)?,
            ci95: wilson_ci(counts.bit_errors, counts.bits, 0.95)?,
        })
    }

    /// Binomial standard error of `ber`, treating bits as independent.
    pub fn ber_std_err(&self) -> f64 {
        binomial_std_err(self.ber, self.bits_sent)
    }

    pub fn ser_std_err(&self) -> f64 {
        binomial_std_err(self.ser, self.symbols_sent)
    }
}

/// Additive error counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub bits: u64,
    pub bit_errors: u64,
    pub symbols: u64,
    pub symbol_errors: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.bits += rhs.bits;
        self.bit_errors += rhs.bit_errors;
        self.symbols += rhs.symbols;
        self.symbol_errors += rhs.symbol_errors;
    }
}

/// Everything a block needs, built once per cell.
struct Link {
    constellation: Constellation,
    fading: FadingSampler,
    noise: NoiseSpec,
    diversity: usize,
    symbols_per_block: usize,
    seed: u64,
}

impl Link {
    fn new(p: &SimPoint) -> Result<Self> {
        p.validate()?;
        let constellation = p.modulation.build()?;
        let n = constellation.bits_per_symbol() as u64;
        Ok(Self {
            fading: FadingSampler::new(&p.rician)?,
            noise: NoiseSpec::new(p.ebn0_db, p.modulation.m)?,
            diversity: p.diversity as usize,
            symbols_per_block: (p.stop.batch_bits / n).max(1) as usize,
            seed: p.seed,
            constellation,
        })
    }

    fn bits_per_block(&self) -> u64 {
        (self.symbols_per_block as u64) * self.constellation.bits_per_symbol() as u64
    }

    fn run_block(&self, block: u64) -> Counts {
        let key = derive_seed(self.seed, &[block]);
        let mut bit_rng = stream_rng(key, BIT_STREAM);
        let mut chan_rng = stream_rng(key, CHANNEL_STREAM);
        let c = &self.constellation;
        let n = c.bits_per_symbol();

        let bits = random_bits(&mut bit_rng, self.bits_per_block() as usize);
        let tx = c
            .map_bits(&bits)
            .expect("block length is a whole number of symbols");

        let mask = (1u32 << n) - 1;
        let mut obs = BranchObservation::with_branches(self.diversity);
        let rx: Vec<usize> = tx
            .iter()
            .map(|&index| {
                transmit_into(
                    c.symbol(index),
                    &self.fading,
                    &self.noise,
                    &mut chan_rng,
                    &mut obs,
                );
                match mrc_combine(&obs) {
                    Ok(stat) => detect_nearest(&stat, c),
                    // Erasure: decide the point whose label is the complement of
                    // the sent one so every bit of the symbol counts as wrong.
                    Err(_) => c.index_of(!c.label(index) & mask),
                }
            })
            .collect();
        let decoded = c
            .demap_bits(&rx)
            .expect("detector returns in-range indices");

        Counts {
            bits: bits.len() as u64,
            bit_errors: bits.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64,
            symbols: tx.len() as u64,
            symbol_errors: tx.iter().zip(&rx).filter(|(a, b)| a != b).count() as u64,
        }
    }
}

fn random_bits<R: rand::Rng>(rng: &mut R, len: usize) -> Vec<Bit> {
    let mut bits = Vec::with_capacity(len + 64);
    while bits.len() < len {
        let word: u64 = rng.random();
        bits.extend((0..64).map(|i| ((word >> i) & 1) as Bit));
    }
    bits.truncate(len);
    bits
}

/// Simulates one cell until its stopping rule fires.
pub fn run_point(p: &SimPoint) -> Result<BerEstimate> {
    let link = Link::new(p)?;
    let per_block = link.bits_per_block();
    let total_blocks = p.stop.max_bits.div_ceil(per_block);
    let wave = rayon::current_num_threads().max(1) as u64;

    let mut counts = Counts::default();
    let mut next = 0;
    'outer: while next < total_blocks {
        let end = (next + wave).min(total_blocks);
        let results: Vec<Counts> = (next..end)
            .into_par_iter()
            .map(|block| link.run_block(block))
            .collect();
        for block in results {
            counts += block;
            next += 1;
            if counts.bit_errors >= p.stop.min_bit_errors || counts.bits >= p.stop.max_bits {
                break 'outer;
            }
        }
    }
    BerEstimate::from_counts(counts)
}
