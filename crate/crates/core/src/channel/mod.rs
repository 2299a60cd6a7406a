//! Flat Rician fading and calibrated AWGN, per diversity branch.
//!
//! Gains are normalized so that `E[|h|²] = 1` for every K, which keeps the
//! configured Eb/N0 equal to the average per-branch Eb/N0. Fading is drawn
//! independently for every symbol and every branch.

pub mod diagnostics;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the diffuse part of the gain is generated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    /// Circular complex Gaussian diffuse component (the many-scatterer limit).
    #[default]
    GaussianLimit,
    /// Literal sum of `n` equal-amplitude scatterers with uniform random phases.
    FiniteScatterers { n: u32 },
}

/// Rician fading distribution.
///
/// `k_factor` is the linear ratio of line-of-sight power to diffuse power.
/// `0` gives Rayleigh fading and `f64::INFINITY` a fixed unit gain (pure AWGN).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianParams {
    pub k_factor: f64,
    #[serde(default)]
    pub model: FadingModel,
    #[serde(default)]
    pub los_phase: f64,
}

impl RicianParams {
    pub fn gaussian(k_factor: f64) -> Self {
        Self {
            k_factor,
            model: FadingModel::GaussianLimit,
            los_phase: 0.0,
        }
    }

    pub fn finite(k_factor: f64, n_scatterers: u32) -> Self {
        Self {
            k_factor,
            model: FadingModel::FiniteScatterers { n: n_scatterers },
            los_phase: 0.0,
        }
    }

    pub fn rayleigh() -> Self {
        Self::gaussian(0.0)
    }

    /// Non-fading channel (K → ∞).
    pub fn awgn() -> Self {
        Self::gaussian(f64::INFINITY)
    }

    pub fn k_from_db(k_db: f64) -> f64 {
        10f64.powf(k_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_factor.is_nan() || self.k_factor < 0.0 {
            return Err(Error::Parameter(format!(
                "Rician K-factor must be >= 0, got {}",
                self.k_factor
            )));
        }
        if !self.los_phase.is_finite() {
            return Err(Error::Parameter(format!(
                "line-of-sight phase must be finite, got {}",
                self.los_phase
            )));
        }
        if let FadingModel::FiniteScatterers { n: 0 } = self.model {
            return Err(Error::Parameter(
                "finite-scatterer model needs at least one scatterer".into(),
            ));
        }
        Ok(())
    }

    /// `sqrt(K / (K + 1))`.
    pub fn los_amplitude(&self) -> f64 {
        if self.k_factor.is_infinite() {
            1.0
        } else {
            (self.k_factor / (self.k_factor + 1.0)).sqrt()
        }
    }

    /// Mean diffuse power `1 / (K + 1)`.
    pub fn diffuse_power(&self) -> f64 {
        (self.k_factor + 1.0).recip()
    }
}

/// Validated, precomputed form of [`RicianParams`].
#[derive(Debug, Clone)]
pub struct FadingSampler {
    los: Complex64,
    diffuse: Diffuse,
}

#[derive(Debug, Clone)]
enum Diffuse {
    None,
    /// Per-component standard deviation of the complex Gaussian.
    Gaussian {
        sigma: f64,
    },
    /// Per-scatterer amplitude.
    Scatterers {
        rho: f64,
        n: u32,
    },
}

impl FadingSampler {
    pub fn new(params: &RicianParams) -> Result<Self> {
        params.validate()?;
        let los = Complex64::from_polar(params.los_amplitude(), params.los_phase);
        let power = params.diffuse_power();
        let diffuse = if power == 0.0 {
            Diffuse::None
        } else {
            match params.model {
                FadingModel::GaussianLimit => Diffuse::Gaussian {
                    sigma: (power / 2.0).sqrt(),
                },
                FadingModel::FiniteScatterers { n } => Diffuse::Scatterers {
                    rho: (power / n as f64).sqrt(),
                    n,
                },
            }
        };
        Ok(Self { los, diffuse })
    }

    /// Draws one complex gain.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.diffuse {
            Diffuse::None => self.los,
            Diffuse::Gaussian { sigma } => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                self.los + Complex64::new(re, im) * sigma
            }
            Diffuse::Scatterers { rho, n } => {
                let sum = (0..n).fold(Complex64::new(0.0, 0.0), |acc, _| {
                    let (s, c) = (rng.random::<f64>() * TAU).sin_cos();
                    acc + Complex64::new(c, s)
                });
                self.los + sum * rho
            }
        }
    }
}

/// One gain from the Gaussian-limit model.
pub fn sample_rician_gaussian<R: Rng + ?Sized>(
    params: &RicianParams,
    rng: &mut R,
) -> Result<Complex64> {
    if params.model != FadingModel::GaussianLimit {
        return Err(Error::Parameter(format!(
            "expected the Gaussian-limit model, got {:?}",
            params.model
        )));
    }
    Ok(FadingSampler::new(params)?.sample(rng))
}

/// One gain from the finite-scatterer model.
pub fn sample_rician_finite_n<R: Rng + ?Sized>(
    params: &RicianParams,
    rng: &mut R,
) -> Result<Complex64> {
    if !matches!(params.model, FadingModel::FiniteScatterers { .. }) {
        return Err(Error::Parameter(format!(
            "expected the finite-scatterer model, got {:?}",
            params.model
        )));
    }
    Ok(FadingSampler::new(params)?.sample(rng))
}

/// Noise spectral density for a given Eb/N0: `N0 = Es / (log2(M) · 10^(Eb/N0 / 10))`.
pub fn ebn0_to_n0(ebn0_db: f64, m: u32, es: f64) -> Result<f64> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "constellation size must be a power of two >= 2, got {m}"
        )));
    }
    if !(es > 0.0 && es.is_finite()) {
        return Err(Error::Parameter(format!(
            "symbol energy must be positive, got {es}"
        )));
    }
    if !ebn0_db.is_finite() {
        return Err(Error::Parameter(format!(
            "Eb/N0 must be finite, got {ebn0_db} dB"
        )));
    }
    Ok(es / (m.trailing_zeros() as f64 * 10f64.powf(ebn0_db / 10.0)))
}

/// Receiver noise level for unit-energy symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub ebn0_db: f64,
    pub n0: f64,
    pub es: f64,
}

impl NoiseSpec {
    pub fn new(ebn0_db: f64, m: u32) -> Result<Self> {
        let n0 = ebn0_to_n0(ebn0_db, m, 1.0)?;
        if n0 <= 0.0 {
            return Err(Error::Parameter(format!(
                "Eb/N0 of {ebn0_db} dB underflows the noise density"
            )));
        }
        Ok(Self {
            ebn0_db,
            n0,
            es: 1.0,
        })
    }

    /// Circular complex Gaussian sample with `E[|w|²] = n0`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let sigma = (self.n0 / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * sigma
    }
}

/// Gains and received samples of all diversity branches for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchObservation {
    pub gains: Vec<Complex64>,
    pub received: Vec<Complex64>,
}

impl BranchObservation {
    pub fn with_branches(branches: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            gains: vec![zero; branches],
            received: vec![zero; branches],
        }
    }

    pub fn branches(&self) -> usize {
        self.gains.len()
    }
}

/// Sends `symbol` over `branches` independent fading branches.
pub fn transmit<R: Rng + ?Sized>(
    symbol: Complex64,
    branches: usize,
    fading: &FadingSampler,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<BranchObservation> {
    if branches == 0 {
        return Err(Error::Parameter(
            "diversity order must be at least 1".into(),
        ));
    }
    let mut obs = BranchObservation::with_branches(branches);
    transmit_into(symbol, fading, noise, rng, &mut obs);
    Ok(obs)
}

/// [`transmit`] into a reused buffer; the branch count is `obs.branches()`.
#[inline]
pub fn transmit_into<R: Rng + ?Sized>(
    symbol: Complex64,
    fading: &FadingSampler,
    noise: &NoiseSpec,
    rng: &mut R,
    obs: &mut BranchObservation,
) {
    for (h, r) in obs.gains.iter_mut().zip(obs.received.iter_mut()) {
        *h = fading.sample(rng);
        *r = *h * symbol + noise.sample(rng);
    }
}
