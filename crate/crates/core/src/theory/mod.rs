//! Semi-analytic error-rate reference.
//!
//! Conditional on the channel, the post-MRC symbol SNR is
//! `γ = (Es/N0) · Σ|h_ℓ|²` and the symbol error probability is an exact AWGN
//! expression. The reference averages that expression over sampled gains, so
//! only the fading is random; the noise is integrated out analytically.
//! Bit error rates use the Gray approximation `BER ≈ SER / log2(M)`.

mod quadrature;

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use crate::channel::FadingModel;
use crate::channel::{FadingSampler, RicianParams};
use crate::error::{Error, Result};
use crate::modem::{Modulation, Scheme};
use crate::rng::{derive_seed, stream_rng, CHANNEL_STREAM};

pub use quadrature::GaussLegendre;

/// Split point of each half of the M-PSK integral: graded panels below, uniform above.
const PSK_SPLIT: f64 = 0.5;
/// Halvings of the graded section; the rest of `[0, PSK_SPLIT]` is ~1e-11 wide.
const PSK_GRADED_PANELS: usize = 36;
const PSK_GRADED_POINTS: usize = 8;
const PSK_UNIFORM_PANELS: usize = 8;
const PSK_UNIFORM_POINTS: usize = 16;

/// Gain draws per reference value unless the caller asks for more.
pub const DEFAULT_DRAWS: usize = 1_000_000;

const CHUNK: usize = 1 << 14;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// M-PSK symbol error probability in AWGN at symbol SNR `gamma_s`.
pub fn awgn_ser_psk(gamma_s: f64, m: u32) -> f64 {
    PskSer::new(m, 1).ser(gamma_s)
}

/// Square M-QAM symbol error probability in AWGN.
pub fn awgn_ser_qam_square(gamma_s: f64, m: u32) -> Result<f64> {
    let modulation = Modulation::qam(m);
    modulation.validate()?;
    if !modulation.is_square_qam() {
        return Err(Error::UnsupportedModulation(modulation.to_string()));
    }
    Ok(square_qam_ser(gamma_s, m))
}

fn square_qam_ser(gamma_s: f64, m: u32) -> f64 {
    let m = m as f64;
    let p = 2.0 * (1.0 - m.sqrt().recip()) * q_function((3.0 * gamma_s / (m - 1.0)).sqrt());
    1.0 - (1.0 - p) * (1.0 - p)
}

/// M-PSK error probability with the integral nodes precomputed.
///
/// For `M > 4`: `SER = (1/π) ∫₀^{π−π/M} exp(−γ sin²(π/M) / sin²θ) dθ`.
/// Folding about `π/2` gives `(1/π) [I(0) + I(π/M)]` with
/// `I(lo) = ∫_lo^{π/2} exp(−a / sin²φ) dφ`. At small `a` that integrand switches
/// on sharply near `φ = √a`, so `[lo, 0.5]` is covered by geometrically
/// shrinking panels and `[0.5, π/2]` by uniform ones. `refine` multiplies the
/// panel count of both sections.
#[derive(Debug, Clone)]
pub struct PskSer {
    m: u32,
    /// `(sin²(π/M) / sin²φ_j, w_j / π)`, ascending in the first field.
    terms: Vec<(f64, f64)>,
}

impl PskSer {
    pub fn new(m: u32, refine: usize) -> Self {
        let terms = if m > 4 {
            let a = (PI / m as f64).sin().powi(2);
            let mut nodes = half_integral_nodes(0.0, refine);
            nodes.extend(half_integral_nodes(PI / m as f64, refine));
            let mut terms: Vec<_> = nodes
                .into_iter()
                .map(|(phi, w)| (a / phi.sin().powi(2), w / PI))
                .collect();
            terms.sort_by(|x, y| x.0.total_cmp(&y.0));
            terms
        } else {
            Vec::new()
        };
        Self { m, terms }
    }

    pub fn ser(&self, gamma_s: f64) -> f64 {
        match self.m {
            2 => q_function((2.0 * gamma_s).sqrt()),
            4 => {
                let p = q_function(gamma_s.sqrt());
                2.0 * p - p * p
            }
            _ => {
                // Terms are sorted by exponent; stop once they are e^-40 below the largest.
                let floor = self.terms.first().map_or(0.0, |t| t.0) * gamma_s + 40.0;
                self.terms
                    .iter()
                    .take_while(|&&(c, _)| gamma_s * c <= floor)
                    .map(|&(c, w)| w * (-gamma_s * c).exp())
                    .sum()
            }
        }
    }
}

/// Quadrature nodes for `∫_lo^{π/2}`, graded toward zero below [`PSK_SPLIT`].
fn half_integral_nodes(lo: f64, refine: usize) -> Vec<(f64, f64)> {
    let refine = refine.max(1);
    let graded = GaussLegendre::new(PSK_GRADED_POINTS);
    let uniform = GaussLegendre::new(PSK_UNIFORM_POINTS);
    let ratio = 0.5f64.powf(1.0 / refine as f64);
    let panels = PSK_GRADED_PANELS * refine;

    let mut nodes = uniform.composite(PSK_SPLIT, PI / 2.0, PSK_UNIFORM_PANELS * refine);
    let mut hi = PSK_SPLIT;
    for _ in 0..panels {
        let low = (hi * ratio).max(lo);
        nodes.extend(graded.composite(low, hi, 1));
        if low <= lo {
            return nodes;
        }
        hi = low;
    }
    nodes.extend(graded.composite(lo, hi, 1));
    nodes
}

/// Conditional AWGN symbol error probability for a supported modulation.
#[derive(Debug, Clone)]
pub enum ConditionalSer {
    Psk(PskSer),
    SquareQam(u32),
}

impl ConditionalSer {
    pub fn new(modulation: Modulation) -> Result<Self> {
        modulation.validate()?;
        match modulation.scheme {
            Scheme::Psk => Ok(Self::Psk(PskSer::new(modulation.m, 1))),
            Scheme::Qam if modulation.is_square_qam() => Ok(Self::SquareQam(modulation.m)),
            Scheme::Qam => Err(Error::UnsupportedModulation(modulation.to_string())),
        }
    }

    pub fn ser(&self, gamma_s: f64) -> f64 {
        match self {
            Self::Psk(p) => p.ser(gamma_s),
            Self::SquareQam(m) => square_qam_ser(gamma_s, *m),
        }
    }
}

/// Reference error rates with their Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub ser: f64,
    pub ser_std_err: f64,
    pub ber: f64,
    pub ber_std_err: f64,
    pub draws: usize,
}

/// Averages the conditional SER over `draws` samples of the L-branch MRC gain.
///
/// Deterministic in `seed`. Reusing one seed across an Eb/N0 axis reuses the
/// same gain samples, which keeps the resulting curve monotone.
pub fn avg_err_rician_mrc(
    modulation: Modulation,
    rician: &RicianParams,
    diversity: u32,
    ebn0_db: f64,
    draws: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    let conditional = ConditionalSer::new(modulation)?;
    let fading = FadingSampler::new(rician)?;
    if diversity == 0 {
        return Err(Error::Parameter(
            "diversity order must be at least 1".into(),
        ));
    }
    if draws < 2 {
        return Err(Error::Parameter(
            "the reference needs at least two draws".into(),
        ));
    }
    if !ebn0_db.is_finite() {
        return Err(Error::Parameter(format!(
            "Eb/N0 must be finite, got {ebn0_db} dB"
        )));
    }
    let n = modulation.bits_per_symbol() as f64;
    let es_n0 = n * 10f64.powf(ebn0_db / 10.0);

    let chunks = draws.div_ceil(CHUNK);
    let moments = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(derive_seed(seed, &[chunk as u64]), CHANNEL_STREAM);
            let len = CHUNK.min(draws - chunk * CHUNK);
            let mut acc = Moments::default();
            for _ in 0..len {
                let gain: f64 = (0..diversity)
                    .map(|_| fading.sample(&mut rng).norm_sqr())
                    .sum();
                acc.push(conditional.ser(es_n0 * gain));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);

    let ser = moments.mean;
    let ser_std_err = (moments.m2 / (moments.count - 1.0) / moments.count).sqrt();
    Ok(OracleEstimate {
        ser,
        ser_std_err,
        ber: ser / n,
        ber_std_err: ser_std_err / n,
        draws,
    })
}

/// Seed shared by every Eb/N0 point of one reference curve.
pub fn curve_seed(
    master: u64,
    modulation: Modulation,
    diversity: u32,
    rician: &RicianParams,
) -> u64 {
    let (model_tag, scatterers) = match rician.model {
        FadingModel::GaussianLimit => (0, 0),
        FadingModel::FiniteScatterers { n } => (1, n as u64),
    };
    derive_seed(
        master,
        &[
            u64::from_le_bytes(*b"theory\0\0"),
            (modulation.scheme == Scheme::Qam) as u64,
            modulation.m as u64,
            diversity as u64,
            rician.k_factor.to_bits(),
            rician.los_phase.to_bits(),
            model_tag,
            scatterers,
        ],
    )
}

/// Running mean and sum of squared deviations (Welford, Chan et al. merge).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Reference BER curve over an Eb/N0 axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCurve {
    pub modulation: Modulation,
    pub rician: RicianParams,
    pub diversity: u32,
    /// `(Eb/N0 in dB, estimate)`.
    pub points: Vec<(f64, OracleEstimate)>,
}

impl TheoryCurve {
    pub fn compute(
        modulation: Modulation,
        rician: &RicianParams,
        diversity: u32,
        ebn0_db: &[f64],
        draws: usize,
        seed: u64,
    ) -> Result<Self> {
        let points = ebn0_db
            .iter()
            .map(|&e| {
                avg_err_rician_mrc(modulation, rician, diversity, e, draws, seed).map(|o| (e, o))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            modulation,
            rician: *rician,
            diversity,
            points,
        })
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // Reference values from an independent 40-digit evaluation (mpmath).
    const Q_REF: [(f64, f64); 10] = [
        (0.0, 0.5),
        (0.5, 0.30853753872598689636),
        (1.0, 0.15865525393145705141),
        (2.0, 0.0227501319481792072),
        (3.0, 0.0013498980316300945267),
        (5.0, 2.8665157187919391167e-7),
        (7.0, 1.2798125438858350044e-12),
        (10.0, 7.619853024160526066e-24),
        (-1.0, 0.84134474606854294859),
        (-3.0, 0.99865010196836990547),
    ];

    const PSK_REF: [(u32, f64, f64); 6] = [
        (8, 1.0, 0.57690557732176902102),
        (8, 10.0, 0.087004760116903288267),
        (16, 10.0, 0.38295165945166803181),
        (16, 100.0, 0.0057979636243070010119),
        (64, 100.0, 0.48773131095863689411),
        (32, 3.1622776601683795, 0.80514489089701432529),
    ];

    #[test]
    fn q_function_relative_accuracy() {
        for (x, q) in Q_REF {
            assert!(((q_function(x) - q) / q).abs() < 1e-10, "Q({x})");
        }
        for x in [-4.0, -0.3, 0.7, 2.5] {
            assert!((q_function(-x) - (1.0 - q_function(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn psk_ser_matches_reference_integral() {
        for (m, g, want) in PSK_REF {
            let got = awgn_ser_psk(g, m);
            assert!(
                ((got - want) / want).abs() < 1e-8,
                "M={m} γ={g}: {got} vs {want}"
            );
        }
        assert!((awgn_ser_psk(1.0, 2) - 0.078649603525142565329).abs() < 1e-15);
        assert!((awgn_ser_psk(10.0, 4) - 0.0015647896369452098072).abs() < 1e-15);
    }

    #[test]
    fn pure_noise_ser_is_chance() {
        for n in 1..=10 {
            let m = 1u32 << n;
            let want = (m - 1) as f64 / m as f64;
            assert!((awgn_ser_psk(0.0, m) - want).abs() < 1e-12, "M={m}");
        }
        assert!((awgn_ser_qam_square(0.0, 4).unwrap() - 0.75).abs() < 1e-15);
        assert!(awgn_ser_qam_square(1e9, 16).unwrap() < 1e-300);
    }

    #[test]
    fn doubling_quadrature_is_converged() {
        for m in [8, 16, 32, 64, 256, 1024] {
            let base = PskSer::new(m, 1);
            let fine = PskSer::new(m, 2);
            for g in [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0, 1e4] {
                assert!((base.ser(g) - fine.ser(g)).abs() < 1e-9, "M={m} γ={g}");
            }
        }
    }

    #[test]
    fn qpsk_matches_two_dimensional_integration() {
        // P(correct) = mass of the noise density over the decision quadrant,
        // by composite Simpson on a 2-D grid.
        let gamma = 10.0f64;
        let a = gamma.sqrt(); // per-axis offset with unit noise variance
        let pdf =
            |x: f64, y: f64| (-(x - a).powi(2) / 2.0 - (y - a).powi(2) / 2.0).exp() / (2.0 * PI);
        let (hi, n) = (a + 12.0, 2400usize);
        let h = hi / n as f64;
        let simpson = |i: usize| match i {
            0 => 1.0,
            _ if i == n => 1.0,
            _ if i % 2 == 1 => 4.0,
            _ => 2.0,
        };
        let mut mass = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                mass += simpson(i) * simpson(j) * pdf(i as f64 * h, j as f64 * h);
            }
        }
        mass *= h * h / 9.0;
        assert!((awgn_ser_psk(gamma, 4) - (1.0 - mass)).abs() < 1e-6);
    }

    #[test]
    fn square_qam_reference_and_unsupported() {
        assert!((awgn_ser_qam_square(10.0, 16).unwrap() - 0.22203085027243793085).abs() < 1e-14);
        assert!((awgn_ser_qam_square(100.0, 64).unwrap() - 0.050270405085956174827).abs() < 1e-14);
        assert!(matches!(
            awgn_ser_qam_square(1.0, 32),
            Err(Error::UnsupportedModulation(_))
        ));
        assert!(ConditionalSer::new(Modulation::qam(512)).is_err());
    }

    #[test]
    fn no_fading_reduces_to_awgn() {
        let est = avg_err_rician_mrc(Modulation::psk(16), &RicianParams::awgn(), 1, 6.0, 1000, 1)
            .unwrap();
        let gamma = 4.0 * 10f64.powf(0.6);
        assert!((est.ser / awgn_ser_psk(gamma, 16) - 1.0).abs() < 1e-12);
        assert!(est.ser_std_err < 1e-12);
    }

    #[test]
    fn rayleigh_bpsk_closed_form() {
        for (db, want) in [
            (0.0, 0.1464466094067262378),
            (5.0, 0.064182685449522940824),
            (10.0, 0.023268705377203842277),
        ] {
            let est = avg_err_rician_mrc(
                Modulation::psk(2),
                &RicianParams::rayleigh(),
                1,
                db,
                DEFAULT_DRAWS,
                3,
            )
            .unwrap();
            assert!(
                (est.ber - want).abs() < 4.0 * est.ber_std_err,
                "{db} dB: {est:?}"
            );
            assert!(est.ber_std_err < 0.01 * want);
        }
    }

    #[test]
    fn diversity_dominates_single_branch() {
        let axis: Vec<f64> = (0..=10).map(f64::from).collect();
        let k5 = RicianParams::gaussian(5.0);
        let one = TheoryCurve::compute(Modulation::psk(16), &k5, 1, &axis, 50_000, 9).unwrap();
        let five = TheoryCurve::compute(Modulation::psk(16), &k5, 5, &axis, 50_000, 9).unwrap();
        for ((_, a), (_, b)) in one.points.iter().zip(&five.points) {
            assert!(b.ber < a.ber);
        }
        for curve in [&one, &five] {
            for w in curve.points.windows(2) {
                assert!(w[1].1.ber <= w[0].1.ber);
            }
            assert!(curve
                .points
                .iter()
                .all(|(_, o)| o.ber > 0.0 && o.ber <= 0.5));
        }
    }
}
