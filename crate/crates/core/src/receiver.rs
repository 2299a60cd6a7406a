//! Coherent maximal-ratio combining with perfect CSI and hard decisions.

use num_complex::Complex64;

use crate::channel::BranchObservation;
use crate::error::{Error, Result};
use crate::modem::Constellation;

/// Combiner output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStatistic {
    /// `Σ conj(h) r / Σ |h|²`, an unbiased estimate of the transmitted symbol.
    pub combined: Complex64,
    /// Combining gain `Σ |h|²`.
    pub snr_scale: f64,
}

/// Maximal-ratio combining of all branches.
///
/// Fails with [`Error::DegenerateChannel`] when every gain is zero.
pub fn mrc_combine(obs: &BranchObservation) -> Result<DecisionStatistic> {
    let (num, snr_scale) = obs
        .gains
        .iter()
        .zip(&obs.received)
        .fold((Complex64::new(0.0, 0.0), 0.0), |(num, den), (h, r)| {
            (num + h.conj() * r, den + h.norm_sqr())
        });
    if snr_scale == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    Ok(DecisionStatistic {
        combined: num / snr_scale,
        snr_scale,
    })
}

/// Minimum-distance decision; ties go to the lowest symbol index.
#[inline]
pub fn detect_nearest(stat: &DecisionStatistic, constellation: &Constellation) -> usize {
    constellation.nearest(stat.combined)
}
