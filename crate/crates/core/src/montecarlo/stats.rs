use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Bit error rate: erroneous bits over transmitted bits.
pub fn ber_of(bit_errors: u64, bits_sent: u64) -> Result<f64> {
    if bits_sent == 0 {
        return Err(Error::UndefinedEstimate);
    }
    if bit_errors > bits_sent {
        return Err(Error::Parameter(format!(
            "{bit_errors} errors out of {bits_sent} trials"
        )));
    }
    Ok(bit_errors as f64 / bits_sent as f64)
}

/// Two-sided Wilson score interval for a binomial proportion.
pub fn wilson_ci(errors: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    let p = ber_of(errors, trials)?;
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Parameter(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if errors == 0 {
        0.0
    } else {
        ((center - half) / denom).clamp(0.0, p)
    };
    let high = if errors == trials {
        1.0
    } else {
        ((center + half) / denom).clamp(p, 1.0)
    };
    Ok((low, high))
}

/// Binomial standard error `sqrt(p(1-p)/n)`.
pub fn binomial_std_err(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
