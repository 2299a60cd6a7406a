//! Distribution checks for fading samples.

/// CDF of `|h|` for Rayleigh fading with `E[|h|²] = 1` (σ² = 1/2 per component).
pub fn rayleigh_cdf(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        -(-r * r).exp_m1()
    }
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Method-of-moments K-factor from samples of `|h|²`.
///
/// With `γ = Var(|h|²) / E[|h|²]²`, a Rician envelope has `γ = (2K+1)/(K+1)²`,
/// so `K = s / (1 - s)` where `s = sqrt(1 - γ)`.
pub fn estimate_k_factor(power: &[f64]) -> f64 {
    let n = power.len() as f64;
    let mean = power.iter().sum::<f64>() / n;
    let var = power.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let gamma = var / (mean * mean);
    let s = (1.0 - gamma).max(0.0).sqrt();
    s / (1.0 - s)
}
