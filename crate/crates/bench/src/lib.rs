//! Shared fixtures for the criterion benches.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riclink::{Modulation, RicianParams, SimPoint, StoppingRule};

/// Received samples scattered around random points of `c`.
pub fn noisy_samples(
    c: &riclink::Constellation,
    count: usize,
    spread: f64,
    seed: u64,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = c.symbol(rng.random_range(0..c.m()));
            s + Complex64::new(
                rng.random_range(-spread..spread),
                rng.random_range(-spread..spread),
            )
        })
        .collect()
}

/// A cell that stops after exactly `bits` bits.
pub fn fixed_length_point(modulation: Modulation, diversity: u32, bits: u64) -> SimPoint {
    SimPoint {
        modulation,
        ebn0_db: 6.0,
        diversity,
        rician: RicianParams::gaussian(5.0),
        stop: StoppingRule {
            min_bit_errors: u64::MAX,
            max_bits: bits,
            batch_bits: bits.min(10_000),
        },
        seed: 1,
    }
}
