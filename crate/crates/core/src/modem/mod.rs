//! M-PSK and M-QAM constellations with Gray bit labelling.
//!
//! All constellations are complex baseband and normalized to unit average
//! symbol energy. A symbol *index* addresses a point; a *label* is the n-bit
//! word carried by that point. Bit streams are framed MSB-first.

mod qam;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use qam::build_qam;

/// A single bit, always 0 or 1.
pub type Bit = u8;

pub const MAX_M: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Psk,
    Qam,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Psk => "psk",
            Scheme::Qam => "qam",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psk" => Ok(Scheme::Psk),
            "qam" => Ok(Scheme::Qam),
            other => Err(Error::Constellation(format!(
                "unknown scheme `{other}` (expected `psk` or `qam`)"
            ))),
        }
    }
}

/// Modulation family plus constellation size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Modulation {
    pub scheme: Scheme,
    pub m: u32,
}

impl Modulation {
    pub const fn psk(m: u32) -> Self {
        Self {
            scheme: Scheme::Psk,
            m,
        }
    }

    pub const fn qam(m: u32) -> Self {
        Self {
            scheme: Scheme::Qam,
            m,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.m.trailing_zeros()
    }

    /// Square QAM: `log2(M)` even.
    pub fn is_square_qam(&self) -> bool {
        self.scheme == Scheme::Qam && self.bits_per_symbol() % 2 == 0
    }

    /// Checks the size constraints without building anything.
    pub fn validate(&self) -> Result<()> {
        let min = match self.scheme {
            Scheme::Psk => 2,
            Scheme::Qam => 4,
        };
        if !self.m.is_power_of_two() || self.m < min || self.m > MAX_M {
            return Err(Error::Constellation(format!(
                "{} requires M to be a power of two in [{min}, {MAX_M}], got {}",
                self.scheme, self.m
            )));
        }
        Ok(())
    }

    /// Builds the constellation; PSK uses a zero phase offset.
    pub fn build(&self) -> Result<Constellation> {
        match self.scheme {
            Scheme::Psk => build_psk(self.m, 0.0),
            Scheme::Qam => build_qam(self.m),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.m, self.scheme.to_string().to_uppercase())
    }
}

/// One constellation point in I/Q and amplitude/phase form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    pub i: f64,
    pub q: f64,
    /// `sqrt(i² + q²)`.
    pub amp: f64,
    /// `atan2(q, i)` wrapped into `[0, 2π)`.
    pub phase: f64,
}

impl ConstellationPoint {
    pub fn from_iq(i: f64, q: f64) -> Self {
        let mut phase = q.atan2(i).rem_euclid(TAU);
        if phase >= TAU {
            phase = 0.0;
        }
        Self {
            i,
            q,
            amp: i.hypot(q),
            phase,
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.i, self.q)
    }
}

/// Nearest-point search strategy, chosen at construction.
#[derive(Debug, Clone)]
enum Detector {
    /// Round the received angle, then compare the two angular neighbours.
    Phase { offset: f64, step: f64 },
    /// Round each axis to the level grid, then compare the 3x3 neighbourhood.
    /// `cells[y * width + x]` is the symbol index at that grid site, if any.
    Grid {
        width: usize,
        height: usize,
        spacing: f64,
        cells: Vec<Option<u32>>,
    },
}

/// An immutable, unit-energy constellation with its Gray labelling.
#[derive(Debug, Clone)]
pub struct Constellation {
    scheme: Scheme,
    bits_per_symbol: u32,
    points: Vec<ConstellationPoint>,
    symbols: Vec<Complex64>,
    labels: Vec<u32>,
    index_of_label: Vec<u32>,
    phase_offset: f64,
    detector: Detector,
}

/// Binary-reflected Gray code.
#[inline]
pub fn gray_code(index: u32) -> u32 {
    index ^ (index >> 1)
}

/// Inverse of [`gray_code`].
#[inline]
pub fn gray_decode(mut label: u32) -> u32 {
    let mut shift = label >> 1;
    while shift != 0 {
        label ^= shift;
        shift >>= 1;
    }
    label
}

/// M-PSK: point `k` at angle `phase_offset + 2πk/M`, Gray-labelled in angular order.
pub fn build_psk(m: u32, phase_offset: f64) -> Result<Constellation> {
    Modulation::psk(m).validate()?;
    if !phase_offset.is_finite() {
        return Err(Error::Constellation(format!(
            "phase offset must be finite, got {phase_offset}"
        )));
    }
    let step = TAU / m as f64;
    let coords = (0..m).map(|k| match (phase_offset == 0.0, 4 * k % m == 0) {
        // Quarter turns are exact so axis-aligned points have no stray ulps.
        (true, true) => [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][(4 * k / m) as usize],
        _ => {
            let (s, c) = (phase_offset + step * k as f64).sin_cos();
            (c, s)
        }
    });
    let labels = (0..m).map(gray_code).collect();
    Constellation::assemble(
        Scheme::Psk,
        m,
        coords.collect(),
        labels,
        phase_offset,
        Detector::Phase {
            offset: phase_offset,
            step,
        },
    )
}

impl Constellation {
    /// Normalizes `coords` to unit energy and checks the labelling is a bijection.
    fn assemble(
        scheme: Scheme,
        m: u32,
        coords: Vec<(f64, f64)>,
        labels: Vec<u32>,
        phase_offset: f64,
        detector: Detector,
    ) -> Result<Self> {
        debug_assert_eq!(coords.len(), m as usize);
        let energy = coords.iter().map(|&(i, q)| i * i + q * q).sum::<f64>() / m as f64;
        let scale = energy.sqrt().recip();
        let points: Vec<_> = coords
            .iter()
            .map(|&(i, q)| ConstellationPoint::from_iq(i * scale, q * scale))
            .collect();
        let symbols = points.iter().map(ConstellationPoint::as_complex).collect();

        let mut index_of_label = vec![u32::MAX; m as usize];
        for (index, &label) in labels.iter().enumerate() {
            let slot = index_of_label
                .get_mut(label as usize)
                .ok_or_else(|| Error::Constellation(format!("label {label} exceeds M = {m}")))?;
            if *slot != u32::MAX {
                return Err(Error::Constellation(format!(
                    "label {label} assigned twice"
                )));
            }
            *slot = index as u32;
        }

        let detector = match detector {
            Detector::Grid {
                width,
                height,
                spacing,
                cells,
            } => Detector::Grid {
                width,
                height,
                spacing: spacing * scale,
                cells,
            },
            phase => phase,
        };

        Ok(Self {
            scheme,
            bits_per_symbol: m.trailing_zeros(),
            points,
            symbols,
            labels,
            index_of_label,
            phase_offset,
            detector,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn modulation(&self) -> Modulation {
        Modulation {
            scheme: self.scheme,
            m: self.points.len() as u32,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    /// PSK phase offset in radians; zero for QAM.
    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    pub fn points(&self) -> &[ConstellationPoint] {
        &self.points
    }

    /// Points as complex numbers, indexed by symbol index.
    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    #[inline]
    pub fn symbol(&self, index: usize) -> Complex64 {
        self.symbols[index]
    }

    /// Bit label carried by symbol `index`.
    #[inline]
    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Symbol index carrying `label`.
    #[inline]
    pub fn index_of(&self, label: u32) -> usize {
        self.index_of_label[label as usize] as usize
    }

    pub fn average_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.m() as f64
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, pa) in self.symbols.iter().enumerate() {
            for pb in &self.symbols[a + 1..] {
                best = best.min((pa - pb).norm());
            }
        }
        best
    }

    /// Splits `bits` into `log2(M)`-bit words (MSB first) and maps each to its symbol index.
    pub fn map_bits(&self, bits: &[Bit]) -> Result<Vec<usize>> {
        let n = self.bits_per_symbol as usize;
        if bits.len() % n != 0 {
            return Err(Error::Framing {
                len: bits.len(),
                bits_per_symbol: self.bits_per_symbol,
            });
        }
        bits.chunks_exact(n)
            .enumerate()
            .map(|(word, chunk)| {
                let mut label = 0u32;
                for (offset, &b) in chunk.iter().enumerate() {
                    if b > 1 {
                        return Err(Error::InvalidBit {
                            position: word * n + offset,
                            value: b,
                        });
                    }
                    label = (label << 1) | b as u32;
                }
                Ok(self.index_of(label))
            })
            .collect()
    }

    /// Inverse of [`Constellation::map_bits`].
    pub fn demap_bits(&self, indices: &[usize]) -> Result<Vec<Bit>> {
        let n = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(indices.len() * n as usize);
        for &index in indices {
            if index >= self.m() {
                return Err(Error::SymbolOutOfRange { index, m: self.m() });
            }
            let label = self.labels[index];
            bits.extend((0..n).rev().map(|shift| ((label >> shift) & 1) as Bit));
        }
        Ok(bits)
    }

    /// Index of the point closest to `z`; ties go to the lowest index.
    ///
    /// Agrees exactly with [`nearest_index`] over [`Constellation::symbols`] but
    /// only examines a handful of candidates.
    pub fn nearest(&self, z: Complex64) -> usize {
        match &self.detector {
            Detector::Phase { offset, step } => {
                if z.re == 0.0 && z.im == 0.0 {
                    return nearest_index(z, &self.symbols);
                }
                let m = self.m() as i64;
                let k0 = ((z.arg() - offset) / step).round() as i64;
                let candidates = [k0 - 1, k0, k0 + 1].map(|k| k.rem_euclid(m) as usize);
                self.best_of(z, candidates.into_iter())
            }
            Detector::Grid {
                width,
                height,
                spacing,
                cells,
            } => {
                let axis = |v: f64, n: usize| -> usize {
                    let pos = ((v / spacing + (n - 1) as f64) / 2.0).round();
                    pos.clamp(0.0, (n - 1) as f64) as usize
                };
                let (x, y) = (axis(z.re, *width), axis(z.im, *height));
                if cells[y * width + x].is_none() {
                    return nearest_index(z, &self.symbols);
                }
                let xs = x.saturating_sub(1)..=(x + 1).min(width - 1);
                let candidates = (y.saturating_sub(1)..=(y + 1).min(height - 1)).flat_map(|yy| {
                    xs.clone()
                        .filter_map(move |xx| cells[yy * width + xx].map(|i| i as usize))
                });
                self.best_of(z, candidates)
            }
        }
    }

    fn best_of(&self, z: Complex64, candidates: impl Iterator<Item = usize>) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for index in candidates {
            let d = (z - self.symbols[index]).norm_sqr();
            if d < best.0 || (d == best.0 && index < best.1) {
                best = (d, index);
            }
        }
        best.1
    }
}

/// Exhaustive minimum-distance search; ties go to the lowest index.
pub fn nearest_index(z: Complex64, points: &[Complex64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (index, p) in points.iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best.0 {
            best = (d, index);
        }
    }
    best.1
}

/// PSK minimum distance on the unit circle.
pub fn psk_min_distance(m: u32) -> f64 {
    2.0 * (PI / m as f64).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_modulations() -> Vec<Modulation> {
        let psk = (1..=10).map(|n| Modulation::psk(1 << n));
        let qam = (2..=10).map(|n| Modulation::qam(1 << n));
        psk.chain(qam).collect()
    }

    fn angle_close(a: f64, b: f64) -> bool {
        let d = (a - b).rem_euclid(TAU);
        d < 1e-12 || TAU - d < 1e-12
    }

    #[test]
    fn gray_examples() {
        assert_eq!(gray_code(0), 0);
        assert_eq!(gray_code(2), 3);
        assert_eq!(gray_code(3), 2);
        for i in 0..4096 {
            assert_eq!(gray_decode(gray_code(i)), i);
            assert_eq!((gray_code(i) ^ gray_code(i + 1)).count_ones(), 1);
        }
    }

    #[test]
    fn bpsk_is_antipodal() {
        let c = build_psk(2, 0.0).unwrap();
        let s = c.symbols();
        assert!((s[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn qpsk_phases() {
        let c = build_psk(4, 0.0).unwrap();
        for (k, p) in c.points().iter().enumerate() {
            assert!(angle_close(p.phase, k as f64 * PI / 2.0));
            assert!((p.amp - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psk16_with_offset() {
        let c = build_psk(16, 0.19635).unwrap();
        assert_eq!(c.m(), 16);
        assert!((c.points()[0].phase - 0.19635).abs() < 1e-12);
        for (k, p) in c.points().iter().enumerate() {
            assert!(angle_close(p.phase, 0.19635 + TAU * k as f64 / 16.0));
        }
    }

    #[test]
    fn qam4_is_unit_energy_qpsk() {
        let c = build_qam(4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for s in c.symbols() {
            assert!((s.re.abs() - h).abs() < 1e-12 && (s.im.abs() - h).abs() < 1e-12);
        }
    }

    #[test]
    fn qam16_scale_factor() {
        // Unnormalized levels {±1, ±3}: enumerate all 16 points.
        let levels = [-3.0f64, -1.0, 1.0, 3.0];
        let raw: f64 = levels
            .iter()
            .flat_map(|&i| levels.iter().map(move |&q| i * i + q * q))
            .sum::<f64>()
            / 16.0;
        assert_eq!(raw, 10.0);
        let c = build_qam(16).unwrap();
        let corner = c.points().iter().map(|p| p.i.abs()).fold(0.0f64, f64::max);
        assert!((corner - 3.0 / 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn qam64_is_8x8() {
        let c = build_qam(64).unwrap();
        let mut is: Vec<i64> = c
            .points()
            .iter()
            .map(|p| (p.i * 1e9).round() as i64)
            .collect();
        is.sort();
        is.dedup();
        assert_eq!(is.len(), 8);
        assert_eq!(c.m(), 64);
    }

    #[test]
    fn invalid_sizes() {
        for m in [0, 1, 3, 6, 2048] {
            assert!(matches!(build_psk(m, 0.0), Err(Error::Constellation(_))));
        }
        for m in [0, 2, 12, 2048] {
            assert!(matches!(build_qam(m), Err(Error::Constellation(_))));
        }
        assert!(build_psk(8, f64::NAN).is_err());
    }

    #[test]
    fn structural_invariants() {
        for modulation in all_modulations() {
            let c = modulation.build().unwrap();
            let m = c.m();
            assert!((c.average_energy() - 1.0).abs() < 1e-9, "{modulation}");
            let mut seen = vec![false; m];
            for k in 0..m {
                let label = c.label(k) as usize;
                assert!(!seen[label]);
                seen[label] = true;
                assert_eq!(c.index_of(c.label(k)), k);
            }
            for p in c.points() {
                assert!((p.amp - p.i.hypot(p.q)).abs() < 1e-12);
                assert!(angle_close(p.phase, p.q.atan2(p.i)));
                assert!((0.0..TAU).contains(&p.phase));
            }
        }
    }

    #[test]
    fn psk_min_distance_and_gray_adjacency() {
        for n in 1..=10 {
            let m = 1u32 << n;
            let c = build_psk(m, 0.0).unwrap();
            assert!((c.min_distance() - psk_min_distance(m)).abs() < 1e-12);
            assert!(c.points().iter().all(|p| (p.amp - 1.0).abs() < 1e-12));
            if m > 2 {
                for k in 0..c.m() {
                    let next = (k + 1) % c.m();
                    assert_eq!((c.label(k) ^ c.label(next)).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn square_qam_gray_adjacency() {
        for n in [2, 4, 6, 8, 10] {
            let c = build_qam(1 << n).unwrap();
            let d = c.min_distance();
            let s = c.symbols();
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    if ((s[a] - s[b]).norm() - d).abs() < 1e-9 {
                        assert_eq!((c.label(a) ^ c.label(b)).count_ones(), 1, "M={}", 1 << n);
                    }
                }
            }
        }
    }

    #[test]
    fn map_examples() {
        let bpsk = build_psk(2, 0.0).unwrap();
        assert_eq!(bpsk.map_bits(&[0, 1, 0]).unwrap(), vec![0, 1, 0]);
        let qpsk = build_psk(4, 0.0).unwrap();
        assert_eq!(qpsk.map_bits(&[0, 0, 1, 1]).unwrap().len(), 2);
        assert_eq!(qpsk.demap_bits(&[0, 0]).unwrap(), vec![0, 0, 0, 0]);
        let psk16 = build_psk(16, 0.0).unwrap();
        let bits = [1, 0, 1, 1, 0, 0, 1, 0];
        let idx = psk16.map_bits(&bits).unwrap();
        assert_eq!(idx.len(), 2);
        assert_eq!(psk16.demap_bits(&idx).unwrap(), bits);
    }

    #[test]
    fn framing_and_range_errors() {
        let c = build_psk(8, 0.0).unwrap();
        assert_eq!(
            c.map_bits(&[0, 1, 0, 1]),
            Err(Error::Framing {
                len: 4,
                bits_per_symbol: 3
            })
        );
        assert!(matches!(
            c.map_bits(&[0, 2, 0]),
            Err(Error::InvalidBit { position: 1, .. })
        ));
        assert_eq!(
            c.demap_bits(&[8]),
            Err(Error::SymbolOutOfRange { index: 8, m: 8 })
        );
    }

    #[test]
    fn random_streams_round_trip_for_every_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for modulation in all_modulations() {
            let c = modulation.build().unwrap();
            let n = c.bits_per_symbol() as usize;
            let len = 10_000 / n * n;
            let bits: Vec<Bit> = (0..len).map(|_| rng.random_range(0..=1)).collect();
            let idx = c.map_bits(&bits).unwrap();
            assert_eq!(idx.len(), len / n);
            assert_eq!(c.demap_bits(&idx).unwrap(), bits);
        }
    }

    #[test]
    fn nearest_on_points_and_bpsk_sign() {
        for modulation in all_modulations() {
            let c = modulation.build().unwrap();
            for (k, &s) in c.symbols().iter().enumerate() {
                assert_eq!(c.nearest(s), k);
            }
        }
        let bpsk = build_psk(2, 0.0).unwrap();
        assert_eq!(bpsk.nearest(Complex64::new(0.3, 0.0)), 0);
        assert_eq!(bpsk.nearest(Complex64::new(-0.3, 0.0)), 1);
        // Exact tie between the two points.
        assert_eq!(bpsk.nearest(Complex64::new(0.0, 0.7)), 0);
        assert_eq!(nearest_index(Complex64::new(0.0, 0.7), bpsk.symbols()), 0);
    }

    proptest! {
        #[test]
        fn fast_search_matches_exhaustive(
            which in 0usize..19,
            re in -2.0f64..2.0,
            im in -2.0f64..2.0,
        ) {
            let modulation = all_modulations()[which];
            let c = modulation.build().unwrap();
            let z = Complex64::new(re, im);
            prop_assert_eq!(c.nearest(z), nearest_index(z, c.symbols()));
        }

        #[test]
        fn grid_boundaries_match_exhaustive(
            n in 2u32..=10,
            a in -40i32..40,
            b in -40i32..40,
        ) {
            // Points exactly halfway between grid levels hit every tie-break path.
            let c = build_qam(1 << n).unwrap();
            let half = c.min_distance() / 2.0;
            let z = Complex64::new(a as f64 * half, b as f64 * half);
            prop_assert_eq!(c.nearest(z), nearest_index(z, c.symbols()));
        }

        #[test]
        fn scaling_does_not_change_decisions(
            re in -2.0f64..2.0,
            im in -2.0f64..2.0,
            alpha in 0.01f64..100.0,
        ) {
            let c = build_qam(32).unwrap();
            let z = Complex64::new(re, im);
            let scaled: Vec<_> = c.symbols().iter().map(|s| s * alpha).collect();
            prop_assert_eq!(nearest_index(z * alpha, &scaled), nearest_index(z, c.symbols()));
        }
    }
}
