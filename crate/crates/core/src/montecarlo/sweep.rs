use serde::{Deserialize, Serialize};

use super::{run_point, BerEstimate, SimPoint, StoppingRule};
use crate::channel::{FadingModel, RicianParams};
use crate::error::{Error, Result};
use crate::modem::{Modulation, Scheme};
use crate::rng::derive_seed;

/// Cartesian grid of simulation cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub modulations: Vec<Modulation>,
    pub ebn0_db: Vec<f64>,
    pub diversity: Vec<u32>,
    /// Linear K-factors; `f64::INFINITY` selects the non-fading channel.
    pub k_factors: Vec<f64>,
    pub model: FadingModel,
    pub stop: StoppingRule,
    pub seed: u64,
}

/// Seed of a cell, a hash of the master seed and the cell's parameter values.
///
/// Hashing values rather than grid positions means a cell simulates the same
/// way in any grid that contains it.
pub fn cell_seed(
    master: u64,
    modulation: Modulation,
    ebn0_db: f64,
    diversity: u32,
    rician: &RicianParams,
) -> u64 {
    let (model_tag, scatterers) = match rician.model {
        FadingModel::GaussianLimit => (0, 0),
        FadingModel::FiniteScatterers { n } => (1, n as u64),
    };
    let scheme = match modulation.scheme {
        Scheme::Psk => 0,
        Scheme::Qam => 1,
    };
    derive_seed(
        master,
        &[
            scheme,
            modulation.m as u64,
            ebn0_db.to_bits(),
            diversity as u64,
            rician.k_factor.to_bits(),
            rician.los_phase.to_bits(),
            model_tag,
            scatterers,
        ],
    )
}

impl SweepGrid {
    /// All cells, ordered by modulation, K, diversity, then Eb/N0, as listed.
    pub fn cells(&self) -> Result<Vec<SimPoint>> {
        let axes = [
            ("modulations", self.modulations.is_empty()),
            ("ebn0_db", self.ebn0_db.is_empty()),
            ("diversity", self.diversity.is_empty()),
            ("k_factor", self.k_factors.is_empty()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, empty)| *empty) {
            return Err(Error::Configuration {
                cell: None,
                message: format!("axis `{name}` is empty"),
            });
        }

        let mut cells = Vec::new();
        for &modulation in &self.modulations {
            for &k_factor in &self.k_factors {
                let rician = RicianParams {
                    k_factor,
                    model: self.model,
                    los_phase: 0.0,
                };
                for &diversity in &self.diversity {
                    for &ebn0_db in &self.ebn0_db {
                        let point = SimPoint {
                            modulation,
                            ebn0_db,
                            diversity,
                            rician,
                            stop: self.stop,
                            seed: cell_seed(self.seed, modulation, ebn0_db, diversity, &rician),
                        };
                        point.validate().map_err(|e| Error::Configuration {
                            cell: Some(point.to_string()),
                            message: e.to_string(),
                        })?;
                        cells.push(point);
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// Runs every cell of the grid in [`SweepGrid::cells`] order.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<(SimPoint, BerEstimate)>> {
    grid.cells()?
        .into_iter()
        .map(|p| run_point(&p).map(|est| (p, est)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SweepGrid {
        SweepGrid {
            modulations: vec![Modulation::psk(16)],
            ebn0_db: (0..=10).map(f64::from).collect(),
            diversity: vec![5],
            k_factors: vec![5.0],
            model: FadingModel::GaussianLimit,
            stop: StoppingRule::default(),
            seed: 42,
        }
    }

    #[test]
    fn cartesian_product_size() {
        let mut g = grid();
        assert_eq!(g.cells().unwrap().len(), 11);
        g.modulations.push(Modulation::qam(64));
        g.diversity = vec![1, 2, 3];
        assert_eq!(g.cells().unwrap().len(), 66);
    }

    #[test]
    fn empty_axis_is_rejected() {
        let mut g = grid();
        g.diversity.clear();
        let err = g.cells().unwrap_err();
        assert!(
            matches!(err, Error::Configuration { cell: None, .. }),
            "{err}"
        );
    }

    #[test]
    fn bad_cell_is_identified() {
        let mut g = grid();
        g.modulations.push(Modulation::qam(2));
        match g.cells().unwrap_err() {
            Error::Configuration {
                cell: Some(cell), ..
            } => assert!(cell.contains("2-QAM")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seeds_depend_on_values_not_position() {
        let a = grid().cells().unwrap();
        let mut g = grid();
        g.ebn0_db.reverse();
        let b = g.cells().unwrap();
        assert_eq!(a[0].seed, b[10].seed);
        assert_ne!(a[0].seed, a[1].seed);
    }

    #[test]
    fn diversity_axis_lowers_ber() {
        let g = SweepGrid {
            modulations: vec![Modulation::qam(1024)],
            ebn0_db: vec![2.0],
            diversity: (1..=5).collect(),
            k_factors: vec![5.0],
            model: FadingModel::GaussianLimit,
            stop: StoppingRule {
                min_bit_errors: 20_000,
                ..StoppingRule::default()
            },
            seed: 7,
        };
        let rows = run_sweep(&g).unwrap();
        assert_eq!(rows.len(), 5);
        for pair in rows.windows(2) {
            assert!(pair[1].1.ber <= pair[0].1.ber, "{:?}", pair);
        }
    }
}
