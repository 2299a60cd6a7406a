//! Link-level bit error rate simulation of M-PSK and M-QAM over Rician fading
//! with L-branch maximal-ratio combining, plus a semi-analytic reference.
//!
//! The pipeline per symbol is
//! [`modem`] (bits to points) → [`channel`] (fading and noise per branch) →
//! [`receiver`] (MRC and nearest-point decision) → [`modem`] (points to bits).
//! [`montecarlo`] drives it to a stopping rule and [`theory`] provides the
//! independent reference curves.

pub mod channel;
pub mod error;
pub mod modem;
pub mod montecarlo;
pub mod receiver;
pub mod rng;
pub mod theory;

pub use num_complex::Complex64;

pub use channel::{BranchObservation, FadingModel, FadingSampler, NoiseSpec, RicianParams};
pub use error::{Error, Result};
pub use modem::{build_psk, build_qam, Constellation, ConstellationPoint, Modulation, Scheme};
pub use montecarlo::{
    ber_of, run_point, run_sweep, wilson_ci, BerEstimate, SimPoint, StoppingRule, SweepGrid,
};
pub use receiver::{detect_nearest, mrc_combine, DecisionStatistic};
pub use theory::{avg_err_rician_mrc, OracleEstimate, TheoryCurve};
