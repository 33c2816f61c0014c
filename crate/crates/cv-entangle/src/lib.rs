//! Entanglement between a damped mechanical oscillator and the continuum of
//! outgoing optical field modes it interacts with.
//!
//! The crate carries two independent evaluation routes for the full
//! oscillator-field logarithmic negativity — a discretized covariance
//! matrix with PPT extraction ([`grid`]) and a Wiener-Hopf spectral
//! factorization of the field symbol ([`wiener_hopf`]) — plus closed-form
//! single-mode machinery ([`modefilter`]), decoherence survival times
//! ([`decoherence`]) and a stochastic validation oracle ([`montecarlo`]).
//!
//! In the high-Q regime the negativity follows the universal law
//! E_N = (1/2) ln[1 + (25/8)(Omega_q/Omega_F)^2], a function of the
//! interaction-to-thermal frequency ratio alone.

pub mod cli;
pub mod decoherence;
pub mod error;
pub mod expsum;
pub mod gaussian;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod modefilter;
pub mod montecarlo;
pub mod params;
pub mod rational;
pub mod simplex;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, EntanglementResult};
pub use params::{build_params, SystemParams, Thermal};
