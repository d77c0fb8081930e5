//! Single-photon transport through a chain of two-level atoms coupled to a
//! one-dimensional waveguide.
//!
//! Two solvers share one data model:
//!
//! * [`time_domain`] integrates the retarded delay equations for the atomic
//!   amplitudes and reconstructs the photon spectra at finite times;
//! * [`freq_domain`] solves the stationary linear system per wavevector and
//!   returns the outgoing spectra directly.
//!
//! Closed-form one- and two-atom results live next to each solver and are
//! used as cross-checks. [`observables`] turns spectra and trajectories into
//! reflectivities, spectral features, pulse shapes and concurrence.
//!
//! Units: lengths are measured in resonant wavelengths (`k_a = 2π`), the
//! group velocity is 1, the pulse width `Δ` is an inverse length and the
//! waveguide coupling is `Γ = η·Δ·v_g`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod faddeeva;
pub mod freq_domain;
pub mod model;
pub mod observables;
pub mod pulse;
pub mod quadrature;
pub mod time_domain;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use model::{
    validate, Chain, GridSpec, KGrid, PulseShape, PulseSpec, Scenario, ScenarioInputs,
    SpectralSolution, SystemConfig, GROUP_VELOCITY, RESONANT_WAVEVECTOR,
};
pub use observables::{SpectralFeature, TransportSummary};
pub use time_domain::{AmplitudeTrajectory, DdeSettings, Interpolation, Retardation};
