//! Time-averaged weak values as a probe of how quantum measurements collapse.
//!
//! A strong selective measurement and a weak coupling are aimed at the same
//! instant, but a stopwatch of finite resolution scatters their turn-on
//! times. Under instantaneous projective collapse the ensemble is a mixture
//! of the two orderings; under a continuous nonunitary collapse the weak
//! coupling can also land mid-collapse. Both pictures give identical strong
//! measurement statistics, yet different averaged weak values.
//!
//! Modules:
//! - [`operator`]: operators, density operators, projectors, spectra.
//! - [`superop`]: superoperators in Liouville space, adjoints, the collapse
//!   map, tomographic reconstruction and the composition-law solve.
//! - [`collapse`]: ensemble evolution under both collapse pictures.
//! - [`protocol`]: weak values and their time averages, model discrimination.
//! - [`montecarlo`]: seeded sampling of the time averages.
//! - [`pointer`]: exact Gaussian-pointer model of a single weak measurement.
//! - [`hydrogen`]: the electron-spin preset.

pub mod collapse;
pub mod error;
pub mod hydrogen;
pub mod montecarlo;
pub mod operator;
pub mod pointer;
pub mod protocol;
pub mod superop;

pub use error::{DensityViolation, Error, Result};
pub use operator::{
    density_operator_basis, hs_inner, selective_projection, spectral_decompose, validate_density, DensityOperator,
    ObservableSpectral, Operator, Projector, StateVector, Tolerances, C64,
};
pub use protocol::{Averaging, Model, ProtocolConfig, WeakValue};
pub use superop::SuperOp;
