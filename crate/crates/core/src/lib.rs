//! Wiener-chaos analysis of Gaussian and uniform random waves on the
//! two-sphere and the flat two-torus.
//!
//! The crate is organised bottom-up: [`special`] holds scalar kernels,
//! [`chaos`] the exact tensor and Wick algebra, [`wave`] the two wave
//! ensembles, [`functionals`] excursion functionals and closed-form chaos
//! coefficients, [`projector`] the empirical chaos decomposition, and
//! [`experiment`] the reproducible study runner behind the `chaoswave`
//! binary.

pub mod chaos;
pub mod error;
pub mod experiment;
pub mod functionals;
pub mod projector;
pub mod rng;
pub mod special;
pub mod stats;
pub mod wave;

pub use chaos::{MultiIndex, SymmetricTensor};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Study};
pub use projector::{ChaosSpectrum, MehlerOptions};
pub use wave::{FieldKind, FieldSample, Manifold, WaveModel};
