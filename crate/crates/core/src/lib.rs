//! Steady-state spectra of an open three-level cascade driven by a weak probe
//! and a strong coupling field, with Doppler averaging, magnetic-sublevel
//! sums and the Autler-Townes threshold analysis.

pub mod cli;
pub mod doppler;
pub mod error;
pub mod faddeeva;
pub mod lineshape;
pub mod liouville;
pub mod model;
pub mod msublevel;
pub mod quadrature;
pub mod scenario;
pub mod threshold;

pub use doppler::{Engine, Intensities, Simulation, Spectrum};
pub use error::{Error, Result};
pub use model::{DopplerParams, DriveParams, LevelScheme, Preset};
pub use scenario::Scenario;
