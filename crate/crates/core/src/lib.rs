//! Statistically controlled urban layouts, air-to-ground line-of-sight
//! campaigns, and a height-dependent mmWave large-scale fading model for
//! UAV aerial base stations.
//!
//! The pipeline mirrors how the model is built and checked:
//!
//! - [`urbgen`] generates Manhattan, SRU, FUU and HEU cities from built-up
//!   parameters `(alpha, beta, gamma)`.
//! - [`geomlos`] computes link geometry, decides LoS against building prisms
//!   and runs Monte Carlo campaigns.
//! - [`plosmod`] evaluates and fits the elevation-based sigmoid LoS
//!   probability.
//! - [`lsfmod`] evaluates and samples the log-distance path loss with
//!   height-dependent exponent and shadow-fading spread.
//! - [`extract`] re-derives model parameters from link datasets.
//! - [`validate`] compares datasets and models (KL divergence, RMSE).

pub mod error;
pub mod extract;
pub mod geomlos;
pub mod io;
pub mod lsfmod;
pub mod optim;
pub mod plosmod;
pub mod rng;
pub mod tables;
pub mod urbgen;
pub mod validate;

pub use error::{Error, Result};
pub use tables::LayoutKey;
pub use urbgen::{BuiltUpParams, EnvironmentClass, LayoutKind};
