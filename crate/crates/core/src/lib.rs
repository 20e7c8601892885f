//! Pilot-aided uplink channel estimation for distributed MIMO with a 1-bit
//! radio-over-fiber fronthaul.
//!
//! The crate synthesizes the sign-quantized RF observations of a single
//! access point under three fidelity models, estimates the frequency-domain
//! channel with a deep-unfolded maximum-likelihood estimator and with a
//! Bussgang LMMSE baseline, and drives the NMSE sweeps used to compare them.
//!
//! Module map:
//!
//! - [`model`]: linear operators, channel/dither/noise sampling, the three
//!   uplink observation models, AGC and comparator impairments.
//! - [`estimators`]: ML objective (exact and sigmoid-smoothed), Wirtinger
//!   gradient, unfolded layers, Bussgang LMMSE.
//! - [`training`]: reverse-mode gradient through the unrolled layers, Adam,
//!   the training loop.
//! - [`experiments`]: NMSE metric, dither and SNR sweeps, CSV/SVG output.
//! - [`selftest`]: quick oracle checks behind the `selftest` subcommand.

pub mod config;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod model;
pub mod rng;
pub mod selftest;
pub mod training;

pub use config::SystemConfig;
pub use error::{Error, Result};
