//! Cable sizing and drag identification for tether-powered multirotors.
//!
//! The crate is organised bottom-up:
//!
//! - [`motor`]: tabulated motor power/thrust curves and their inverse.
//! - [`tether`]: conductor resistance, tether mass and transferable power.
//! - [`power`]: available/necessary thrust and ground-side power demand.
//! - [`flightlog`]: flight-log CSV ingestion and drag-force extraction.
//! - [`drag`]: drag model and its nonlinear least-squares fit.
//! - [`equilibrium`]: tether drag and the static forward-flight pitch.
//! - [`optimizer`]: conductor cross-section selection and motor comparison.
//! - [`config`] and [`report`]: JSON configuration and deterministic output.

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod drag;
pub mod equilibrium;
pub mod error;
pub mod flightlog;
pub mod motor;
pub mod optimizer;
pub mod power;
pub mod presets;
pub mod report;
pub mod scalar;
pub mod synth;
pub mod tether;

pub use error::{Error, Result};

/// Standard gravity in m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Sea-level standard air density in kg/m³.
pub const SEA_LEVEL_AIR_DENSITY: f64 = 1.225;
