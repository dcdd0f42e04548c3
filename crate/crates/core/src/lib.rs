//! Structural calibration toolkit for a two-channel model of AI and
//! inequality.
//!
//! AI adds an ability-independent output floor that compresses within-task
//! dispersion (the equalizing channel) while raising the output elasticity of
//! concentrated complementary assets (the concentrating channel). The crate
//! provides the closed forms, a method-of-simulated-moments calibration with
//! bootstrap inference and sensitivity diagnostics, scenario sweeps, a Monte
//! Carlo oracle for every closed form, and an occupational wage-dispersion
//! regression harness.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod bootstrap;
pub mod calib;
pub mod error;
pub mod microsim;
pub mod model;
pub mod regress;
pub mod scenarios;
pub mod seed;

pub use error::{Error, Result};
pub use model::{FixedEnv, MomentVector, StructuralParams, TaskTech};
