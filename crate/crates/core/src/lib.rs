//! Elo-style rating with generalized outcome models.
//!
//! The crate covers the ordinal outcome model and its scale conversions,
//! the online rating engine, convergence and noise diagnostics, parameter
//! identification from outcome data, predictive evaluation, and synthetic
//! tournament simulation.

pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod identification;
pub mod math;
pub mod outcome_model;
pub mod rating_engine;
pub mod simulation;

pub use error::{Error, Result};
