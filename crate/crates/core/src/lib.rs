//! Simulated two-qubit state tomography with product and SIC measurements.
//!
//! The crate builds the two 16-outcome measurements, draws true states,
//! simulates finite click records, reconstructs states by linear inversion and
//! by maximum likelihood, and scores the estimators by trace-distance power
//! laws and the performance factor `η`.

pub mod error;
pub mod estimate;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod pom;
pub mod rng;
pub mod simulate;
pub mod states;

pub use error::{Error, Result};
