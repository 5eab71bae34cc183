//! Simulation of the random monochromatic plane wave, nodal domain counting,
//! and an analytic lower bound on the nodal domain constant checked by Monte
//! Carlo.

pub mod bound_engine;
pub mod circle_probe;
pub mod cli;
pub mod error;
pub mod field_sampler;
pub mod nodal_counter;
pub mod special_functions;
pub mod verifier;

pub use error::{Error, Result};
