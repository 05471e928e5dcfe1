//! Simulator for a coined quantum walk on a circle of coherent states in a
//! cavity: a two-level atom is the coin, the cavity field is the walker, and
//! cavity loss drives the walk toward a classical random walk.

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod linalg;
pub mod measurement;
pub mod walk;

pub use error::{Error, Result};
