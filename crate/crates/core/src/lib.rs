//! Simulation library for gate-modulated superconductor–semiconductor–
//! superconductor (SC–Sm–SC) junctions.
//!
//! Internal units are SI throughout. The modules build on each other:
//! [`constants`] → [`numerics`] → [`junction`] → [`circuits`] / [`noise`],
//! with [`config`] and [`run`] providing the file-driven front end used by
//! the `sssim` binary.

pub mod circuits;
pub mod config;
pub mod constants;
pub mod error;
pub mod junction;
pub mod noise;
pub mod numerics;
pub mod run;

pub use error::{Error, ErrorClass, Result};
