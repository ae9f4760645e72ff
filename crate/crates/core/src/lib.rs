//! La-cross qLDPC codes with teleported logical gates: code construction,
//! logical operators, circuit compilation, Pauli-frame simulation and BP+OSD
//! decoding.

pub mod circuit;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod logicals;
pub mod pauli;
pub mod sim;

pub use error::{Error, Result};
