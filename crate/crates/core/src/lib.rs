//! Work extraction from coherence and its trade-off against clock resources
//! for composite quantum systems.

pub mod cli;
pub mod clock;
pub mod divergence;
pub mod error;
pub mod io;
pub mod ising;
pub mod linalg;
pub mod model;
pub mod random;
pub mod states;
pub mod tradeoff;
pub mod verify;

pub use error::{Error, Result};
