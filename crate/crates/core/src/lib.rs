//! Randomized compiling as a circuit pass, exact noisy density-matrix
//! simulation, cycle benchmarking with error reconstruction, and the
//! analysis metrics used to score algorithm performance.

pub mod benchmark;
pub mod channel;
pub mod circuit;
pub mod clifford;
pub mod compile;
pub mod device;
pub mod distribution;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod linalg;
pub mod metrics;
pub mod model_fit;
pub mod noise;
pub mod pauli;
pub mod ptm;
pub mod rc;
pub mod seeding;
pub mod sim;

pub use error::{Error, Result};
