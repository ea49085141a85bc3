//! Ising network models: exact computation, sampling, estimation and the
//! equivalence with multidimensional item response theory.

pub mod bridge;
pub mod data;
pub mod error;
pub mod estimator;
pub mod io;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod study;

pub use data::BinaryDataset;
pub use error::{IsingError, Result};
pub use model::{BinaryState, IsingModel, StateDistribution};
