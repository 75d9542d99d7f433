pub mod autodiff;
pub mod checkpoint;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod loss;
pub mod network;
pub mod physics;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
