//! Exact, finite models for covering dimension, mean dimension and
//! embeddings of dynamical systems.

pub mod blocksys;
pub mod cover;
pub mod dynsys;
pub mod embed;
pub mod error;
pub mod cube;
pub mod linalg;
mod lp;
pub mod rational;
pub mod simplicial;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Q;
