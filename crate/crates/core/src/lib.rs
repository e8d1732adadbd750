//! Online influence maximization under local feedback on sparse
//! inhomogeneous random graphs.

pub mod bandit;
pub mod branching;
pub mod config;
pub mod error;
pub mod feedback;
pub mod graph;
pub mod harness;
pub mod validation;

pub use error::{Error, Result};
