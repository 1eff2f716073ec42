pub mod boundary;
pub mod cylinder;
pub mod error;
pub mod flow;
pub mod harness;
pub mod invariants;
pub mod lattice;

pub use error::{Error, Result};
