pub mod axioms;
pub mod battery;
pub mod chiral;
pub mod classical;
pub mod error;
pub mod exec;
pub mod fock;
pub mod laurent;
pub mod linalg;
pub mod parse;
pub mod poisson;
pub mod sample;
pub mod slices;
pub mod vops;

pub use error::{Error, Result};
