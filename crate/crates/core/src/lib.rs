//! Coarse-grained protein structure prediction by constraint-based assembly
//! of clustered 4-residue fragments.

pub mod energy;
pub mod error;
pub mod fragdb;
pub mod geometry;
pub mod io;
pub mod model;
pub mod search;
pub mod synthetic;
pub mod validate;

pub use error::{Error, Result};
