//! Structure files, secondary-structure annotations, output, retrieval and
//! configuration.

mod config;
mod emit;
mod fetch;
mod pdb;
mod ss;

pub use config::*;
pub use emit::*;
pub use fetch::*;
pub use pdb::*;
pub use ss::*;
