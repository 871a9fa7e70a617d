//! zw-measures on the Gelfand-Tsetlin graph.

pub mod combinatorics;
pub mod coupling;
pub mod error;
pub mod fluctuation;
pub mod growth;
pub mod rng;
pub mod special;
pub mod zw;

pub use error::{Error, Result};
