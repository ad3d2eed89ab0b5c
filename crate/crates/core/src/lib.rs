//! Approximation algorithms for maximum-of-norm load balancing and
//! k-center clustering, with fair stochastic variants and exact oracles.

pub mod cluster;
pub mod error;
pub mod load;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod fair;
pub mod gen;
mod search;
pub mod sparsify;

pub use error::{Error, Result};
pub use model::*;
