pub mod altmodels;
pub mod dataset;
pub mod error;
pub mod gof;
pub mod ingest;
mod optimize;
pub mod powerlaw;
pub mod rng;
pub mod sampler;
pub mod scaling;
pub mod special;

pub use error::{Error, Result};
