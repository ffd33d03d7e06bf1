//! Moment exponents of ideal-class counting functions computed from finite
//! group data, with exact imaginary-quadratic ground truth and synthetic
//! Chebotarev-sampled coefficient streams.

pub mod abelian;
pub mod chartheory;
pub mod cli;
pub mod cyclo;
pub mod error;
pub mod fixtures;
pub mod moments;
pub mod permgroup;
pub mod quadfield;
pub mod sampler;

pub use error::{Error, Result};
