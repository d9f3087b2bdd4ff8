pub mod dgp;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod localtime;
pub mod models;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod teststat;

pub use error::{Error, Result};
