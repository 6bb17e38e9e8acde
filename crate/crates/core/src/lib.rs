#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cauchy_binet;
pub mod cf;
pub mod cumulants;
pub mod dd;
pub mod divdiff;
pub mod distribution;
pub mod error;
pub mod fft;
pub mod jet;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod special;

pub use error::{Error, Result};
