//! IO, file formats and command implementations for the `mimocap` binary.

pub mod commands;
pub mod corrmat;
pub mod error;
pub mod par;
pub mod scenario;

pub use error::{CliError, Result};
