pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod landscape;
pub mod linalg;
pub mod models;
pub mod sambe;
pub mod sweep;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use faer::c64;
