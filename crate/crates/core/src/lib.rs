pub mod algebra;
pub mod cli;
pub mod error;
pub mod expectation;
pub mod inclusion;
pub mod module;
pub mod numkernel;
pub mod random;
pub mod sampling;
pub mod synthesis;

pub use error::{Error, Result};
