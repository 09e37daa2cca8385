pub mod cli;
pub mod error;
pub mod factorize;
pub mod grammar;
pub mod oracle;
pub mod repair;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
