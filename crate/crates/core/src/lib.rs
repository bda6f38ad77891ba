#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod dd;
pub mod error;
pub mod integrate;
pub mod kernel;
pub mod oracle;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod specialfn;

pub use error::{Error, Result};
