#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coefficients;
pub mod discretization;
pub mod error;
pub mod function_spaces;
pub mod quadrature;
pub mod evolution;
pub mod analysis;
pub mod cli;

pub use error::{Error, Hypothesis, Result};
