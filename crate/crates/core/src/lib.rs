//! Prior-free compression and simulation of one-way and interactive channels over
//! finite alphabets, with exact type-class machinery and explicit cost accounting.

// `!(v >= 0.0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod info;
pub mod oracles;
pub mod protocols;
pub mod randomness;
pub mod types;

pub use error::{Error, Result};
