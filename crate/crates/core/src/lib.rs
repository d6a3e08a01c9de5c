#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod calculus;
pub mod error;
pub mod ipm;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod problems;
pub mod qp;
pub mod univariate;

pub use error::{Error, Result};
