// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corpus;
pub mod cz;
pub mod dyadic_ops;
pub mod error;
pub mod experiments;
pub mod lorentz;
pub mod report;
pub mod stepfn;
pub mod suites;

pub use error::{Error, Result};
