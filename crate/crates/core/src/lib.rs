//! Outlier-robust Bayesian optimization with robust conjugate GP posteriors.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod algorithms;
pub mod design;
pub mod error;
pub mod gp;
pub mod kernels;
mod linalg;
pub mod objectives;
mod posterior;
pub mod rcgp;
pub mod schedules;
pub mod streams;
pub mod weights;

pub use error::{Error, Result};
