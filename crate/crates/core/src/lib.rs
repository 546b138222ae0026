//! Worst-case integration and L² approximation on Gaussian and Hermite
//! kernel spaces under the standard Gaussian measure, with the transference
//! maps between the two families.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod error;
pub mod experiments;
pub mod hermite_basis;
pub mod kernels;
pub mod linalg;
pub mod transference;
pub mod worst_case;

pub use error::{Error, Result};
