#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod linalg;
pub mod precond;
pub mod sketch;
pub mod solver;
pub mod svrg;

pub use error::{Error, Result};
