#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod asymptotics;
pub mod energy;
pub mod error;
pub mod matrix;
pub mod nonlinearity;
pub mod solver;

pub use error::{Error, Result};
