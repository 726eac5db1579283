// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod eigensolve;
pub mod error;
pub mod gauge;
pub mod io;
pub mod model;
pub mod oracle2d;
pub mod radial;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
