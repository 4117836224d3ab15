//! Reflecting random walks on the quarter plane, their level-infinite QBD
//! approximations, and computable relative error bounds for the
//! approximation of time-averaged functionals.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certificate;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod qbd;

pub use error::{Error, Result};
