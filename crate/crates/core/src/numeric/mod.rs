//! Exact and floating arithmetic shared by every module.

mod number;
mod rational;
mod scalar;
mod surd;

pub use number::Number;
pub use rational::{
    approximate_rational, format_rational, parse_rational, ratio, rational_from_json, rational_to_f64,
    ParseRationalError,
};
pub use scalar::{InexactValue, Scalar};
pub use surd::Surd;

pub use num_rational::BigRational;
