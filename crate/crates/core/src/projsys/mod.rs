//! Projective systems on the path space, affine branching systems on the
//! unit interval, and the monic σ-algebra check for both.

mod interval;
mod monic;
mod system;

pub use interval::{AffineMap, Interval, IntervalSbfs, IntervalSbfsSpec, MapSpec, Region};
pub use monic::{interval_monic_check, path_monic_check, MonicLevel, MonicReport, MonicVerdict, Obstruction};
pub use system::LambdaProjectiveSystem;

use crate::kgraph::GraphError;
use crate::measures::MeasureError;
use crate::numeric::InexactValue;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjError {
    #[error("resolution depth {depth} cannot resolve the degree cap {cap}; need {required}")]
    DepthBelowCap { depth: u32, required: u32, cap: String },
    #[error("density is not admissible: {0}")]
    InconsistentDensity(String),
    #[error("ranges of {first} and {second} overlap in positive length")]
    RangesOverlap { first: String, second: String },
    #[error("ranges do not tile the domain: {0}")]
    CoverFailure(String),
    #[error("prefixing maps do not respect the square {0}")]
    CompositionMismatch(String),
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error(transparent)]
    Inexact(#[from] InexactValue),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type ProjResult<T> = Result<T, ProjError>;
