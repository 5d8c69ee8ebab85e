//! Finite higher-rank graphs, cylinder measures on their infinite path
//! spaces, and finite-depth Cuntz-Krieger representations built from
//! projective systems.

pub mod cli;
pub mod fixtures;
pub mod kgraph;
pub mod measures;
pub mod numeric;
pub mod pathspace;
pub mod projsys;
pub mod repn;
pub mod report;
pub mod step;
pub mod universal;
