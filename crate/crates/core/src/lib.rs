//! Dense and tensor-train finite-volume solvers for the linear and nonlinear
//! shallow water equations on doubly periodic or channel domains.

pub mod cases;
pub mod cli;
pub mod cross;
pub mod harness;
mod linalg;
pub mod recon;
pub mod swe;
pub mod tt;

pub use cases::{CaseId, CaseSpec};
pub use cross::{cross_elementwise, CrossConfig, CrossError};
pub use harness::{convergence, run, RunConfig, RunReport};
pub use recon::SchemeId;
pub use swe::{Model, Representation};
pub use tt::{reciprocal_taylor, Axis, AxisMap, BandedMap, TTMatrix, TtError};
