//! Minimization of the Crouzeix ratio f(p, A) = ||p||_{W(A)} / ||p(A)||_2
//! over structured matrix/polynomial pairs, with a-posteriori verification
//! of approximate nonsmooth stationarity.
//!
//! The crate provides:
//! - polynomial and structured-matrix value types with a frozen flat real
//!   parameterization ([`point`], [`poly`]);
//! - a field-of-values boundary approximant with segment and corner
//!   detection ([`fov`]);
//! - the ratio, its attainment data and its analytic gradient ([`ratio`]);
//! - full-memory BFGS with a weak Armijo-Wolfe line search ([`bfgs`]);
//! - the min-norm approximate-subgradient stationarity measure
//!   ([`stationarity`]);
//! - a seeded random-restart experiment harness ([`harness`]).

pub mod bfgs;
pub mod cheb;
pub mod error;
pub mod fov;
pub mod harness;
pub mod linalg;
pub mod point;
pub mod poly;
pub mod ratio;
pub mod reference;
pub mod stationarity;

pub use bfgs::{minimize, OptimizerOptions, RunTrace, Termination};
pub use error::{CrouzeixError, Result};
pub use fov::{
    boundary_point, build_boundary, hermitian_sweep_matrix, local_maximizers, sup_abs_poly,
    z_eps_set, AttainmentSet, BoundaryApproximant, BoundaryOptions,
};
pub use harness::{run_single, run_sweep, RunRecord, SweepConfig, SweepResult};
pub use linalg::CMat;
pub use point::{pack, unpack, FieldMode, ParameterLayout, ParameterVector, StructuredMatrixPoint};
pub use poly::Polynomial;
pub use ratio::{crouzeix_ratio, evaluate, RatioEvaluation, RatioOptions, RatioOracle};
pub use reference::{assemble_reference, crabb_matrix, ReferenceConfiguration};
pub use stationarity::{min_norm_point, stationarity_report, StationarityReport};
