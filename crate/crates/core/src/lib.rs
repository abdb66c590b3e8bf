//! Hidden-variable models of bipartite correlations.
//!
//! The crate evaluates hidden-variable (HV) models with a local part `(U, V)`
//! and a nonlocal part `W`, compares them against the quantum singlet, checks
//! three levels of remote-setting dependence, and runs the iterative
//! decomposition that moves HV components out of the "local part" whenever
//! conditioning on it still lets one site see the other's setting.
//!
//! Layout:
//! - [`circle`] and [`prob`]: angles, arcs, outcome distributions, joint tables.
//! - [`models`]: the arc-response model, the singlet reference, finite-support models.
//! - [`engine`]: exact and Monte Carlo joint evaluation.
//! - [`analysis`]: marginals, dependence checks, decomposition.
//! - [`inequalities`]: the CHSH expression and its local bound.
//! - [`cli`]: the `hvlab` command-line surface.

pub mod analysis;
pub mod circle;
pub mod cli;
pub mod engine;
pub mod error;
pub mod inequalities;
pub mod models;
pub mod prob;
pub mod rng;

pub use circle::{wrap_angle, Angle, CircularInterval};
pub use error::{HvError, Result};
pub use prob::{JointTable, Outcome, OutcomeDist, TOL};
