//! Solver for nonlinear three-point singular boundary value problems
//!
//! ```text
//! -(x^a y'(x))' = x^a f(x, y),   0 < x < 1,
//!  y'(0) = 0,   y(1) = delta * y(eta),
//! ```
//!
//! with `a >= 1`, `delta > 0` and `eta` in (0,1). The library classifies the
//! problem into a well-ordered or reverse-ordered regime from `a` and the sign
//! of `df/dy`, builds the piecewise Green's function of the shifted linear
//! operator out of Bessel basis functions, and runs the monotone Picard
//! iteration from user-supplied upper and lower solutions. Every converged
//! limit can be cross-checked against an independent finite-difference Newton
//! solver.
//!
//! Modules:
//! - [`model`]: problem descriptions, meshes, grid functions.
//! - [`specfun`]: self-contained real-order Bessel functions J, Y, I, K,
//!   first positive zeros and the cross products used by the sign lemmas.
//! - [`classify`]: regime classification and hypothesis checking, admissible
//!   lambda windows.
//! - [`green`]: Green's kernel construction/evaluation and the linear solver.
//! - [`quad`]: composite adaptive Gauss-Legendre quadrature.
//! - [`iterate`]: upper/lower validation, the monotone iteration, enclosure
//!   and uniqueness reporting.
//! - [`oracle`]: finite-difference Newton solver and residual measurement.
//! - [`cli`]: config/expression parsing and the command-line frontend.

pub mod classify;
pub mod cli;
pub mod error;
pub mod green;
pub mod iterate;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{make_grid, sup_norm_diff, BoundaryFunction, Grid, GridFunction, ProblemSpec};
