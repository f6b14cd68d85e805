//! Nonsmooth constrained optimization with Shor's r-algorithm.
//!
//! A constrained problem `min f(x), x ∈ X` is turned into an unconstrained
//! one by an exact penalty ([`penalty`]) and minimized by the space-dilation
//! subgradient method ([`ralg`]). Projections onto box, halfspace and
//! polyhedral sets live in [`projection`]; [`testbed`] carries the separable
//! ravine benchmark and [`experiment`] the grid runner behind the CLI.
//!
//! ```
//! use ralg_core::{minimize, FdParams, PenalizedObjective, PenaltyParams, RAlgParams, RavineProblem};
//!
//! let problem = RavineProblem::with_budget(6, 3.0).unwrap();
//! let bounds = problem.set().bounds().unwrap().clone();
//! let oracle = PenalizedObjective::distance(problem.oracle(), problem.set().clone(), PenaltyParams::with_m(1e4).unwrap())
//!     .unwrap()
//!     .into_oracle(FdParams::default());
//! let report = minimize(&oracle, &bounds.midpoint(), &RAlgParams::for_bounds(&bounds)).unwrap();
//! assert!(problem.accuracy(&report.x_final).unwrap().delta < 1e-2);
//! ```

pub mod error;
pub mod experiment;
pub mod fd;
pub mod linalg;
pub mod oracle;
pub mod penalty;
pub mod projection;
pub mod ralg;
pub mod sets;
pub mod testbed;

pub use error::{Error, Result};
pub use fd::{fd_gradient, FdParams, FdScheme};
pub use linalg::{dot, norm2};
pub use oracle::{Oracle, SubgradientRule};
pub use penalty::{penalized_oracle, PenalizedObjective, PenaltyKind, PenaltyParams};
pub use projection::{project, ProjectionParams};
pub use ralg::{minimize, minimize_with_trace, RAlgParams, RAlgSolver, SolveReport, Termination, TraceEvent};
pub use sets::{Bounds, FeasibleSet, Halfspace, Hyperplane, Polyhedron};
pub use testbed::{AccuracyReport, RavineProblem};
