//! Bundled mathematical-programming backends.
//!
//! Two problem classes cover everything the toolkit needs: mixed-integer
//! linear programs (planning) and convex quadratic programs with linear
//! constraints (coefficient fitting). The interface is value based — a
//! problem goes in, a [`SolveResult`] comes out — so an external solver can
//! be swapped in behind the same request/result contract; [`write_mps`]
//! dumps any MILP in interchange format for cross-checking.
//!
//! The reference MILP backend is branch and bound over a bounded-variable
//! revised simplex; the QP backend is a primal active-set method. Both are
//! deterministic and sized for desk-scale studies.

pub mod milp;
pub mod model;
pub mod mps;
pub mod qp;
pub mod simplex;

pub use milp::solve_milp;
pub use model::{
    LinearRow, MilpModel, QpProblem, SolveRequest, SolveResult, SolveStatus, VarKind, Variable,
};
pub use mps::write_mps;
pub use qp::solve_qp;
