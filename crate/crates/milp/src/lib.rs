//! Exact solver for small mixed-binary linear programs.
//!
//! [`solve_lp`] is a dense two-phase primal simplex with bounded variables,
//! [`solve_milp`] a best-first branch-and-bound over the binary columns, and
//! [`brute_force`] an enumeration oracle for checking the latter.

mod bnb;
mod brute;
mod error;
mod lp;
mod lpfile;
mod problem;

pub use bnb::{solve_milp, MilpOptions, MilpSolution, MilpStatus};
pub use brute::{brute_force, MAX_BRUTE_FORCE_BINARIES};
pub use error::{PartialResult, Result, SolverError};
pub use lp::{solve_lp, LpOptions, LpSolution, LpStatus, RESIDUAL_TOL};
pub use lpfile::{is_valid_name, read_lp, write_lp};
pub use problem::{Constraint, MilpProblem, Relation};
