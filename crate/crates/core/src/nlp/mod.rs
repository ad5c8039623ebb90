//! Local optimization of sum-of-ratios objectives over polytopes.

mod hitrun;
mod program;
mod qp;
mod solver;

pub use program::{Direction, Feasibility, FractionalProgram, LinearConstraint, RatioTerm};
pub use solver::{kkt_residual, solve, Solution, SolverConfig};

use crate::scalar::Scalar;

/// Whether `x` satisfies every constraint of `p` within `tol`, with the largest violation.
pub fn check_feasibility<T: Scalar>(p: &FractionalProgram<T>, x: &[T], tol: T) -> Feasibility<T> {
    p.check_feasibility(x, tol)
}
