//! Dense primal-dual interior-point solver for small block-diagonal
//! semidefinite programs. Linear programs are handled as problems whose
//! blocks are all 1x1.

mod certificate;
mod error;
pub mod linalg;
mod problem;
mod solver;

pub use certificate::{check_certificate, CertificateReport, Check, SLACK_FACTOR};
pub use error::{ConicError, Result};
pub use linalg::{min_eigenvalue, Matrix};
pub use problem::{LmiBlock, Problem};
pub use solver::{
    block_min_eigenvalues, floor_bound, solve, BoundResult, IterationLog, Residuals, SolverConfig,
    Status, TOL_ROUND,
};
