//! Brute-force matrices over the vertex set, used to check the algebra and
//! the block coefficients at small `n`.

mod audit;
mod basis;
mod blocks;
mod identities;
mod kernel;
mod sparse;

pub use audit::{audit, AuditReport, BetaMismatch, LevelDimension, OFF_BLOCK_TOL};
pub use basis::{build_basis_matrix, BasisMatrices, Levels, SparseBasisMatrix};
pub use blocks::{
    beta_oracle, beta_oracle_with, build_change_of_basis, change_of_basis_with, conjugated_blocks,
    dense_conjugate, oracle_beta_values, BlockReport, ChangeOfBasis, ColumnLabel, ORACLE_TOL,
};
pub use identities::{
    adjacency, dual_idempotent, verify_identities, verify_with, IdentityCheck, IdentityReport,
};
pub use kernel::{level_kernel_basis, level_kernel_with, LevelBasis, RANK_TOL};
pub use sparse::{Mismatch, SparseMatrix};
