//! All brute-force checks of one `n`, collected into one report.

use serde::Serialize;

use crate::coefficients::{beta_table, multiplicity};
use crate::cube::{diameter, enumerate_profiles, index_set_size, num_vertices};
use crate::error::Result;

use super::basis::BasisMatrices;
use super::blocks::{change_of_basis_with, conjugated_blocks, oracle_beta_values};
use super::identities::{verify_with, IdentityReport};
use super::kernel::level_kernel_with;

/// Largest off-block residual accepted.
pub const OFF_BLOCK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct LevelDimension {
    pub r: u32,
    pub measured: usize,
    pub formula: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaMismatch {
    pub r: u32,
    pub i: u32,
    pub j: u32,
    pub t: u32,
    pub closed_form: Option<String>,
    pub oracle: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n: u32,
    pub identities: IdentityReport,
    pub index_set_size: usize,
    pub index_set_formula: u64,
    pub level_dimensions: Vec<LevelDimension>,
    pub columns: usize,
    pub vertices: u64,
    pub orthonormality_defect: f64,
    pub max_off_block: f64,
    pub beta_tuples: usize,
    pub beta_mismatches: Vec<BetaMismatch>,
    pub passed: bool,
}

pub fn audit(n: u32) -> Result<AuditReport> {
    let basis = BasisMatrices::build(n)?;
    let identities = verify_with(&basis);
    let index_size = enumerate_profiles(n)?.len();

    let mut level_dimensions = Vec::new();
    for r in 0..=diameter(n) {
        level_dimensions.push(LevelDimension {
            r,
            measured: level_kernel_with(&basis, r)?.dim(),
            formula: multiplicity(r, n).to_string(),
        });
    }

    let u = change_of_basis_with(&basis)?;
    let mut max_off_block = 0.0f64;
    for p in &basis.profiles.profiles {
        max_off_block = max_off_block.max(conjugated_blocks(*p, &basis, &u)?.max_off_block);
    }

    let measured = oracle_beta_values(&basis)?;
    let mut table = beta_table(n)?;
    let beta_tuples = table.values.len();
    let beta_mismatches: Vec<BetaMismatch> = table
        .reconcile(&measured)
        .into_iter()
        .map(|((r, i, j, t), closed, oracle)| BetaMismatch {
            r,
            i,
            j,
            t,
            closed_form: closed.map(|c| c.to_string()),
            oracle,
        })
        .collect();

    let passed = identities.all_passed()
        && index_size as u64 == index_set_size(n)
        && level_dimensions
            .iter()
            .all(|l| l.measured.to_string() == l.formula)
        && u.len() as u64 == num_vertices(n)
        && max_off_block < OFF_BLOCK_TOL
        && beta_mismatches.is_empty()
        && measured.len() == beta_tuples;

    Ok(AuditReport {
        n,
        identities,
        index_set_size: index_size,
        index_set_formula: index_set_size(n),
        level_dimensions,
        columns: u.len(),
        vertices: num_vertices(n),
        orthonormality_defect: u.orthonormality_defect(),
        max_off_block,
        beta_tuples,
        beta_mismatches,
        passed,
    })
}
