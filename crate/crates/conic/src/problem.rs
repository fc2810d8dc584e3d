use crate::error::{ConicError, Result};
use crate::linalg::Matrix;

/// One linear matrix inequality `F0 + sum_k y_k F_k >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub constant: Matrix,
    /// Sparse list of `(variable index, coefficient matrix)`.
    pub coefficients: Vec<(usize, Matrix)>,
}

impl LmiBlock {
    pub fn new(constant: Matrix) -> Self {
        Self {
            constant,
            coefficients: Vec::new(),
        }
    }

    /// A scalar inequality `c + sum_k a_k y_k >= 0`.
    pub fn scalar(constant: f64, terms: &[(usize, f64)]) -> Self {
        Self {
            constant: Matrix::from_diagonal(&[constant]),
            coefficients: terms
                .iter()
                .map(|&(k, a)| (k, Matrix::from_diagonal(&[a])))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.constant.rows()
    }

    pub fn with_term(mut self, var: usize, coefficient: Matrix) -> Self {
        self.coefficients.push((var, coefficient));
        self
    }

    /// Rows (and columns) where the constant or some coefficient is nonzero.
    pub fn active_rows(&self) -> Vec<usize> {
        let n = self.dim();
        (0..n)
            .filter(|&i| {
                std::iter::once(&self.constant)
                    .chain(self.coefficients.iter().map(|(_, f)| f))
                    .any(|m| (0..n).any(|j| m[(i, j)] != 0.0))
            })
            .collect()
    }

    /// Diagonal congruence factors `d_i = 1 / sqrt(max_j |entry(i, j)|)` over the
    /// constant and every coefficient, for the given active rows.
    pub fn equilibration(&self, keep: &[usize]) -> Vec<f64> {
        keep.iter()
            .map(|&i| {
                let mut m = 0.0f64;
                for mat in
                    std::iter::once(&self.constant).chain(self.coefficients.iter().map(|(_, f)| f))
                {
                    for &j in keep {
                        m = m.max(mat[(i, j)].abs());
                    }
                }
                if m > 0.0 {
                    1.0 / m.sqrt()
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// The block at `y`, restricted to its active rows and equilibrated.
    ///
    /// This is the matrix whose eigenvalues the solver reports.
    pub fn normalized_slack(&self, y: &[f64]) -> Matrix {
        let keep = self.active_rows();
        let d = self.equilibration(&keep);
        self.evaluate(y)
            .principal_submatrix(&keep)
            .congruence_diag(&d)
    }

    /// `F0 + sum_k y_k F_k` at the given point.
    pub fn evaluate(&self, y: &[f64]) -> Matrix {
        let mut out = self.constant.clone();
        for (k, f) in &self.coefficients {
            out.axpy(y[*k], f);
        }
        out
    }
}

/// `maximize offset + b^T y  subject to  F0_b + sum_k y_k F_k_b >= 0` for every block `b`.
///
/// All variables are free; bounds are expressed as 1x1 blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub blocks: Vec<LmiBlock>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl Problem {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            num_vars: objective.len(),
            objective,
            objective_offset: 0.0,
            blocks: Vec::new(),
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.objective_offset = offset;
        self
    }

    pub fn push(&mut self, block: LmiBlock) {
        self.blocks.push(block);
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(y)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(ConicError::InvalidArgument(
                "problem has no variables".into(),
            ));
        }
        if self.objective.len() != self.num_vars {
            return Err(ConicError::InvalidArgument(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let n = block.dim();
            let check = |m: &Matrix, what: &str| -> Result<()> {
                if m.rows() != n || m.cols() != n {
                    return Err(ConicError::InvalidArgument(format!(
                        "block {b}: {what} is {}x{}, expected {n}x{n}",
                        m.rows(),
                        m.cols()
                    )));
                }
                if m.asymmetry() > SYMMETRY_TOL * m.max_abs().max(1.0) {
                    return Err(ConicError::InvalidArgument(format!(
                        "block {b}: {what} is not symmetric"
                    )));
                }
                Ok(())
            };
            check(&block.constant, "constant")?;
            for (k, f) in &block.coefficients {
                if *k >= self.num_vars {
                    return Err(ConicError::InvalidArgument(format!(
                        "block {b}: variable index {k} out of range"
                    )));
                }
                check(f, &format!("coefficient of variable {k}"))?;
            }
        }
        Ok(())
    }

    /// Every block evaluated at `y`.
    pub fn slack(&self, y: &[f64]) -> Vec<Matrix> {
        self.blocks.iter().map(|b| b.evaluate(y)).collect()
    }

    pub fn is_lp(&self) -> bool {
        self.blocks.iter().all(|b| b.dim() == 1)
    }
}
