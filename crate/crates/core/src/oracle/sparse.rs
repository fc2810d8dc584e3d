//! Compressed-row integer matrices over the vertex set.

/// Square CSR matrix with exact integer entries. Column indices inside each
/// row are strictly increasing and no stored value is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<i64>,
}

/// First position where two matrices differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub row: usize,
    pub col: usize,
    pub left: i64,
    pub right: i64,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "entry ({}, {}): {} vs {}",
            self.row, self.col, self.left, self.right
        )
    }
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triples; duplicates are summed.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, i64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<i64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry out of range");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c as u32);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
        .pruned()
    }

    /// 0/1 matrix from per-row sorted column lists.
    pub fn from_pattern(dim: usize, rows: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            cols.extend_from_slice(&row);
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), dim + 1, "row count mismatch");
        let vals = vec![1; cols.len()];
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub(crate) fn from_raw_pattern(dim: usize, row_ptr: Vec<usize>, cols: Vec<u32>) -> Self {
        assert_eq!(row_ptr.len(), dim + 1);
        let vals = vec![1; cols.len()];
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn diagonal(dim: usize, entries: impl IntoIterator<Item = (usize, i64)>) -> Self {
        Self::from_triplets(dim, entries.into_iter().map(|(i, v)| (i, i, v)).collect())
    }

    fn pruned(mut self) -> Self {
        if self.vals.iter().all(|&v| v != 0) {
            return self;
        }
        let mut row_ptr = vec![0; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != 0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// All stored `(row, col, value)` entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.dim + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.dim {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0i64; self.nnz()];
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let k = next[c];
                cols[k] = r as u32;
                vals[k] = v;
                next[c] += 1;
            }
        }
        Self {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Gustavson row-by-row product.
    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![0i64; self.dim];
        let mut seen = vec![false; self.dim];
        let mut touched: Vec<u32> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c as u32);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                seen[c as usize] = false;
                let v = acc[c as usize];
                if v != 0 {
                    cols.push(c);
                    vals.push(v);
                }
                acc[c as usize] = 0;
            }
            touched.clear();
            row_ptr.push(cols.len());
        }
        Self {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// `sum_k c_k A_k`.
    pub fn linear_combination(dim: usize, terms: &[(i64, &SparseMatrix)]) -> Self {
        let mut entries = Vec::new();
        for (c, m) in terms {
            assert_eq!(m.dim, dim);
            if *c == 0 {
                continue;
            }
            entries.extend(m.entries().map(|(r, col, v)| (r, col, c * v)));
        }
        Self::from_triplets(dim, entries)
    }

    pub fn scale(&self, c: i64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out.pruned()
    }

    /// First entry where `self` and `other` disagree, scanning row-major.
    pub fn first_difference(&self, other: &SparseMatrix) -> Option<Mismatch> {
        assert_eq!(self.dim, other.dim);
        for r in 0..self.dim {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (None, None) => break,
                    (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                        if va != vb {
                            return Some(Mismatch {
                                row: r,
                                col: ca,
                                left: va,
                                right: vb,
                            });
                        }
                        a.next();
                        b.next();
                    }
                    (Some((ca, va)), Some((cb, _))) if ca < cb => {
                        return Some(Mismatch {
                            row: r,
                            col: ca,
                            left: va,
                            right: 0,
                        })
                    }
                    (Some((ca, va)), None) => {
                        return Some(Mismatch {
                            row: r,
                            col: ca,
                            left: va,
                            right: 0,
                        })
                    }
                    (_, Some((cb, vb))) => {
                        return Some(Mismatch {
                            row: r,
                            col: cb,
                            left: 0,
                            right: vb,
                        })
                    }
                }
            }
        }
        None
    }

    /// `y = A x` for a dense real vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v as f64 * x[c]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(m: &SparseMatrix) -> Vec<Vec<i64>> {
        (0..m.dim())
            .map(|r| (0..m.dim()).map(|c| m.get(r, c)).collect())
            .collect()
    }

    fn arb_matrix(dim: usize) -> impl Strategy<Value = SparseMatrix> {
        prop::collection::vec((0..dim, 0..dim, -3i64..4), 0..(dim * dim))
            .prop_map(move |e| SparseMatrix::from_triplets(dim, e))
    }

    proptest! {
        #[test]
        fn matmul_matches_dense(a in arb_matrix(6), b in arb_matrix(6)) {
            let p = dense(&a.matmul(&b));
            let (da, db) = (dense(&a), dense(&b));
            for r in 0..6 {
                for c in 0..6 {
                    let v: i64 = (0..6).map(|k| da[r][k] * db[k][c]).sum();
                    prop_assert_eq!(p[r][c], v);
                }
            }
        }

        #[test]
        fn transpose_roundtrip(a in arb_matrix(7)) {
            let t = a.transpose();
            prop_assert_eq!(t.transpose(), a.clone());
            for (r, c, v) in a.entries() {
                prop_assert_eq!(t.get(c, r), v);
            }
        }

        #[test]
        fn difference_detects_change(a in arb_matrix(5), r in 0usize..5, c in 0usize..5) {
            prop_assert_eq!(a.first_difference(&a), None);
            let bumped = SparseMatrix::linear_combination(
                5,
                &[(1, &a), (1, &SparseMatrix::from_triplets(5, vec![(r, c, 1)]))],
            );
            let m = a.first_difference(&bumped).unwrap();
            prop_assert_eq!((m.row, m.col), (r, c));
        }
    }

    #[test]
    fn cancellation_is_pruned() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 0, 1), (0, 1, 1)]);
        let b = SparseMatrix::from_triplets(2, vec![(0, 0, 1), (1, 0, -1)]);
        let p = a.matmul(&b);
        assert_eq!(p.nnz(), 0);
        assert_eq!(p, SparseMatrix::zeros(2));
    }
}
