//! The 0/1 orbit matrices `M^t_{i,j}` and the level structure of `X`.

use crate::cube::{
    check_enumerable, check_profile, classify_masks, diameter, enumerate_profiles, mask_distance,
    num_vertices, IndexSet, TripleProfile,
};
use crate::error::Result;

use super::sparse::SparseMatrix;

/// Vertices grouped by distance from the 0-class.
#[derive(Debug, Clone)]
pub struct Levels {
    /// `(level, position inside level)` per vertex index.
    pub of: Vec<(u32, u32)>,
    /// Vertex indices of each level, ascending.
    pub members: Vec<Vec<u32>>,
}

impl Levels {
    pub fn new(n: u32) -> Self {
        let d = diameter(n) as usize;
        let mut members = vec![Vec::new(); d + 1];
        let mut of = Vec::with_capacity(num_vertices(n) as usize);
        for v in 0..num_vertices(n) {
            let l = mask_distance(0, v, n) as usize;
            of.push((l as u32, members[l].len() as u32));
            members[l].push(v as u32);
        }
        Self { of, members }
    }

    pub fn size(&self, level: u32) -> usize {
        self.members[level as usize].len()
    }
}

/// `M^t_{i,j}` as a sparse matrix over `X`, tagged with its profile.
#[derive(Debug, Clone)]
pub struct SparseBasisMatrix {
    pub n: u32,
    pub profile: TripleProfile,
    pub matrix: SparseMatrix,
}

impl SparseBasisMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Positions holding 1, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.matrix.entries().map(|(r, c, _)| (r, c))
    }

    pub fn entry_count(&self) -> usize {
        self.matrix.nnz()
    }
}

/// Every orbit matrix of one `n`, indexed like [`IndexSet::profiles`].
#[derive(Debug, Clone)]
pub struct BasisMatrices {
    pub n: u32,
    pub profiles: IndexSet,
    pub levels: Levels,
    mats: Vec<SparseMatrix>,
}

impl BasisMatrices {
    /// One pass over `X x X`, bucketing each pair by its profile.
    pub fn build(n: u32) -> Result<Self> {
        check_enumerable(n)?;
        let profiles = enumerate_profiles(n)?;
        let dim = num_vertices(n) as usize;
        let side = (diameter(n) + 1) as usize;
        let mut slot = vec![usize::MAX; side * side * side];
        for (k, p) in profiles.profiles.iter().enumerate() {
            slot[(p.i as usize * side + p.j as usize) * side + p.t as usize] = k;
        }
        let np = profiles.len();
        let mut row_ptrs: Vec<Vec<usize>> = vec![vec![0]; np];
        let mut cols: Vec<Vec<u32>> = vec![Vec::new(); np];
        for y in 0..dim as u64 {
            for z in 0..dim as u64 {
                let (i, j, t) = classify_masks(0, y, z, n);
                let k = slot[(i as usize * side + j as usize) * side + t as usize];
                cols[k].push(z as u32);
            }
            for k in 0..np {
                row_ptrs[k].push(cols[k].len());
            }
        }
        let mats = row_ptrs
            .into_iter()
            .zip(cols)
            .map(|(rp, c)| SparseMatrix::from_raw_pattern(dim, rp, c))
            .collect();
        Ok(Self {
            n,
            profiles,
            levels: Levels::new(n),
            mats,
        })
    }

    pub fn dim(&self) -> usize {
        num_vertices(self.n) as usize
    }

    pub fn get(&self, i: u32, j: u32, t: u32) -> Option<&SparseMatrix> {
        self.profiles.position(i, j, t).map(|k| &self.mats[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (TripleProfile, &SparseMatrix)> {
        self.profiles.profiles.iter().copied().zip(&self.mats)
    }
}

/// Builds a single orbit matrix directly.
pub fn build_basis_matrix(p: TripleProfile, n: u32) -> Result<SparseBasisMatrix> {
    check_profile(p, n)?;
    check_enumerable(n)?;
    let dim = num_vertices(n) as usize;
    let rows = (0..dim as u64).map(|y| {
        if mask_distance(0, y, n) != p.i {
            return Vec::new();
        }
        (0..dim as u64)
            .filter(|&z| classify_masks(0, y, z, n) == p.key())
            .map(|z| z as u32)
            .collect()
    });
    Ok(SparseBasisMatrix {
        n,
        profile: p,
        matrix: SparseMatrix::from_pattern(dim, rows),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry_and_counts() {
        let m = build_basis_matrix(TripleProfile::new(0, 0, 0, 8), 8).unwrap();
        assert_eq!(m.entries().collect::<Vec<_>>(), vec![(0, 0)]);
        let m = build_basis_matrix(TripleProfile::new(1, 0, 0, 8), 8).unwrap();
        assert_eq!(m.entry_count(), 8);
        assert!(m.entries().all(|(_, c)| c == 0));
        let all = BasisMatrices::build(8).unwrap();
        let total: usize = all.iter().map(|(_, m)| m.nnz()).sum();
        assert_eq!(total, 16384);
    }

    #[test]
    fn bulk_build_matches_direct() {
        for n in [6, 7] {
            let all = BasisMatrices::build(n).unwrap();
            for (p, m) in all.iter() {
                let direct = build_basis_matrix(p, n).unwrap();
                assert_eq!(&direct.matrix, m, "{p}");
            }
        }
    }

    #[test]
    fn levels_partition() {
        let l = Levels::new(9);
        assert_eq!(
            l.members.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 9, 36, 84, 126]
        );
    }
}
