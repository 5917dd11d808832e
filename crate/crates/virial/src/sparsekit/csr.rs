//! Compressed-sparse-row operator storage.

use crate::error::{Result, VirialError};
use crate::lattice::C64;

/// Square sparse operator in CSR form with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
    /// Hint: the matrix is Hermitian. Verified on demand via [`SparseOperator::hermitian_defect`].
    pub hermitian: bool,
}

impl SparseOperator {
    /// Build from unsorted triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, C64)>, hermitian: bool) -> Self {
        entries.retain(|e| e.2 != C64::ZERO);
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "triplet index ({r},{c}) out of range for dim {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols = merged.iter().map(|e| e.1 as u32).collect();
        let vals = merged.iter().map(|e| e.2).collect();
        SparseOperator { dim, row_ptr, cols, vals, hermitian }
    }

    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self::from_triplets(dim, entries, true)
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let hermitian = diag.iter().all(|z| z.im == 0.0);
        let entries = diag.iter().enumerate().map(|(i, &z)| (i, i, z)).collect();
        Self::from_triplets(diag.len(), entries, hermitian)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[u32], &[C64])> {
        (0..self.dim).map(move |r| {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            (r, &self.cols[a..b], &self.vals[a..b])
        })
    }

    /// Exact CSR product y = A x.
    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim {
            return Err(VirialError::Shape(format!(
                "matvec: vector length {} != operator dimension {}",
                x.len(),
                self.dim
            )));
        }
        let mut y = vec![C64::ZERO; self.dim];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        for r in 0..self.dim {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = C64::ZERO;
            for k in a..b {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] = acc;
        }
    }

    /// Conjugate transpose, in canonical sorted CSR form.
    pub fn adjoint(&self) -> Self {
        let mut entries = Vec::with_capacity(self.nnz());
        for (r, cols, vals) in self.rows() {
            for (c, v) in cols.iter().zip(vals) {
                entries.push((*c as usize, r, v.conj()));
            }
        }
        Self::from_triplets(self.dim, entries, self.hermitian)
    }

    /// A − σI.
    pub fn shifted(&self, sigma: C64) -> Self {
        let mut entries = Vec::with_capacity(self.nnz() + self.dim);
        for (r, cols, vals) in self.rows() {
            for (c, v) in cols.iter().zip(vals) {
                entries.push((r, *c as usize, *v));
            }
        }
        for i in 0..self.dim {
            entries.push((i, i, -sigma));
        }
        let hermitian = self.hermitian && sigma.im == 0.0;
        Self::from_triplets(self.dim, entries, hermitian)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A*‖_max, for the on-demand Hermiticity check.
    pub fn hermitian_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut defect = 0.0f64;
        for r in 0..self.dim {
            let (a0, a1) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (b0, b1) = (adj.row_ptr[r], adj.row_ptr[r + 1]);
            let (mut i, mut j) = (a0, b0);
            while i < a1 || j < b1 {
                let ci = if i < a1 { self.cols[i] } else { u32::MAX };
                let cj = if j < b1 { adj.cols[j] } else { u32::MAX };
                if ci == cj {
                    defect = defect.max((self.vals[i] - adj.vals[j]).norm());
                    i += 1;
                    j += 1;
                } else if ci < cj {
                    defect = defect.max(self.vals[i].norm());
                    i += 1;
                } else {
                    defect = defect.max(adj.vals[j].norm());
                    j += 1;
                }
            }
        }
        defect
    }

    /// Structural and value equality of the canonical CSR forms.
    pub fn same_entries(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.row_ptr == other.row_ptr
            && self.cols == other.cols
            && self.vals == other.vals
    }

    /// Dense copy; refused above the dense-oracle threshold.
    pub fn to_dense(&self) -> Result<ndarray::Array2<C64>> {
        if self.dim > crate::sparsekit::dense::DENSE_LIMIT {
            return Err(VirialError::Unsupported(format!(
                "dim {} exceeds dense limit {}",
                self.dim,
                crate::sparsekit::dense::DENSE_LIMIT
            )));
        }
        let mut a = ndarray::Array2::from_elem((self.dim, self.dim), C64::ZERO);
        for (r, cols, vals) in self.rows() {
            for (c, v) in cols.iter().zip(vals) {
                a[(r, *c as usize)] += *v;
            }
        }
        Ok(a)
    }
}
