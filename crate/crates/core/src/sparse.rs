//! Compressed-column operator storage for the integrator hot loop.
//!
//! The oscillator operators are pentadiagonal in the Fock basis, so the
//! products `Aρ` and `ρA` cost `O(nnz · dim)` instead of `O(dim³)`.

use num_complex::Complex64;

use crate::CMatrix;

#[derive(Debug, Clone)]
pub(crate) struct SparseOp {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for j in 0..dim {
            for i in 0..dim {
                let v = m[(i, j)];
                if v != Complex64::new(0.0, 0.0) {
                    row_idx.push(i);
                    vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SparseOp { dim, col_ptr, row_idx, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `self · rho`
    pub fn left_mul(&self, rho: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n, n);
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        for j in 0..n {
            let rho_col = &src[j * n..(j + 1) * n];
            let out_col = &mut dst[j * n..(j + 1) * n];
            for (k, &r) in rho_col.iter().enumerate() {
                if r.re == 0.0 && r.im == 0.0 {
                    continue;
                }
                for p in self.col_ptr[k]..self.col_ptr[k + 1] {
                    out_col[self.row_idx[p]] += self.vals[p] * r;
                }
            }
        }
        out
    }

    /// `rho · self`
    pub fn right_mul(&self, rho: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n, n);
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        for j in 0..n {
            let out_col = &mut dst[j * n..(j + 1) * n];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let a = self.vals[p];
                let k = self.row_idx[p];
                let rho_col = &src[k * n..(k + 1) * n];
                for (o, &r) in out_col.iter_mut().zip(rho_col) {
                    *o += r * a;
                }
            }
        }
        out
    }
}
