//! Seeded random inputs for property checks and the `verify` subcommand.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::CMatrix;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = complex_matrix(rng, dim);
    (&g + g.adjoint()).map(|z| z * 0.5)
}

/// Random full-rank density matrix `GG† / tr(GG†)` (Wishart draw).
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = complex_matrix(rng, dim);
    let w = &g * g.adjoint();
    let tr = crate::trace(&w).re;
    let rho = w.map(|z| z / tr);
    (&rho + rho.adjoint()).map(|z| z * 0.5)
}

/// Random density matrix supported on the first `support` levels of a
/// `dim`-level space.
pub fn density_matrix_on<R: Rng + ?Sized>(rng: &mut R, dim: usize, support: usize) -> CMatrix {
    let inner = density_matrix(rng, support.min(dim));
    let mut rho = CMatrix::zeros(dim, dim);
    rho.view_mut((0, 0), (inner.nrows(), inner.ncols())).copy_from(&inner);
    rho
}
