//! Von Neumann entropy and its production rate under a GKSL generator.
//!
//! With `Γₙ = tr{(ln ρ)(Lₙ†Lₙρ − LₙρLₙ†)}` the entropy rate is
//! `dS/dt = (2/ħ) Σₙ αₙ Γₙ`, and `Γₙ ≥ tr([Lₙ†, Lₙ]ρ)`; for Hermitian `Lₙ`
//! the bound is zero, so non-negative rates give non-decreasing entropy.
//!
//! Logarithms are taken of eigenvalues clipped to `[ε, 1]` (`ε = 1e−14`) and
//! renormalised, which gives `0·ln 0 = 0` and a finite Γ for rank-deficient
//! states.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::evolution::DensityMatrix;
use crate::generator::Channel;
use crate::operators::{check_dim, Operator};
use crate::{trace, CMatrix, Error, Result};

/// Eigenvalue floor for logarithms.
pub const LOG_FLOOR: f64 = 1e-14;

/// Largest imaginary part of Γ treated as round-off.
pub const IMAGINARY_TOL: f64 = 1e-8;

/// Tolerance on the Γ inequality.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// `ρ = Σᵢ pᵢ |uᵢ⟩⟨uᵢ|` with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    floor: f64,
}

impl SpectralDecomposition {
    pub fn new(rho: &CMatrix) -> Self {
        Self::with_floor(rho, LOG_FLOOR)
    }

    pub fn with_floor(rho: &CMatrix, floor: f64) -> Self {
        let herm = (rho + rho.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(herm);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let eigenvectors =
            CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
        SpectralDecomposition { eigenvalues, eigenvectors, floor }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Columns are the eigenvectors `|uᵢ⟩`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Mass added to the spectrum by clipping at the floor.
    pub fn clipped_mass(&self) -> f64 {
        self.eigenvalues.iter().map(|&p| (self.floor - p).max(0.0)).sum()
    }

    /// `ln qᵢ` with `qᵢ = clip(pᵢ, ε, 1) / Σⱼ clip(pⱼ, ε, 1)`.
    pub fn log_weights(&self) -> Vec<f64> {
        let clipped: Vec<f64> = self.eigenvalues.iter().map(|&p| p.clamp(self.floor, 1.0)).collect();
        let norm: f64 = clipped.iter().sum();
        clipped.iter().map(|&q| (q / norm).ln()).collect()
    }

    /// `ln ρ = Σᵢ ln qᵢ |uᵢ⟩⟨uᵢ|`.
    pub fn log_matrix(&self) -> CMatrix {
        let logs = self.log_weights();
        let u = &self.eigenvectors;
        let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * logs[j]);
        scaled * u.adjoint()
    }

    /// `Σᵢ pᵢ |uᵢ⟩⟨uᵢ|`.
    pub fn reconstruct(&self) -> CMatrix {
        let u = &self.eigenvectors;
        let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * self.eigenvalues[j]);
        scaled * u.adjoint()
    }

    /// `S = −Σᵢ pᵢ ln max(pᵢ, ε)` over the non-negative eigenvalues.
    pub fn entropy(&self) -> f64 {
        let s: f64 = self.eigenvalues.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.max(self.floor).ln()).sum();
        s.max(0.0)
    }
}

/// `S[ρ] = −tr(ρ ln ρ)`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    SpectralDecomposition::new(rho.matrix()).entropy()
}

/// `Γ = tr{(ln ρ)(L†Lρ − LρL†)}` by direct traces.
pub fn gamma(rho: &DensityMatrix, l: &Operator) -> Result<f64> {
    let decomp = SpectralDecomposition::new(rho.matrix());
    gamma_with(&decomp, rho.matrix(), l.matrix())
}

/// [`gamma`] reusing an existing decomposition of `rho`.
pub fn gamma_with(decomp: &SpectralDecomposition, rho: &CMatrix, l: &CMatrix) -> Result<f64> {
    check_dim(rho.nrows(), l.nrows())?;
    check_dim(decomp.dim(), rho.nrows())?;
    let l_dag = l.adjoint();
    let a = &l_dag * l * rho - l * rho * &l_dag;
    let g: Complex64 = trace(&(decomp.log_matrix() * a));
    if g.im.abs() > IMAGINARY_TOL {
        return Err(Error::NonPhysical(g.im));
    }
    Ok(g.re)
}

/// Γ expanded in the eigenbasis of ρ:
///
/// ```text
/// Γ = Σᵢ pᵢ ln pᵢ ⟨uᵢ|L†L|uᵢ⟩ + Σᵢⱼ (−pⱼ ln pᵢ) |⟨uᵢ|L|uⱼ⟩|²
/// ```
pub fn gamma_eigenbasis(decomp: &SpectralDecomposition, l: &Operator) -> Result<f64> {
    check_dim(decomp.dim(), l.dim())?;
    let u = decomp.eigenvectors();
    // matrix elements ⟨uᵢ|L|uⱼ⟩
    let lu = u.adjoint() * l.matrix() * u;
    let p = decomp.eigenvalues();
    let logs = decomp.log_weights();
    let n = decomp.dim();
    let mut g = 0.0;
    for i in 0..n {
        // ⟨uᵢ|L†L|uᵢ⟩ = Σₖ |⟨uₖ|L|uᵢ⟩|²
        let ldl: f64 = (0..n).map(|k| lu[(k, i)].norm_sqr()).sum();
        g += p[i] * logs[i] * ldl;
        for j in 0..n {
            g -= p[j] * logs[i] * lu[(i, j)].norm_sqr();
        }
    }
    Ok(g)
}

/// `dS/dt = (2/ħ) Σₙ αₙ Γₙ`.
pub fn entropy_rate(rho: &DensityMatrix, channels: &[Channel], hbar: f64) -> Result<f64> {
    let decomp = SpectralDecomposition::new(rho.matrix());
    let mut rate = 0.0;
    for ch in channels {
        rate += ch.alpha * gamma_with(&decomp, rho.matrix(), ch.l.matrix())?;
    }
    Ok(2.0 * rate / hbar)
}

/// Both sides of `Γ ≥ tr([L†, L]ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaInequality {
    pub gamma: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn check_gamma_inequality(rho: &DensityMatrix, l: &Operator) -> Result<GammaInequality> {
    let gamma = gamma(rho, l)?;
    let lm = l.matrix();
    let comm = lm.adjoint() * lm - lm * lm.adjoint();
    let bound = trace(&(comm * rho.matrix())).re;
    Ok(GammaInequality { gamma, bound, ok: gamma >= bound - INEQUALITY_TOL })
}
