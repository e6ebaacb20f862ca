//! The GKSL generator
//!
//! ```text
//! ∂ρ/∂t = (1/iħ)[H, ρ] − (1/ħ) Σₙ αₙ (Lₙ†Lₙρ + ρLₙ†Lₙ − 2LₙρLₙ†)
//! ```
//!
//! together with its vectorised (column-stacking) Liouvillian and a
//! Choi-matrix probe of complete positivity.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::operators::{check_dim, Operator, HERMITIAN_TOL};
use crate::sparse::SparseOp;
use crate::{max_abs, CMatrix, Error, Result};

/// Eigenvalues of the dissipation matrix at or below this magnitude are
/// dropped when forming channels.
pub const CHANNEL_PRUNE_TOL: f64 = 1e-14;

/// Rates below `−RATE_TOL` break complete positivity.
pub const RATE_TOL: f64 = 1e-14;

/// Minimum Choi eigenvalue accepted as positive.
pub const CHOI_TOL: f64 = 1e-8;

/// One dissipative channel `(α, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub alpha: f64,
    pub l: Operator,
}

impl Channel {
    pub fn new(alpha: f64, l: Operator) -> Self {
        Channel { alpha, l }
    }

    /// A negative rate is representable but cannot appear in a completely
    /// positive evolution.
    pub fn is_cp(&self) -> bool {
        self.alpha >= -RATE_TOL
    }
}

/// Hermitian coefficient matrix `a_{mn}` over operators `Q_m`.
#[derive(Debug, Clone)]
pub struct DissipationMatrix {
    a: CMatrix,
    q: Vec<Operator>,
}

impl DissipationMatrix {
    pub fn new(a: CMatrix, q: Vec<Operator>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        check_dim(a.nrows(), q.len())?;
        if let Some(first) = q.first() {
            for op in &q[1..] {
                check_dim(first.dim(), op.dim())?;
            }
        }
        let deviation = max_abs(&(&a - a.adjoint()));
        if deviation > HERMITIAN_TOL {
            return Err(Error::DissipationNotHermitian(deviation));
        }
        Ok(DissipationMatrix { a, q })
    }

    pub fn coefficients(&self) -> &CMatrix {
        &self.a
    }

    pub fn operators(&self) -> &[Operator] {
        &self.q
    }

    /// The dissipator in its undiagonalised form
    /// `−(1/ħ) Σₘₙ aₘₙ (Qₘ†Qₙρ + ρQₘ†Qₙ − 2QₙρQₘ†)`.
    pub fn apply(&self, rho: &CMatrix, hbar: f64) -> Result<CMatrix> {
        let dim = rho.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for (m, qm) in self.q.iter().enumerate() {
            check_dim(dim, qm.dim())?;
            let qm_dag = qm.matrix().adjoint();
            for (n, qn) in self.q.iter().enumerate() {
                let a = self.a[(m, n)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let qq = &qm_dag * qn.matrix();
                let term = &qq * rho + rho * &qq - (qn.matrix() * rho * &qm_dag).map(|z| z * 2.0);
                out += term.map(|z| z * a);
            }
        }
        Ok(out.map(|z| -z / hbar))
    }
}

/// Diagonalises `a = U diag(α) U†` and returns the channels
/// `(αₗ, Lₗ = Σₘ conj(Uₘₗ) Qₘ)`, dropping numerically zero rates.
///
/// The conjugate on `U` is what makes `Σₗ αₗ Lₗ†Lₗ = Σₘₙ aₘₙ Qₘ†Qₙ`.
pub fn diagonalize_dissipator(dm: &DissipationMatrix) -> Vec<Channel> {
    if dm.q.is_empty() {
        return Vec::new();
    }
    let dim = dm.q[0].dim();
    let hbar = dm.q[0].hbar();
    let eig = SymmetricEigen::new(dm.a.clone());
    let mut channels: Vec<Channel> = (0..dm.a.nrows())
        .filter(|&l| eig.eigenvalues[l].abs() > CHANNEL_PRUNE_TOL)
        .map(|l| {
            let mut op = CMatrix::zeros(dim, dim);
            for (m, qm) in dm.q.iter().enumerate() {
                op += qm.matrix().map(|z| z * eig.eigenvectors[(m, l)].conj());
            }
            let all_hermitian = dm.q.iter().all(Operator::is_hermitian);
            let op = if all_hermitian {
                Operator::hermitian(op.clone(), hbar).or_else(|_| Operator::new(op, hbar))
            } else {
                Operator::new(op, hbar)
            };
            Channel::new(eig.eigenvalues[l], op.expect("square by construction"))
        })
        .collect();
    channels.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    channels
}

#[derive(Debug)]
struct ChannelOps {
    l: SparseOp,
    l_dag: SparseOp,
    l_dag_l: SparseOp,
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledChannel {
    alpha: f64,
    ops: Arc<ChannelOps>,
}

impl CompiledChannel {
    pub fn new(l: &CMatrix) -> Self {
        let l_dag = l.adjoint();
        let l_dag_l = &l_dag * l;
        CompiledChannel {
            alpha: 0.0,
            ops: Arc::new(ChannelOps {
                l: SparseOp::from_dense(l),
                l_dag: SparseOp::from_dense(&l_dag),
                l_dag_l: SparseOp::from_dense(&l_dag_l),
            }),
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        CompiledChannel { alpha, ops: Arc::clone(&self.ops) }
    }
}

/// A generator compiled for repeated application.
///
/// Operators are held in compressed-column form, so banded Hamiltonians and
/// Lindbladians are applied in `O(nnz · dim)`.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    hbar: f64,
    h: SparseOp,
    channels: Vec<CompiledChannel>,
}

impl Generator {
    pub fn new(h: &Operator, channels: &[Channel], hbar: f64) -> Result<Self> {
        let dim = h.dim();
        for ch in channels {
            check_dim(dim, ch.l.dim())?;
        }
        let compiled = channels.iter().map(|ch| CompiledChannel::new(ch.l.matrix()).with_alpha(ch.alpha)).collect();
        Ok(Self::from_parts(SparseOp::from_dense(h.matrix()), compiled, hbar))
    }

    pub(crate) fn from_parts(h: SparseOp, channels: Vec<CompiledChannel>, hbar: f64) -> Self {
        Generator { dim: h.dim(), hbar, h, channels }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-Hamiltonian part of `∂ρ/∂t`.
    pub fn dissipator(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim, rho.nrows())?;
        check_dim(self.dim, rho.ncols())?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for ch in &self.channels {
            if ch.alpha == 0.0 {
                continue;
            }
            let ops = &ch.ops;
            let jump = ops.l_dag.right_mul(&ops.l.left_mul(rho));
            let anti = ops.l_dag_l.left_mul(rho) + ops.l_dag_l.right_mul(rho);
            let scale = -ch.alpha / self.hbar;
            out += (anti - jump.map(|z| z * 2.0)).map(|z| z * scale);
        }
        Ok(out)
    }

    /// Full right-hand side `(1/iħ)[H, ρ] + D(ρ)`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let mut out = self.dissipator(rho)?;
        let comm = self.h.left_mul(rho) - self.h.right_mul(rho);
        let factor = Complex64::new(0.0, -1.0 / self.hbar);
        out += comm.map(|z| z * factor);
        Ok(out)
    }
}

/// `D(ρ) = −(1/ħ) Σₙ αₙ (Lₙ†Lₙρ + ρLₙ†Lₙ − 2LₙρLₙ†)`.
pub fn dissipator(rho: &CMatrix, channels: &[Channel], hbar: f64) -> Result<CMatrix> {
    let dim = rho.nrows();
    Generator::new(&Operator::zeros(dim, hbar), channels, hbar)?.dissipator(rho)
}

/// `∂ρ/∂t = (1/iħ)[H, ρ] + D(ρ)`.
pub fn rhs(rho: &CMatrix, h: &Operator, channels: &[Channel], hbar: f64) -> Result<CMatrix> {
    Generator::new(h, channels, hbar)?.apply(rho)
}

/// Column-stacking Liouvillian `𝓛` with `vec(rhs(ρ)) = 𝓛 vec(ρ)`.
///
/// Uses `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
pub fn liouvillian_matrix(h: &Operator, channels: &[Channel], hbar: f64) -> Result<CMatrix> {
    let dim = h.dim();
    let id = CMatrix::identity(dim, dim);
    let hm = h.matrix();
    let mut sup = (id.kronecker(hm) - hm.transpose().kronecker(&id)).map(|z| z * Complex64::new(0.0, -1.0 / hbar));
    for ch in channels {
        check_dim(dim, ch.l.dim())?;
        let l = ch.l.matrix();
        let ldl = l.adjoint() * l;
        let term = id.kronecker(&ldl) + ldl.transpose().kronecker(&id) - l.conjugate().kronecker(l).map(|z| z * 2.0);
        sup -= term.map(|z| z * (ch.alpha / hbar));
    }
    Ok(sup)
}

/// Column-stacking vectorisation.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &nalgebra::DVector<Complex64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Choi matrix `Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` of a superoperator in
/// column-stacking form.
pub fn choi_matrix(superop: &CMatrix, dim: usize) -> CMatrix {
    let mut choi = CMatrix::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let col = j * dim + i;
            for a in 0..dim {
                for b in 0..dim {
                    choi[(i * dim + a, j * dim + b)] = superop[(b * dim + a, col)];
                }
            }
        }
    }
    choi
}

fn min_hermitian_eigenvalue(m: CMatrix) -> f64 {
    let herm = (&m + m.adjoint()).map(|z| z * 0.5);
    SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Outcome of [`cp_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub ok: bool,
    /// Every rate satisfies `α ≥ −1e−14`.
    pub rates_ok: bool,
    pub min_choi_eig: f64,
}

/// Induced 1-norm (largest absolute column sum).
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Probes complete positivity of the time slice `exp(𝓛·dt)`.
///
/// Requires `‖𝓛‖₁·dt ≤ 0.1`.
pub fn cp_check(h: &Operator, channels: &[Channel], hbar: f64, dt: f64) -> Result<CpReport> {
    let sup = liouvillian_matrix(h, channels, hbar)?;
    let norm = one_norm(&sup);
    if !(dt > 0.0) || norm * dt > 0.1 {
        return Err(Error::InvalidParameter(format!(
            "cp_check needs 0 < ‖𝓛‖·dt ≤ 0.1, got ‖𝓛‖ = {norm:.3e}, dt = {dt:e}"
        )));
    }
    let propagator = sup.map(|z| z * dt).exp();
    let min_choi_eig = min_hermitian_eigenvalue(choi_matrix(&propagator, h.dim()));
    let rates_ok = channels.iter().all(Channel::is_cp);
    Ok(CpReport { ok: rates_ok && min_choi_eig >= -CHOI_TOL, rates_ok, min_choi_eig })
}
