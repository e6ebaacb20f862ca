//! Truncated Fock-basis operators for the unit-mass oscillator.
//!
//! The basis is that of a reference oscillator with frequency `ω_ref`:
//!
//! ```text
//! x = √(ħ/2ω_ref) (a + a†)        p = i √(ħω_ref/2) (a† − a)
//! ```
//!
//! The quadratic generators are the truncations of the infinite-dimensional
//! operators, `P K P`, built from their normal-ordered ladder expansions:
//!
//! ```text
//! K₁ = p²/2        = ħω_ref/4 (2a†a + 1 − a² − a†²)
//! K₂ = x²/2        = ħ/(4ω_ref) (2a†a + 1 + a² + a†²)
//! K₃ = (xp + px)/2 = iħ/2 (a†² − a²)
//! ```
//!
//! With this construction the su(1,1) relations and every identity derived
//! from them hold exactly outside the two guard levels. Squaring truncated
//! `x` and `p` instead would corrupt the top diagonal entry, and that error
//! reaches the interior block through the double commutator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{commutator, max_abs, max_abs_block, CMatrix, Error, Result};

/// Per-element tolerance for the Hermitian tag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Number of top Fock levels excluded from identity checks.
pub const GUARD_LEVELS: usize = 2;

/// Smallest basis that still has an interior block for quadratic operators.
pub const MIN_DIM: usize = 4;

/// Dense square operator tagged with the ħ it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    hbar: f64,
    hermitian: bool,
}

impl Operator {
    pub fn new(matrix: CMatrix, hbar: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        Ok(Operator { matrix, hbar, hermitian: false })
    }

    /// Builds an operator and tags it Hermitian, failing if any element of
    /// `M − M†` exceeds [`HERMITIAN_TOL`].
    pub fn hermitian(matrix: CMatrix, hbar: f64) -> Result<Self> {
        let mut op = Self::new(matrix, hbar)?;
        let deviation = op.hermiticity_defect();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { what: "operator", deviation });
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn zeros(dim: usize, hbar: f64) -> Self {
        Operator { matrix: CMatrix::zeros(dim, dim), hbar, hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn adjoint(&self) -> Operator {
        Operator { matrix: self.matrix.adjoint(), hbar: self.hbar, hermitian: self.hermitian }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator { matrix: self.matrix.map(|z| z * s), hbar: self.hbar, hermitian: self.hermitian }
    }

    /// `self + s·other`; the Hermitian tag survives when both are tagged.
    pub fn add_scaled(&self, other: &Operator, s: f64) -> Result<Operator> {
        check_dim(self.dim(), other.dim())?;
        Ok(Operator {
            matrix: &self.matrix + other.matrix.map(|z| z * s),
            hbar: self.hbar,
            hermitian: self.hermitian && other.hermitian,
        })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Time dependence of the spring coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `k(t) = k0`
    Constant,
    /// `k(t) = max(k0 − rate·t, floor·k0)`
    Linear,
    /// `k(t) = k0·exp(−rate·t)`
    Exponential,
}

pub const DEFAULT_FLOOR_FRACTION: f64 = 0.01;

/// Analytic spring coefficient `k(t)` with its exact derivative.
///
/// A non-negative `rate` makes the potential widen in time. Negative rates
/// are representable so the forbidden `k̇ > 0` regime can be exercised; the
/// isoenergetic generator rejects them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringSchedule {
    kind: ScheduleKind,
    k0: f64,
    rate: f64,
    floor_fraction: f64,
}

impl SpringSchedule {
    pub fn new(kind: ScheduleKind, k0: f64, rate: f64, floor_fraction: f64) -> Result<Self> {
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(Error::InvalidParameter(format!("k0 must be positive and finite, got {k0}")));
        }
        if !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be finite, got {rate}")));
        }
        if !(floor_fraction.is_finite() && (0.0..1.0).contains(&floor_fraction)) {
            return Err(Error::InvalidParameter(format!("floor fraction must lie in [0, 1), got {floor_fraction}")));
        }
        Ok(SpringSchedule { kind, k0, rate, floor_fraction })
    }

    pub fn constant(k0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant, k0, 0.0, DEFAULT_FLOOR_FRACTION)
    }

    pub fn linear(k0: f64, slope: f64) -> Result<Self> {
        Self::new(ScheduleKind::Linear, k0, slope, DEFAULT_FLOOR_FRACTION)
    }

    pub fn exponential(k0: f64, decay: f64) -> Result<Self> {
        Self::new(ScheduleKind::Exponential, k0, decay, DEFAULT_FLOOR_FRACTION)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn floor_fraction(&self) -> f64 {
        self.floor_fraction
    }

    fn clamped(&self, t: f64) -> bool {
        self.k0 - self.rate * t <= self.floor_fraction * self.k0
    }

    pub fn k(&self, t: f64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.k0,
            ScheduleKind::Linear => {
                if self.clamped(t) {
                    self.floor_fraction * self.k0
                } else {
                    self.k0 - self.rate * t
                }
            }
            ScheduleKind::Exponential => self.k0 * (-self.rate * t).exp(),
        }
    }

    pub fn kdot(&self, t: f64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => 0.0,
            ScheduleKind::Linear => {
                if self.clamped(t) {
                    0.0
                } else {
                    -self.rate
                }
            }
            ScheduleKind::Exponential => -self.rate * self.k(t),
        }
    }
}

/// Position, momentum and su(1,1) generators in one truncated basis.
#[derive(Debug, Clone)]
pub struct LadderBasis {
    pub x: Operator,
    pub p: Operator,
    pub k1: Operator,
    pub k2: Operator,
    pub k3: Operator,
    hbar: f64,
    omega_ref: f64,
}

impl LadderBasis {
    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    /// Side of the interior block on which identities are checked.
    pub fn interior(&self) -> usize {
        self.dim() - GUARD_LEVELS
    }
}

/// Truncated Fock-basis matrices of `x`, `p`, `K₁`, `K₂`, `K₃`.
pub fn build_ladder_basis(dim: usize, hbar: f64, omega_ref: f64) -> Result<LadderBasis> {
    if dim < MIN_DIM {
        return Err(Error::DimensionTooSmall(dim));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    if !(omega_ref.is_finite() && omega_ref > 0.0) {
        return Err(Error::InvalidParameter(format!("omega_ref must be positive, got {omega_ref}")));
    }

    let re = |v: f64| Complex64::new(v, 0.0);
    let im = |v: f64| Complex64::new(0.0, v);
    let xs = (hbar / (2.0 * omega_ref)).sqrt();
    let ps = (hbar * omega_ref / 2.0).sqrt();

    let mut x = CMatrix::zeros(dim, dim);
    let mut p = CMatrix::zeros(dim, dim);
    let mut k1 = CMatrix::zeros(dim, dim);
    let mut k2 = CMatrix::zeros(dim, dim);
    let mut k3 = CMatrix::zeros(dim, dim);

    for n in 0..dim {
        let level = (2 * n + 1) as f64;
        k1[(n, n)] = re(hbar * omega_ref / 4.0 * level);
        k2[(n, n)] = re(hbar / (4.0 * omega_ref) * level);
        if n + 1 < dim {
            // ⟨n|a|n+1⟩ = √(n+1)
            let s = ((n + 1) as f64).sqrt();
            x[(n, n + 1)] = re(xs * s);
            x[(n + 1, n)] = re(xs * s);
            p[(n, n + 1)] = im(-ps * s);
            p[(n + 1, n)] = im(ps * s);
        }
        if n + 2 < dim {
            // ⟨n|a²|n+2⟩ = √((n+1)(n+2))
            let s = (((n + 1) * (n + 2)) as f64).sqrt();
            k1[(n, n + 2)] = re(-hbar * omega_ref / 4.0 * s);
            k1[(n + 2, n)] = re(-hbar * omega_ref / 4.0 * s);
            k2[(n, n + 2)] = re(hbar / (4.0 * omega_ref) * s);
            k2[(n + 2, n)] = re(hbar / (4.0 * omega_ref) * s);
            k3[(n, n + 2)] = im(-hbar / 2.0 * s);
            k3[(n + 2, n)] = im(hbar / 2.0 * s);
        }
    }

    Ok(LadderBasis {
        x: Operator::hermitian(x, hbar)?,
        p: Operator::hermitian(p, hbar)?,
        k1: Operator::hermitian(k1, hbar)?,
        k2: Operator::hermitian(k2, hbar)?,
        k3: Operator::hermitian(k3, hbar)?,
        hbar,
        omega_ref,
    })
}

/// `H(t) = K₁ + k(t)K₂`.
pub fn hamiltonian(basis: &LadderBasis, schedule: &SpringSchedule, t: f64) -> Result<Operator> {
    let k = schedule.k(t);
    if !(k > 0.0) {
        return Err(Error::UnstablePotential { t, k });
    }
    basis.k1.add_scaled(&basis.k2, k)
}

/// Interior-block defects of the three su(1,1) relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorDefect {
    /// `[K₁,K₂] + iħK₃`
    pub d12: f64,
    /// `[K₂,K₃] − 2iħK₂`
    pub d23: f64,
    /// `[K₃,K₁] − 2iħK₁`
    pub d31: f64,
}

impl CommutatorDefect {
    pub fn max(&self) -> f64 {
        self.d12.max(self.d23).max(self.d31)
    }
}

fn su11_residuals(basis: &LadderBasis) -> [CMatrix; 3] {
    let ih = Complex64::new(0.0, basis.hbar);
    let (k1, k2, k3) = (basis.k1.matrix(), basis.k2.matrix(), basis.k3.matrix());
    [
        commutator(k1, k2) + k3.map(|z| z * ih),
        commutator(k2, k3) - k2.map(|z| z * ih * 2.0),
        commutator(k3, k1) - k1.map(|z| z * ih * 2.0),
    ]
}

/// Max-element defects of the su(1,1) relations on the interior block.
pub fn commutator_defect(basis: &LadderBasis) -> CommutatorDefect {
    let n = basis.interior();
    let [a, b, c] = su11_residuals(basis);
    CommutatorDefect { d12: max_abs_block(&a, n), d23: max_abs_block(&b, n), d31: max_abs_block(&c, n) }
}

/// The same defects over the full matrices, guard levels included.
pub fn commutator_defect_full(basis: &LadderBasis) -> CommutatorDefect {
    let [a, b, c] = su11_residuals(basis);
    CommutatorDefect { d12: max_abs(&a), d23: max_abs(&b), d31: max_abs(&c) }
}

/// Interior defects divided by the product of the largest entries of the two
/// commuted generators. Round-off in `[A, B]` grows with `|A||B|`, so this is
/// the size-independent measure for large truncations.
pub fn relative_commutator_defect(basis: &LadderBasis) -> CommutatorDefect {
    let d = commutator_defect(basis);
    let (m1, m2, m3) = (max_abs(basis.k1.matrix()), max_abs(basis.k2.matrix()), max_abs(basis.k3.matrix()));
    CommutatorDefect { d12: d.d12 / (m1 * m2), d23: d.d23 / (m2 * m3), d31: d.d31 / (m3 * m1) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ground_state_variance() {
        let b = build_ladder_basis(4, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(b.k2.matrix()[(0, 0)].re, 0.25, epsilon = 1e-15);
        let b = build_ladder_basis(4, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(b.k2.matrix()[(0, 0)].re, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn rejects_small_dimension() {
        assert_eq!(build_ladder_basis(3, 1.0, 1.0).unwrap_err(), Error::DimensionTooSmall(3));
        let msg = build_ladder_basis(2, 1.0, 1.0).unwrap_err().to_string();
        assert!(msg.contains("dimension too small for quadratic operators"));
    }

    #[test]
    fn generators_are_hermitian() {
        for dim in [4, 9, 30] {
            let b = build_ladder_basis(dim, 1.3, 0.7).unwrap();
            for op in [&b.x, &b.p, &b.k1, &b.k2, &b.k3] {
                assert!(op.is_hermitian());
                assert!(op.hermiticity_defect() <= 1e-12);
            }
        }
    }

    /// Hand-built 4×4 matrices at ħ = ω_ref = 1:
    /// K₁ = ¼[[1,0,−√2,0],[0,3,0,−√6],[−√2,0,5,0],[0,−√6,0,7]],
    /// K₂ = ¼[[1,0,√2,0],[0,3,0,√6],[√2,0,5,0],[0,√6,0,7]],
    /// K₃ = ½[[0,0,−i√2,0],[0,0,0,−i√6],[i√2,0,0,0],[0,i√6,0,0]].
    #[test]
    fn dim4_algebra_by_hand() {
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let k1 = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(-s2, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(-s6, 0.0),
                c(-s2, 0.0),
                c(0.0, 0.0),
                c(5.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-s6, 0.0),
                c(0.0, 0.0),
                c(7.0, 0.0),
            ],
        )
        .map(|z| z * 0.25);
        let k2 = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(s2, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(s6, 0.0),
                c(s2, 0.0),
                c(0.0, 0.0),
                c(5.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(s6, 0.0),
                c(0.0, 0.0),
                c(7.0, 0.0),
            ],
        )
        .map(|z| z * 0.25);
        let b = build_ladder_basis(4, 1.0, 1.0).unwrap();
        assert!(max_abs(&(b.k1.matrix() - &k1)) < 1e-15);
        assert!(max_abs(&(b.k2.matrix() - &k2)) < 1e-15);

        // [K₁,K₂]_{02} = Σ_m K₁_{0m}K₂_{m2} − K₂_{0m}K₁_{m2}
        //             = (1·√2 + (−√2)·5 − (1·(−√2) + √2·5))/16 = −8√2/16 = −√2/2
        // and iK₃_{02} = i·(−i√2/2) = √2/2, so the sum vanishes.
        let comm = commutator(&k1, &k2);
        assert_abs_diff_eq!(comm[(0, 2)].re, -s2 / 2.0, epsilon = 1e-15);
        let d = comm + b.k3.matrix().map(|z| z * c(0.0, 1.0));
        assert!(max_abs_block(&d, 2) == 0.0 || max_abs_block(&d, 2) < 1e-15);
    }

    #[test]
    fn dim4_full_matrices_break_algebra() {
        let b = build_ladder_basis(4, 1.0, 1.0).unwrap();
        let full = commutator_defect_full(&b);
        // [K₁,K₂] + iħK₃ happens to survive truncation; the other two do not
        assert!(full.d12 < 1e-15, "{full:?}");
        assert!(full.d23 > 0.1 && full.d31 > 0.1, "{full:?}");
        assert!(commutator_defect(&b).max() < 1e-14);
    }

    #[test]
    fn interior_closure() {
        for hbar in [1.0, 2.0] {
            let b = build_ladder_basis(16, hbar, 1.0).unwrap();
            let d = commutator_defect(&b);
            assert!(d.max() <= 1e-12, "{d:?}");
        }
    }

    #[test]
    fn ground_energy_converges() {
        let b = build_ladder_basis(20, 1.0, 1.0).unwrap();
        let h = hamiltonian(&b, &SpringSchedule::constant(1.0).unwrap(), 0.0).unwrap();
        let eig = SymmetricEigen::new(h.into_matrix()).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(min, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn constant_schedule_is_time_independent() {
        let b = build_ladder_basis(10, 1.0, 1.0).unwrap();
        let s = SpringSchedule::constant(1.7).unwrap();
        assert_eq!(hamiltonian(&b, &s, 0.3).unwrap(), hamiltonian(&b, &s, 42.0).unwrap());
    }

    #[test]
    fn exponential_schedule_arithmetic() {
        let s = SpringSchedule::exponential(2.0, 0.5).unwrap();
        let t = 2f64.ln() / 0.5;
        assert_abs_diff_eq!(s.k(t), 1.0, epsilon = 1e-15);
        let b = build_ladder_basis(8, 1.0, 1.0).unwrap();
        let h = hamiltonian(&b, &s, t).unwrap();
        let expected = b.k1.add_scaled(&b.k2, 1.0).unwrap();
        assert!(max_abs(&(h.matrix() - expected.matrix())) < 1e-14);
        assert_abs_diff_eq!(s.kdot(0.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn linear_schedule_clamps() {
        let s = SpringSchedule::linear(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(s.k(1.0), 0.5);
        assert_eq!(s.kdot(1.0), -0.5);
        assert_abs_diff_eq!(s.k(3.0), 0.01);
        assert_eq!(s.kdot(3.0), 0.0);
        // past the crossing 1 − 0.5t = 0.01
        assert_eq!(s.kdot(1.99), 0.0);
    }

    #[test]
    fn unstable_potential() {
        let s = SpringSchedule::new(ScheduleKind::Linear, 1.0, 1.0, 0.0).unwrap();
        let b = build_ladder_basis(6, 1.0, 1.0).unwrap();
        let err = hamiltonian(&b, &s, 2.0).unwrap_err();
        assert!(err.to_string().contains("unstable potential"));
        assert!(SpringSchedule::constant(-1.0).is_err());
    }

    #[test]
    fn hermitian_tag_rejects_asymmetric() {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(Operator::hermitian(m.clone(), 1.0).is_err());
        assert!(!Operator::new(m, 1.0).unwrap().is_hermitian());
        assert!(Operator::new(CMatrix::zeros(2, 3), 1.0).is_err());
    }
}
