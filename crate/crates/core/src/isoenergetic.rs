//! Lindbladians that keep the internal energy `E = tr(H(t)ρ(t))` constant.
//!
//! `dE/dt = 0` for every state holds when the operator identity
//!
//! ```text
//! ħ ∂H/∂t = Σₙ αₙ (Lₙ†LₙH + HLₙ†Lₙ − 2Lₙ†HLₙ)
//! ```
//!
//! is satisfied; for Hermitian `Lₙ` the right-hand side is
//! `Σₙ αₙ [Lₙ, [Lₙ, H]]`. For `H = K₁ + kK₂` with a single channel
//! `L = c₁K₁ + c₂K₂ + c₃K₃` the identity reduces to three polynomial
//! equations in `(c₁, c₂, c₃, α)` whose only nontrivial solution ray is
//! `L ∝ K₂`, `α = −k̇/(2ħ)` after fixing `c₂ = 1`.

use serde::Serialize;

use crate::generator::{self, Channel};
use crate::operators::{check_dim, hamiltonian, LadderBasis, Operator, SpringSchedule};
use crate::{max_abs_block, CMatrix, Error, Result};

/// `Σₙ αₙ(Lₙ†LₙH + HLₙ†Lₙ − 2Lₙ†HLₙ)`, the dissipative energy flow operator.
pub fn energy_flow(h: &Operator, channels: &[Channel]) -> Result<CMatrix> {
    let hm = h.matrix();
    let mut acc = CMatrix::zeros(h.dim(), h.dim());
    for ch in channels {
        check_dim(h.dim(), ch.l.dim())?;
        let l = ch.l.matrix();
        let l_dag = l.adjoint();
        // L†LH + HL†L − 2L†HL rearranged as L†[L,H] − [L†,H]L, which
        // subtracts much smaller intermediates
        let term = &l_dag * crate::commutator(l, hm) - crate::commutator(&l_dag, hm) * l;
        acc += term.map(|z| z * ch.alpha);
    }
    Ok(acc)
}

/// `Σₙ αₙ[Lₙ,[Lₙ,H]]`, equal to [`energy_flow`] when every `Lₙ` is Hermitian.
pub fn energy_flow_hermitian(h: &Operator, channels: &[Channel]) -> Result<CMatrix> {
    let hm = h.matrix();
    let mut acc = CMatrix::zeros(h.dim(), h.dim());
    for (n, ch) in channels.iter().enumerate() {
        check_dim(h.dim(), ch.l.dim())?;
        if !ch.l.is_hermitian() {
            return Err(Error::NonHermitianLindbladian(n));
        }
        let l = ch.l.matrix();
        let inner = crate::commutator(l, hm);
        acc += crate::commutator(l, &inner).map(|z| z * ch.alpha);
    }
    Ok(acc)
}

/// Residual of `ħ·dHdt − Σₙ αₙ(Lₙ†LₙH + HLₙ†Lₙ − 2Lₙ†HLₙ)` on the interior
/// block (the top two levels are excluded).
pub fn conservation_residual(h: &Operator, dhdt: &Operator, channels: &[Channel], hbar: f64) -> Result<f64> {
    check_dim(h.dim(), dhdt.dim())?;
    let r = dhdt.matrix().map(|z| z * hbar) - energy_flow(h, channels)?;
    Ok(max_abs_block(&r, interior(h.dim())))
}

/// Residual of `ħ·dHdt − Σₙ αₙ[Lₙ,[Lₙ,H]]` on the interior block.
pub fn hermitian_residual(h: &Operator, dhdt: &Operator, channels: &[Channel], hbar: f64) -> Result<f64> {
    check_dim(h.dim(), dhdt.dim())?;
    let r = dhdt.matrix().map(|z| z * hbar) - energy_flow_hermitian(h, channels)?;
    Ok(max_abs_block(&r, interior(h.dim())))
}

fn interior(dim: usize) -> usize {
    dim.saturating_sub(crate::operators::GUARD_LEVELS)
}

/// Solution of the oscillator coefficient equations, normalised to `c₂ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSolution {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub alpha: f64,
    /// Values of the three coupled equations at the solution.
    pub residuals: [f64; 3],
    /// Distinct nontrivial solution rays found by branch enumeration.
    pub rays: usize,
    /// `k̇ = 0`: no dissipation is needed and `α = 0`.
    pub trivial: bool,
}

/// The three coupled equations at `(c₁, c₂, c₃, α)`:
///
/// ```text
/// k c₁² − c₁c₂ + 2c₃²                   = 0
/// 2ħα (k c₁c₂ − c₂² − 2k c₃²) − k̇       = 0
/// (k c₁ + c₂) c₃                        = 0
/// ```
pub fn coefficient_equations(k: f64, kdot: f64, hbar: f64, c: [f64; 3], alpha: f64) -> [f64; 3] {
    let [c1, c2, c3] = c;
    [k * c1 * c1 - c1 * c2 + 2.0 * c3 * c3, 2.0 * hbar * alpha * rate_factor(k, c) - kdot, (k * c1 + c2) * c3]
        // −0.0 + 0.0 = 0.0, so printed residuals never carry a sign on zero
        .map(|r| r + 0.0)
}

fn rate_factor(k: f64, [c1, c2, c3]: [f64; 3]) -> f64 {
    k * c1 * c2 - c2 * c2 - 2.0 * k * c3 * c3
}

const SCAN_POINTS: usize = 2048;
const ROOT_TOL: f64 = 1e-13;
const SNAP_TOL: f64 = 1e-12;

/// Roots of `f` on `[a, b)`: sign changes refined by bisection, plus
/// tangential zeros found as near-zero local minima of `|f|`.
fn scan_roots(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    let h = (b - a) / SCAN_POINTS as f64;
    let xs: Vec<f64> = (0..=SCAN_POINTS).map(|i| a + h * i as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        let (x0, x1, f0, f1) = (xs[i], xs[i + 1], fs[i], fs[i + 1]);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            roots.push(bisect(&f, x0, x1, f0));
        } else if i > 0 && f0.abs() <= fs[i - 1].abs() && f0.abs() <= f1.abs() && f0.abs() < 1e-6 {
            let x = golden_min(|x| f(x).abs(), xs[i - 1], x1);
            if f(x).abs() < ROOT_TOL {
                roots.push(x);
            }
        }
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < 1e-16 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-15 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Candidate directions `(c₁, c₂, c₃)` on the unit sphere satisfying the
/// first and third equations, one list per branch of the third equation.
fn branch_directions(k: f64) -> Vec<[f64; 3]> {
    let pi = std::f64::consts::PI;
    let mut dirs = Vec::new();

    // c₃ = 0: (c₁, c₂) = (cos θ, sin θ); θ ∈ [0, π) covers every ray.
    let on_a = |t: f64| [t.cos(), t.sin(), 0.0];
    let fa = |t: f64| {
        let [c1, c2, c3] = on_a(t);
        k * c1 * c1 - c1 * c2 + 2.0 * c3 * c3
    };
    dirs.extend(scan_roots(fa, 0.0, pi).into_iter().map(on_a));

    // c₂ = −k c₁: (c₁, c₃) = (cos φ, sin φ).
    let on_b = |t: f64| normalize([t.cos(), -k * t.cos(), t.sin()]);
    let fb = |t: f64| {
        let [c1, c2, c3] = on_b(t);
        k * c1 * c1 - c1 * c2 + 2.0 * c3 * c3
    };
    dirs.extend(scan_roots(fb, 0.0, pi).into_iter().map(on_b));
    dirs
}

/// Solves the oscillator coefficient equations by enumerating the two
/// branches of `(k c₁ + c₂) c₃ = 0` and root-finding on each.
pub fn solve_oscillator_coefficients(k: f64, kdot: f64, hbar: f64) -> Result<CoefficientSolution> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::UnstablePotential { t: f64::NAN, k });
    }
    if !(hbar.is_finite() && hbar > 0.0) || !kdot.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite kdot and positive hbar, got {kdot}, {hbar}")));
    }
    if kdot > 0.0 {
        return Err(Error::CpViolation { t: None, kdot });
    }
    if kdot == 0.0 {
        let c = [0.0, 1.0, 0.0];
        return Ok(CoefficientSolution {
            c1: 0.0,
            c2: 1.0,
            c3: 0.0,
            alpha: 0.0,
            residuals: coefficient_equations(k, kdot, hbar, c, 0.0),
            rays: 0,
            trivial: true,
        });
    }

    let mut rays: Vec<[f64; 3]> = Vec::new();
    for d in branch_directions(k) {
        // the rate equation needs a nonzero factor to fix α
        if rate_factor(k, d).abs() < 1e-9 {
            continue;
        }
        if ((k * d[0] + d[1]) * d[2]).abs() > 1e-9 {
            continue;
        }
        let dup = rays.iter().any(|r| (r[0] * d[0] + r[1] * d[1] + r[2] * d[2]).abs() > 1.0 - 1e-9);
        if !dup {
            rays.push(d);
        }
    }

    let Some(&ray) = rays.first() else {
        return Err(Error::InvalidParameter(format!("no nontrivial solution found for k = {k}, kdot = {kdot}")));
    };
    // gauge: c → c/c₂, α → α·c₂²
    let mut c = [ray[0] / ray[1], 1.0, ray[2] / ray[1]];
    for v in c.iter_mut() {
        if v.abs() < SNAP_TOL {
            *v = 0.0;
        }
    }
    let alpha = kdot / (2.0 * hbar * rate_factor(k, c));
    Ok(CoefficientSolution {
        c1: c[0],
        c2: c[1],
        c3: c[2],
        alpha,
        residuals: coefficient_equations(k, kdot, hbar, c, alpha),
        rays: rays.len(),
        trivial: false,
    })
}

/// Hamiltonian and channels of the isoenergetic master equation at one time.
#[derive(Debug, Clone)]
pub struct IsoGenerator {
    pub t: f64,
    pub k: f64,
    pub kdot: f64,
    pub h: Operator,
    /// `[(−k̇/2ħ, K₂)]`, or empty when `k̇ = 0`.
    pub channels: Vec<Channel>,
}

impl IsoGenerator {
    /// `∂H/∂t = k̇ K₂`.
    pub fn dhdt(&self, basis: &LadderBasis) -> Operator {
        basis.k2.scale(self.kdot)
    }

    pub fn rhs(&self, rho: &CMatrix) -> Result<CMatrix> {
        generator::rhs(rho, &self.h, &self.channels, self.h.hbar())
    }
}

/// `H = K₁ + k(t)K₂` with the single channel `(α = −k̇/(2ħ), L = K₂)`.
pub fn build_iso_generator(basis: &LadderBasis, schedule: &SpringSchedule, t: f64) -> Result<IsoGenerator> {
    let kdot = schedule.kdot(t);
    if kdot > 0.0 {
        return Err(Error::CpViolation { t: Some(t), kdot });
    }
    let h = hamiltonian(basis, schedule, t)?;
    let channels =
        if kdot == 0.0 { Vec::new() } else { vec![Channel::new(-kdot / (2.0 * basis.hbar()), basis.k2.clone())] };
    Ok(IsoGenerator { t, k: schedule.k(t), kdot, h, channels })
}
