//! Initial states and fixed-step RK4 integration of the master equation.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use crate::entropy::{gamma_with, SpectralDecomposition};
use crate::generator::{CompiledChannel, Generator};
use crate::isoenergetic::build_iso_generator;
use crate::operators::{hamiltonian, LadderBasis, Operator, SpringSchedule, HERMITIAN_TOL};
use crate::sparse::SparseOp;
use crate::{max_abs, trace, CMatrix, Error, Result};

pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;

/// Largest per-step trace or Hermiticity correction accepted from RK4.
pub const RENORMALIZATION_LIMIT: f64 = 1e-8;

/// Tail population above which a run is flagged as leaking.
pub const LEAKAGE_THRESHOLD: f64 = 1e-3;

/// Per-record slack on entropy monotonicity.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
    trace_tol: f64,
    psd_tol: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity with the default
    /// tolerances.
    pub fn new(matrix: CMatrix, hbar: f64) -> Result<Self> {
        Self::with_tolerances(matrix, hbar, TRACE_TOL, PSD_TOL)
    }

    pub fn with_tolerances(matrix: CMatrix, hbar: f64, trace_tol: f64, psd_tol: f64) -> Result<Self> {
        let op = Operator::hermitian(matrix, hbar).map_err(|e| Error::InvalidState(e.to_string()))?;
        let tr = trace(op.matrix());
        if (tr - Complex64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = SymmetricEigen::new(op.matrix().clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -psd_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { op, trace_tol, psd_tol })
    }

    /// Skips the eigenvalue check; callers guarantee the invariants.
    pub(crate) fn trusted(matrix: CMatrix, hbar: f64) -> Self {
        let op = Operator::new(matrix, hbar).expect("square");
        DensityMatrix { op, trace_tol: TRACE_TOL, psd_tol: PSD_TOL }
    }

    /// Pure state `|ψ⟩⟨ψ|` of a normalised vector.
    pub fn pure(psi: &nalgebra::DVector<Complex64>, hbar: f64) -> Result<Self> {
        let norm = psi.norm();
        let psi = psi.map(|z| z / norm);
        Self::new(&psi * psi.adjoint(), hbar)
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn hbar(&self) -> f64 {
        self.op.hbar()
    }

    pub fn trace_tol(&self) -> f64 {
        self.trace_tol
    }

    pub fn psd_tol(&self) -> f64 {
        self.psd_tol
    }

    pub fn trace(&self) -> f64 {
        trace(self.matrix()).re
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        self.matrix().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `tr(Hρ)`
    pub fn expectation(&self, h: &Operator) -> f64 {
        trace(&(h.matrix() * self.matrix())).re
    }

    /// Population of the two guard levels.
    pub fn tail_population(&self) -> f64 {
        let n = self.dim();
        let m = self.matrix();
        m[(n - 1, n - 1)].re + m[(n - 2, n - 2)].re
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = self.matrix() - other.matrix();
        let herm = (&diff + diff.adjoint()).map(|z| z * 0.5);
        0.5 * SymmetricEigen::new(herm).eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Projector onto the lowest eigenvector of `H(t0)`.
pub fn ground_state(basis: &LadderBasis, schedule: &SpringSchedule, t0: f64) -> Result<DensityMatrix> {
    let h = hamiltonian(basis, schedule, t0)?;
    let eig = SymmetricEigen::new(h.into_matrix());
    let (imin, _) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
    let psi = eig.eigenvectors.column(imin).into_owned();
    let rho = &psi * psi.adjoint();
    let rho = (&rho + rho.adjoint()).map(|z| z * 0.5);
    DensityMatrix::new(rho, basis.hbar())
}

/// `exp(−βH(t0)) / tr exp(−βH(t0))`, shifted by the lowest eigenvalue.
pub fn thermal_state(basis: &LadderBasis, schedule: &SpringSchedule, t0: f64, beta: f64) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let h = hamiltonian(basis, schedule, t0)?;
    let eig = SymmetricEigen::new(h.into_matrix());
    let e_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = eig.eigenvalues.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = w.iter().sum();
    let u = &eig.eigenvectors;
    let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * (w[j] / z));
    let rho = scaled * u.adjoint();
    let rho = (&rho + rho.adjoint()).map(|z| z * 0.5);
    DensityMatrix::new(rho, basis.hbar())
}

/// Time-dependent generator consumed by the integrator.
pub trait GeneratorSource {
    fn dim(&self) -> usize;
    fn hbar(&self) -> f64;
    fn generator_at(&self, t: f64) -> Result<Generator>;
}

/// A time-independent generator.
pub struct Frozen {
    generator: Generator,
    hbar: f64,
}

impl Frozen {
    pub fn new(generator: Generator, hbar: f64) -> Self {
        Frozen { generator, hbar }
    }
}

impl GeneratorSource for Frozen {
    fn dim(&self) -> usize {
        self.generator.dim()
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }

    fn generator_at(&self, _t: f64) -> Result<Generator> {
        Ok(self.generator.clone())
    }
}

/// The isoenergetic oscillator generator with `K₂` pre-compiled.
pub struct IsoDynamics<'a> {
    basis: &'a LadderBasis,
    schedule: SpringSchedule,
    k2: CompiledChannel,
}

impl<'a> IsoDynamics<'a> {
    pub fn new(basis: &'a LadderBasis, schedule: SpringSchedule) -> Self {
        IsoDynamics { basis, schedule, k2: CompiledChannel::new(basis.k2.matrix()) }
    }

    pub fn basis(&self) -> &LadderBasis {
        self.basis
    }

    pub fn schedule(&self) -> &SpringSchedule {
        &self.schedule
    }
}

impl GeneratorSource for IsoDynamics<'_> {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn hbar(&self) -> f64 {
        self.basis.hbar()
    }

    fn generator_at(&self, t: f64) -> Result<Generator> {
        let kdot = self.schedule.kdot(t);
        if kdot > 0.0 {
            return Err(Error::CpViolation { t: Some(t), kdot });
        }
        let h = hamiltonian(self.basis, &self.schedule, t)?;
        let channels = if kdot == 0.0 { Vec::new() } else { vec![self.k2.with_alpha(-kdot / (2.0 * self.hbar()))] };
        Ok(Generator::from_parts(SparseOp::from_dense(h.matrix()), channels, self.hbar()))
    }
}

/// One classical RK4 step with stage-time generators, followed by
/// re-Hermitisation and trace renormalisation. Returns the new state and
/// the size of the correction.
pub fn rk4_step<S: GeneratorSource + ?Sized>(source: &S, rho: &CMatrix, t: f64, dt: f64) -> Result<(CMatrix, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let half = 0.5 * dt;
    let g0 = source.generator_at(t)?;
    let gh = source.generator_at(t + half)?;
    let g1 = source.generator_at(t + dt)?;

    let k1 = g0.apply(rho)?;
    let k2 = gh.apply(&(rho + k1.map(|z| z * half)))?;
    let k3 = gh.apply(&(rho + k2.map(|z| z * half)))?;
    let k4 = g1.apply(&(rho + k3.map(|z| z * dt)))?;
    let incr = (k1 + k4 + (k2 + k3).map(|z| z * 2.0)).map(|z| z * (dt / 6.0));
    let next = rho + incr;

    if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Diverged(t + dt));
    }
    let herm = (&next + next.adjoint()).map(|z| z * 0.5);
    let herm_fix = max_abs(&(&next - &herm));
    let tr = trace(&herm).re;
    let out = herm.map(|z| z / tr);
    let correction = herm_fix.max((tr - 1.0).abs());
    if correction > RENORMALIZATION_LIMIT {
        return Err(Error::Renormalization { t: t + dt, correction });
    }
    Ok((out, correction))
}

/// One RK4 step of the isoenergetic oscillator master equation.
pub fn step_rk4(
    rho: &DensityMatrix,
    t: f64,
    dt: f64,
    basis: &LadderBasis,
    schedule: &SpringSchedule,
) -> Result<DensityMatrix> {
    let dynamics = IsoDynamics::new(basis, *schedule);
    let (next, _) = rk4_step(&dynamics, rho.matrix(), t, dt)?;
    Ok(DensityMatrix::trusted(next, basis.hbar()))
}

/// Integrates `n_steps` uniform RK4 steps from `t0` to `t1` and returns the
/// final state.
pub fn propagate<S: GeneratorSource + ?Sized>(
    source: &S,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    n_steps: usize,
) -> Result<DensityMatrix> {
    check_window(t0, t1, n_steps)?;
    let dt = (t1 - t0) / n_steps as f64;
    let mut rho = rho0.matrix().clone();
    for j in 0..n_steps {
        rho = rk4_step(source, &rho, t0 + dt * j as f64, dt)?.0;
    }
    Ok(DensityMatrix::trusted(rho, source.hbar()))
}

fn check_window(t0: f64, t1: f64, n_steps: usize) -> Result<()> {
    if !(t1 > t0) || n_steps == 0 {
        return Err(Error::InvalidParameter(format!(
            "need t1 > t0 and n_steps >= 1, got [{t0}, {t1}] with {n_steps} steps"
        )));
    }
    Ok(())
}

/// Observables sampled along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub trace: f64,
    pub energy: f64,
    pub entropy: f64,
    /// Γ of the channel operator `K₂`.
    pub gamma: f64,
    pub entropy_rate: f64,
    pub purity: f64,
    pub min_eig: f64,
    pub tail_pop: f64,
}

impl TrajectoryRecord {
    pub const CSV_HEADER: &'static str = "t,trace,energy,entropy,gamma,entropy_rate,purity,min_eig,tail_pop";

    pub fn fields(&self) -> [f64; 9] {
        [
            self.t,
            self.trace,
            self.energy,
            self.entropy,
            self.gamma,
            self.entropy_rate,
            self.purity,
            self.min_eig,
            self.tail_pop,
        ]
    }
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: DensityMatrix,
    pub warnings: Vec<String>,
    /// `S(t_{j+1}) ≥ S(t_j) − 1e−9` at every pair of records.
    pub entropy_monotone: bool,
    /// Largest per-step renormalisation correction.
    pub max_correction: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn max_tail_pop(&self) -> f64 {
        self.records.iter().map(|r| r.tail_pop).fold(0.0, f64::max)
    }

    /// Largest `|E(t) − E(t0)| / |E(t0)|` over the records.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.records[0].energy;
        self.records.iter().map(|r| ((r.energy - e0) / e0).abs()).fold(0.0, f64::max)
    }

    pub fn final_energy_drift(&self) -> f64 {
        let e0 = self.records[0].energy;
        let e1 = self.records[self.records.len() - 1].energy;
        ((e1 - e0) / e0).abs()
    }

    pub fn has_leakage(&self) -> bool {
        self.max_tail_pop() > LEAKAGE_THRESHOLD
    }
}

/// Samples the observables of `rho` at time `t`.
pub fn observe(
    rho: &DensityMatrix,
    t: f64,
    basis: &LadderBasis,
    schedule: &SpringSchedule,
) -> Result<TrajectoryRecord> {
    let gen = build_iso_generator(basis, schedule, t)?;
    let decomp = SpectralDecomposition::new(rho.matrix());
    let gamma = gamma_with(&decomp, rho.matrix(), basis.k2.matrix())?;
    let alpha = gen.channels.first().map_or(0.0, |c| c.alpha);
    let record = TrajectoryRecord {
        t,
        trace: rho.trace(),
        energy: rho.expectation(&gen.h),
        entropy: decomp.entropy(),
        gamma,
        entropy_rate: 2.0 * alpha * gamma / basis.hbar(),
        purity: rho.purity(),
        min_eig: decomp.min_eigenvalue(),
        tail_pop: rho.tail_population(),
    };
    if record.fields().iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged(t));
    }
    if (record.trace - 1.0).abs() > rho.trace_tol() || record.min_eig < -rho.psd_tol() {
        return Err(Error::InvalidState(format!(
            "at t = {t}: trace {}, min eigenvalue {:e}",
            record.trace, record.min_eig
        )));
    }
    Ok(record)
}

/// Integrates the isoenergetic master equation over `[t0, t1]`, recording
/// observables every `record_every` steps and at the final step.
pub fn evolve(
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    n_steps: usize,
    basis: &LadderBasis,
    schedule: &SpringSchedule,
    record_every: usize,
) -> Result<Trajectory> {
    check_window(t0, t1, n_steps)?;
    let record_every = record_every.max(1);
    let dynamics = IsoDynamics::new(basis, *schedule);
    let dt = (t1 - t0) / n_steps as f64;
    let hbar = basis.hbar();

    let mut rho = rho0.clone();
    let mut records = vec![observe(&rho, t0, basis, schedule)?];
    let mut max_correction: f64 = 0.0;
    for j in 1..=n_steps {
        let t = t0 + dt * (j - 1) as f64;
        let (next, correction) = rk4_step(&dynamics, rho.matrix(), t, dt)?;
        max_correction = max_correction.max(correction);
        rho = DensityMatrix::trusted(next, hbar);
        if j % record_every == 0 || j == n_steps {
            let tj = if j == n_steps { t1 } else { t0 + dt * j as f64 };
            records.push(observe(&rho, tj, basis, schedule)?);
        }
    }

    let entropy_monotone = records.windows(2).all(|w| w[1].entropy >= w[0].entropy - MONOTONE_TOL);
    let mut warnings = Vec::new();
    if let Some(r) = records.iter().find(|r| r.tail_pop > LEAKAGE_THRESHOLD) {
        warnings.push(format!(
            "truncation leakage: tail population {:.3e} at t = {} exceeds {LEAKAGE_THRESHOLD:e}",
            r.tail_pop, r.t
        ));
    }
    debug_assert!(rho.op.hermiticity_defect() <= HERMITIAN_TOL);
    Ok(Trajectory { records, final_state: rho, warnings, entropy_monotone, max_correction, steps: n_steps })
}
