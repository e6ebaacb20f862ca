//! The `verify` subcommand: seeded invariant suites over every module.
//!
//! Each suite draws from its own ChaCha stream of the user seed, so the
//! report does not depend on how the suites are scheduled across threads.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::{check_gamma_inequality, gamma, gamma_eigenbasis, SpectralDecomposition};
use crate::evolution::{evolve, ground_state, propagate, Frozen};
use crate::generator::{liouvillian_matrix, rhs, unvectorize, vectorize, Channel, Generator};
use crate::isoenergetic::{
    build_iso_generator, conservation_residual, energy_flow, energy_flow_hermitian, hermitian_residual,
    solve_oscillator_coefficients,
};
use crate::operators::{build_ladder_basis, relative_commutator_defect, Operator, SpringSchedule};
use crate::{max_abs, random, trace, DensityMatrix, Result};

pub const MIN_DIM: usize = 4;
/// Dense superoperators are `dim² × dim²`; beyond this the oracle checks get slow.
pub const MAX_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation metric over all cases.
    pub worst: f64,
    pub tol: f64,
    pub cases: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub dim: usize,
    pub seed: u64,
    pub cases: usize,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn render(&self) -> String {
        let mut s = format!("verify dim={} seed={} cases={}\n", self.dim, self.seed, self.cases);
        for r in &self.suites {
            let _ = write!(
                s,
                "{} {:<26} worst={:.3e} tol={:.0e} cases={}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.worst,
                r.tol,
                r.cases
            );
            if let Some(note) = &r.note {
                let _ = write!(s, " ({note})");
            }
            s.push('\n');
        }
        let passed = self.suites.iter().filter(|r| r.passed).count();
        let _ = writeln!(s, "{passed}/{} suites passed", self.suites.len());
        s
    }
}

type Suite = fn(usize, usize, &mut ChaCha8Rng) -> Result<SuiteResult>;

const SUITES: [(&str, Suite); 9] = [
    ("trace-annihilation", trace_annihilation),
    ("hermiticity", hermiticity),
    ("su11-closure", su11_closure),
    ("energy-flow-forms", energy_flow_forms),
    ("coefficient-uniqueness", coefficient_uniqueness),
    ("oracle-exp-vs-rk4", oracle_equivalence),
    ("gamma-formulas", gamma_formulas),
    ("gamma-inequality", gamma_inequality),
    ("entropy-monotone", entropy_monotone),
];

/// Runs every suite concurrently and collects the results in a fixed order.
pub fn run_suites(dim: usize, seed: u64, cases: usize) -> Report {
    let suites = std::thread::scope(|scope| {
        let handles: Vec<_> = SUITES
            .iter()
            .enumerate()
            .map(|(i, &(name, suite))| {
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    suite(dim, cases, &mut rng).unwrap_or_else(|e| SuiteResult {
                        name,
                        passed: false,
                        worst: f64::NAN,
                        tol: 0.0,
                        cases: 0,
                        note: Some(format!("error: {e}")),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite panicked")).collect()
    });
    Report { dim, seed, cases, suites }
}

fn outcome(name: &'static str, worst: f64, tol: f64, cases: usize) -> SuiteResult {
    SuiteResult { name, passed: worst <= tol, worst, tol, cases, note: None }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random Hamiltonian and channels with entries of order one.
fn random_generator(rng: &mut ChaCha8Rng, dim: usize) -> Result<(Operator, Vec<Channel>)> {
    let s = 1.0 / (dim as f64).sqrt();
    let h = Operator::hermitian(random::hermitian(rng, dim).map(|z| z * s), 1.0)?;
    let mut channels = Vec::new();
    for _ in 0..2 {
        let l = Operator::new(random::complex_matrix(rng, dim).map(|z| z * s), 1.0)?;
        channels.push(Channel::new(rng.random_range(0.0..1.0), l));
    }
    Ok((h, channels))
}

fn trace_annihilation(dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let (h, ch) = random_generator(rng, dim)?;
        let rho = random::density_matrix(rng, dim);
        worst = worst.max(trace(&rhs(&rho, &h, &ch, 1.0)?).norm());
    }
    Ok(outcome("trace-annihilation", worst, 1e-13, cases))
}

fn hermiticity(dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let (h, ch) = random_generator(rng, dim)?;
        let rho = random::density_matrix(rng, dim);
        let r = rhs(&rho, &h, &ch, 1.0)?;
        worst = worst.max(max_abs(&(&r - r.adjoint())));
    }
    Ok(outcome("hermiticity", worst, 1e-12, cases))
}

fn su11_closure(dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let hbar = log_uniform(rng, 0.1, 10.0);
        let omega = log_uniform(rng, 0.1, 10.0);
        worst = worst.max(relative_commutator_defect(&build_ladder_basis(dim, hbar, omega)?).max());
    }
    let mut r = outcome("su11-closure", worst, 1e-14, cases);
    r.note = Some("relative to the generator scale".into());
    Ok(r)
}

/// The general and double-commutator forms of the energy flow agree for
/// Hermitian Lindbladians, and the built oscillator generator satisfies both.
fn energy_flow_forms(dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut gap: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for _ in 0..cases {
        let s = 1.0 / (dim as f64).sqrt();
        let h = Operator::hermitian(random::hermitian(rng, dim).map(|z| z * s), 1.0)?;
        let l = Operator::hermitian(random::hermitian(rng, dim).map(|z| z * s), 1.0)?;
        let ch = [Channel::new(rng.random_range(0.0..1.0), l)];
        gap = gap.max(max_abs(&(energy_flow(&h, &ch)? - energy_flow_hermitian(&h, &ch)?)));

        let k0 = log_uniform(rng, 0.1, 10.0);
        let schedule = SpringSchedule::exponential(k0, rng.random_range(0.0..2.0))?;
        let basis = build_ladder_basis(dim, 1.0, k0.sqrt())?;
        let gen = build_iso_generator(&basis, &schedule, rng.random_range(0.0..5.0))?;
        let dhdt = gen.dhdt(&basis);
        let r3 = conservation_residual(&gen.h, &dhdt, &gen.channels, 1.0)?;
        let r5 = hermitian_residual(&gen.h, &dhdt, &gen.channels, 1.0)?;
        residual = residual.max(r3).max(r5);
    }
    let passed = gap <= 1e-12 && residual <= 1e-10;
    Ok(SuiteResult {
        name: "energy-flow-forms",
        passed,
        worst: gap,
        tol: 1e-12,
        cases,
        note: Some(format!("oscillator residual {residual:.3e} <= 1e-10")),
    })
}

fn coefficient_uniqueness(_dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut rays_ok = true;
    for _ in 0..cases {
        let k = rng.random_range(0.1..10.0);
        let kdot = rng.random_range(-5.0..0.0);
        let hbar = log_uniform(rng, 0.1, 10.0);
        let sol = solve_oscillator_coefficients(k, kdot, hbar)?;
        rays_ok &= sol.rays == 1 && !sol.trivial;
        let alpha = -kdot / (2.0 * hbar);
        let errs = [sol.c1.abs(), (sol.c2 - 1.0).abs(), sol.c3.abs(), ((sol.alpha - alpha) / alpha).abs()];
        worst = errs.into_iter().chain(sol.residuals.map(f64::abs)).fold(worst, f64::max);
    }
    let mut r = outcome("coefficient-uniqueness", worst, 1e-10, cases);
    r.passed &= rays_ok;
    if !rays_ok {
        r.note = Some("solution ray count differs from one".into());
    }
    Ok(r)
}

/// Piecewise-constant oscillator generators on four levels: RK4 against
/// exact exponentials of the Liouvillian, plus the one-step error order.
fn oracle_equivalence(_dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    const DIM: usize = 4;
    const SEGMENTS: usize = 4;
    const STEPS: usize = 200;
    let basis = build_ladder_basis(DIM, 1.0, 1.0)?;
    let runs = cases.min(20);
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for _ in 0..runs {
        let schedule = SpringSchedule::exponential(rng.random_range(0.5..2.0), rng.random_range(0.0..1.0))?;
        let rho0 = DensityMatrix::new(random::density_matrix(rng, DIM), 1.0)?;
        let seg = 1.0 / SEGMENTS as f64;
        let mut rho_rk = rho0.clone();
        let mut v = vectorize(rho0.matrix());
        for j in 0..SEGMENTS {
            let t = j as f64 * seg;
            let gen = build_iso_generator(&basis, &schedule, t + 0.5 * seg)?;
            let frozen = Frozen::new(Generator::new(&gen.h, &gen.channels, 1.0)?, 1.0);
            rho_rk = propagate(&frozen, &rho_rk, t, t + seg, STEPS)?;
            let sup = liouvillian_matrix(&gen.h, &gen.channels, 1.0)?;
            v = (sup * Complex64::new(seg, 0.0)).exp() * v;
        }
        worst = worst.max(max_abs(&(rho_rk.matrix() - unvectorize(&v, DIM))));

        let gen = build_iso_generator(&basis, &schedule, 0.0)?;
        let frozen = Frozen::new(Generator::new(&gen.h, &gen.channels, 1.0)?, 1.0);
        let sup = liouvillian_matrix(&gen.h, &gen.channels, 1.0)?;
        let defect = |dt: f64| -> Result<f64> {
            let stepped = propagate(&frozen, &rho0, 0.0, dt, 1)?;
            let exact = unvectorize(&((&sup * Complex64::new(dt, 0.0)).exp() * vectorize(rho0.matrix())), DIM);
            Ok(max_abs(&(stepped.matrix() - exact)))
        };
        ratios.push(defect(0.2)? / defect(0.1)?);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let order_ok = lo >= 16.0 && hi <= 64.0;
    let mut r = outcome("oracle-exp-vs-rk4", worst, 1e-6, runs);
    r.passed &= order_ok;
    r.note = Some(format!("one-step defect ratio in [{lo:.1}, {hi:.1}], need [16, 64]"));
    Ok(r)
}

fn random_pair(rng: &mut ChaCha8Rng, max_dim: usize, i: usize, hermitian_l: bool) -> Result<(DensityMatrix, Operator)> {
    let d = 2 + i % (max_dim.min(10) - 1);
    let rho = DensityMatrix::new(random::density_matrix(rng, d), 1.0)?;
    let s = 1.0 / (d as f64).sqrt();
    let l = if hermitian_l {
        Operator::hermitian(random::hermitian(rng, d).map(|z| z * s), 1.0)?
    } else {
        Operator::new(random::complex_matrix(rng, d).map(|z| z * s), 1.0)?
    };
    Ok((rho, l))
}

fn gamma_formulas(dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let (rho, l) = random_pair(rng, dim, i, i % 2 == 0)?;
        let direct = gamma(&rho, &l)?;
        let eig = gamma_eigenbasis(&SpectralDecomposition::new(rho.matrix()), &l)?;
        worst = worst.max((direct - eig).abs());
    }
    Ok(outcome("gamma-formulas", worst, 1e-9, cases))
}

fn gamma_inequality(dim: usize, cases: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for i in 0..cases {
        let hermitian_l = i % 2 == 0;
        let (rho, l) = random_pair(rng, dim, i, hermitian_l)?;
        let check = check_gamma_inequality(&rho, &l)?;
        all_ok &= check.ok;
        worst = worst.max(check.bound - check.gamma);
        if hermitian_l {
            worst = worst.max(-check.gamma);
        }
    }
    let mut r = outcome("gamma-inequality", worst.max(0.0), 1e-9, cases);
    r.passed &= all_ok;
    Ok(r)
}

fn entropy_monotone(dim: usize, _cases: usize, _rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let schedule = SpringSchedule::exponential(1.0, 0.2)?;
    let basis = build_ladder_basis(dim, 1.0, 1.0)?;
    let rho0 = ground_state(&basis, &schedule, 0.0)?;
    let traj = evolve(&rho0, 0.0, 1.0, 200, &basis, &schedule, 1)?;
    let worst = traj.records.windows(2).map(|w| w[0].entropy - w[1].entropy).fold(0.0, f64::max);
    Ok(outcome("entropy-monotone", worst, 1e-9, traj.records.len()))
}
