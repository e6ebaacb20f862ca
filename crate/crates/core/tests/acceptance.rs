//! Acceptance checks, one line per criterion. Oracles are built here from
//! scratch (ladder-operator products, Kronecker-product Liouvillians, fresh
//! eigendecompositions) rather than taken from the library.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use isolindblad::entropy::{check_gamma_inequality, gamma, gamma_eigenbasis, SpectralDecomposition};
use isolindblad::evolution::{evolve, ground_state, propagate, Frozen, Trajectory};
use isolindblad::generator::{cp_check, rhs};
use isolindblad::isoenergetic::{
    build_iso_generator, conservation_residual, energy_flow, energy_flow_hermitian, solve_oscillator_coefficients,
};
use isolindblad::operators::build_ladder_basis;
use isolindblad::{max_abs, random, trace, CMatrix, Channel, DensityMatrix, Generator, Operator, SpringSchedule};
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

// ---------------------------------------------------------------- oracles

/// `x`, `p` on `n + 2` levels from the ladder operator, `K` by products,
/// then cut to `n` levels. The two extra levels absorb the edge error of the
/// products, so the cut matrices are exact truncations.
fn oracle_k(n: usize, hbar: f64, omega: f64) -> [CMatrix; 3] {
    let m = n + 2;
    let mut a = CMatrix::zeros(m, m);
    for j in 1..m {
        a[(j - 1, j)] = c((j as f64).sqrt());
    }
    let ad = a.adjoint();
    let x = (&a + &ad) * c((hbar / (2.0 * omega)).sqrt());
    let p = (&ad - &a) * Complex64::new(0.0, (hbar * omega / 2.0).sqrt());
    let k1 = &p * &p * c(0.5);
    let k2 = &x * &x * c(0.5);
    let k3 = (&x * &p + &p * &x) * c(0.5);
    [k1, k2, k3].map(|k| k.view((0, 0), (n, n)).into_owned())
}

/// Column-stacked Liouvillian from Kronecker products.
fn oracle_liouvillian(h: &CMatrix, channels: &[(f64, CMatrix)], hbar: f64) -> CMatrix {
    let n = h.nrows();
    let id = CMatrix::identity(n, n);
    let mut sup = (id.kronecker(h) - h.transpose().kronecker(&id)) * Complex64::new(0.0, -1.0 / hbar);
    for (alpha, l) in channels {
        let ldl = l.adjoint() * l;
        let d = id.kronecker(&ldl) + ldl.transpose().kronecker(&id) - l.conjugate().kronecker(l) * c(2.0);
        sup -= d * c(alpha / hbar);
    }
    sup
}

/// `Σ α(L†LH + HL†L − 2L†HL)` expanded literally.
fn oracle_energy_flow(h: &CMatrix, channels: &[Channel]) -> CMatrix {
    let mut acc = CMatrix::zeros(h.nrows(), h.ncols());
    for ch in channels {
        let l = ch.l.matrix();
        let ld = l.adjoint();
        let ldl = &ld * l;
        acc += (&ldl * h + h * &ldl - &ld * h * l * c(2.0)) * c(ch.alpha);
    }
    acc
}

fn vec_of(m: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

fn mat_of(v: &DVector<Complex64>, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Minimum eigenvalue of the Choi matrix `Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
fn oracle_choi_min(map: &CMatrix, n: usize) -> f64 {
    let mut choi = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = c(1.0);
            let phi = mat_of(&(map * vec_of(&e)), n);
            choi.view_mut((i * n, j * n), (n, n)).copy_from(&phi);
        }
    }
    let choi = (&choi + choi.adjoint()) * c(0.5);
    SymmetricEigen::new(choi).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn oracle_gamma(rho: &CMatrix, l: &CMatrix) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    let u = &eig.eigenvectors;
    // the floor only touches kernel directions, which L does not reach here
    let logs = CMatrix::from_diagonal(&eig.eigenvalues.map(|p| c(p.max(1e-300).ln())));
    let ln_rho = u * logs * u.adjoint();
    let ld = l.adjoint();
    (ln_rho * (&ld * l * rho - l * rho * &ld)).trace().re
}

fn random_pair(r: &mut ChaCha8Rng, dim: usize, hermitian: bool) -> (DensityMatrix, Operator) {
    let rho = DensityMatrix::new(random::density_matrix(r, dim), 1.0).unwrap();
    let l = if hermitian {
        Operator::hermitian(random::hermitian(r, dim), 1.0).unwrap()
    } else {
        Operator::new(random::complex_matrix(r, dim), 1.0).unwrap()
    };
    (rho, l)
}

// -------------------------------------------------------------- criteria

fn coefficient_solution() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut one_ray = 0;
    for _ in 0..100 {
        let k = r.random_range(0.1..10.0);
        let kdot = r.random_range(-5.0..0.0);
        let s = solve_oscillator_coefficients(k, kdot, 1.0).unwrap();
        let alpha = -kdot / 2.0;
        let errs = [s.c1.abs(), (s.c2 - 1.0).abs(), s.c3.abs(), (s.alpha - alpha).abs()];
        worst = errs.into_iter().chain(s.residuals.map(f64::abs)).fold(worst, f64::max);
        one_ray += usize::from(s.rays == 1 && !s.trivial);
    }
    check(
        worst <= 1e-10 && one_ray == 100,
        format!("max |coefficient or residual error| {worst:.2e} <= 1e-10; one solution ray in {one_ray}/100 cases"),
    )
}

fn conservation_identity() -> Outcome {
    let sched = SpringSchedule::exponential(1.0, 0.2).unwrap();
    let mut residual: f64 = 0.0;
    let mut forms: f64 = 0.0;
    let mut basis_gap: f64 = 0.0;
    let mut literal: f64 = 0.0;
    for dim in [8, 16, 32, 64] {
        let basis = build_ladder_basis(dim, 1.0, 1.0).unwrap();
        let oracle = oracle_k(dim, 1.0, 1.0);
        for (lib, o) in [basis.k1.matrix(), basis.k2.matrix(), basis.k3.matrix()].into_iter().zip(&oracle) {
            basis_gap = basis_gap.max(max_abs(&(lib - o)));
        }
        for t in [0.0, 1.3, 5.0] {
            let g = build_iso_generator(&basis, &sched, t).unwrap();
            residual = residual.max(conservation_residual(&g.h, &g.dhdt(&basis), &g.channels, 1.0).unwrap());
            let general = energy_flow(&g.h, &g.channels).unwrap();
            forms = forms.max(max_abs(&(&general - energy_flow_hermitian(&g.h, &g.channels).unwrap())));
            let o = oracle_energy_flow(g.h.matrix(), &g.channels);
            literal = literal.max(max_abs(&(&general - &o)) / max_abs(&o).max(1.0));
        }
    }
    check(
        residual <= 1e-10 && forms <= 1e-12 && literal <= 1e-13 && basis_gap <= 1e-12,
        format!(
            "interior residual {residual:.2e} <= 1e-10; general vs double-commutator form {forms:.2e} <= 1e-12; vs literal expansion {literal:.2e} <= 1e-13 relative; K vs ladder-product oracle {basis_gap:.2e} <= 1e-12 (dims 8, 16, 32, 64)"
        ),
    )
}

fn reference_runs() -> Vec<(usize, Trajectory)> {
    let sched = SpringSchedule::exponential(1.0, 0.2).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = [40usize, 60, 80]
            .into_iter()
            .map(|dim| {
                s.spawn(move || {
                    let basis = build_ladder_basis(dim, 1.0, 1.0).unwrap();
                    let rho0 = ground_state(&basis, &sched, 0.0).unwrap();
                    (dim, evolve(&rho0, 0.0, 5.0, 5000, &basis, &sched, 10).unwrap())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn energy_conservation(runs: &[(usize, Trajectory)]) -> Outcome {
    let drifts: Vec<f64> = runs.iter().map(|(_, t)| t.max_energy_drift()).collect();
    let at60 = drifts[1];
    let shrinking = drifts.windows(2).all(|w| w[1] < w[0]);
    check(
        at60 <= 1e-4 && shrinking,
        format!(
            "max relative drift at dim 60 {at60:.3e} <= 1e-4; dims 40/60/80 give {:.3e} > {:.3e} > {:.3e}",
            drifts[0], drifts[1], drifts[2]
        ),
    )
}

fn entropy_monotonicity(runs: &[(usize, Trajectory)]) -> Outcome {
    let (_, traj) = &runs[1];
    let sched = SpringSchedule::exponential(1.0, 0.2).unwrap();
    let rec = &traj.records;
    let worst_drop = rec.windows(2).map(|w| w[0].entropy - w[1].entropy).fold(0.0, f64::max);

    let mut rate_formula: f64 = 0.0;
    let mut fd_mismatch: f64 = 0.0;
    let mut interior = 0;
    for j in 1..rec.len() - 1 {
        let expected = -sched.kdot(rec[j].t) * rec[j].gamma;
        rate_formula = rate_formula.max((rec[j].entropy_rate - expected).abs() / expected.abs());
        if (0.5..=4.5).contains(&rec[j].t) {
            let fd = (rec[j + 1].entropy - rec[j - 1].entropy) / (rec[j + 1].t - rec[j - 1].t);
            fd_mismatch = fd_mismatch.max((fd - expected).abs() / expected.abs());
            interior += 1;
        }
    }
    let rho = traj.final_state.matrix();
    let basis = build_ladder_basis(60, 1.0, 1.0).unwrap();
    let g = oracle_gamma(rho, basis.k2.matrix());
    let gamma_gap = (g - rec[rec.len() - 1].gamma).abs() / g.abs();
    check(
        worst_drop <= 1e-9 && rate_formula <= 1e-12 && fd_mismatch <= 1e-4 && gamma_gap <= 1e-8,
        format!(
            "largest entropy drop {worst_drop:.2e} <= 1e-9; rate vs -kdot*Gamma {rate_formula:.2e}; finite-difference slope rel. error {fd_mismatch:.2e} <= 1e-4 over {interior} records in [0.5, 4.5]; final Gamma vs oracle {gamma_gap:.2e}"
        ),
    )
}

fn gamma_inequality() -> Outcome {
    let mut r = rng(5);
    let mut failures = 0;
    let mut min_hermitian = f64::INFINITY;
    let mut oracle_gap: f64 = 0.0;
    for i in 0..500 {
        let dim = 2 + i % 9;
        let herm = i % 2 == 0;
        let (rho, l) = random_pair(&mut r, dim, herm);
        let res = check_gamma_inequality(&rho, &l).unwrap();
        let lm = l.matrix();
        let bound = trace(&((lm.adjoint() * lm - lm * lm.adjoint()) * rho.matrix())).re;
        let g = oracle_gamma(rho.matrix(), lm);
        oracle_gap = oracle_gap.max((g - res.gamma).abs() / (1.0 + g.abs()));
        if !res.ok || g < bound - 1e-9 {
            failures += 1;
        }
        if herm {
            min_hermitian = min_hermitian.min(res.gamma);
        }
    }
    check(
        failures == 0 && min_hermitian >= -1e-9 && oracle_gap <= 1e-9,
        format!(
            "{failures}/500 violations of Gamma >= tr([L^dag, L] rho) within 1e-9; min Gamma for Hermitian L {min_hermitian:.3e} >= -1e-9; Gamma vs oracle {oracle_gap:.2e}"
        ),
    )
}

fn gamma_formulas() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (rho, l) = random_pair(&mut r, 2 + i % 9, i % 3 == 0);
        let direct = gamma(&rho, &l).unwrap();
        let double_sum = gamma_eigenbasis(&SpectralDecomposition::new(rho.matrix()), &l).unwrap();
        worst = worst.max((direct - double_sum).abs());
    }
    check(worst <= 1e-9, format!("max |direct trace - eigenbasis double sum| {worst:.2e} <= 1e-9 over 200 pairs"))
}

fn oracle_equivalence() -> Outcome {
    const N: usize = 4;
    let basis = build_ladder_basis(N, 1.0, 1.0).unwrap();
    let [k1, k2, _] = oracle_k(N, 1.0, 1.0);
    // piecewise-constant (k, k̇) on four segments of length 0.5
    let segments = [(1.0, -0.4), (0.8, -0.3), (0.65, -0.2), (0.55, 0.0)];
    let mut r = rng(7);
    let rho0 = DensityMatrix::new(random::density_matrix(&mut r, N), 1.0).unwrap();

    let mut rho = rho0.clone();
    let mut v = vec_of(rho0.matrix());
    let mut t = 0.0;
    let mut defect_ratio = 0.0;
    for (i, &(k, kdot)) in segments.iter().enumerate() {
        let h = Operator::hermitian(basis.k1.matrix() + basis.k2.matrix() * c(k), 1.0).unwrap();
        let channels: Vec<Channel> =
            if kdot < 0.0 { vec![Channel::new(-kdot / 2.0, basis.k2.clone())] } else { Vec::new() };
        let frozen = Frozen::new(Generator::new(&h, &channels, 1.0).unwrap(), 1.0);
        rho = propagate(&frozen, &rho, t, t + 0.5, 500).unwrap();

        let h_o = &k1 + &k2 * c(k);
        let ch_o: Vec<(f64, CMatrix)> = channels.iter().map(|_| (-kdot / 2.0, k2.clone())).collect();
        let sup = oracle_liouvillian(&h_o, &ch_o, 1.0);
        v = (&sup * c(0.5)).exp() * v;
        t += 0.5;

        if i == 0 {
            let defect = |dt: f64| {
                let stepped = propagate(&frozen, &rho0, 0.0, dt, 1).unwrap();
                let exact = mat_of(&((&sup * c(dt)).exp() * vec_of(rho0.matrix())), N);
                max_abs(&(stepped.matrix() - exact))
            };
            defect_ratio = defect(0.2) / defect(0.1);
        }
    }
    let dist = max_abs(&(rho.matrix() - mat_of(&v, N)));
    check(
        dist <= 1e-6 && (16.0..=64.0).contains(&defect_ratio),
        format!("final max-element distance {dist:.2e} <= 1e-6; one-step defect ratio at dt 0.2/0.1 {defect_ratio:.2} in [16, 64]"),
    )
}

fn structural_conservation() -> Outcome {
    let mut r = rng(8);
    let mut tr_max: f64 = 0.0;
    let mut herm_max: f64 = 0.0;
    for i in 0..100 {
        let dim = 2 + i % 11;
        let s = c(1.0 / (dim as f64).sqrt());
        let h = Operator::hermitian(random::hermitian(&mut r, dim) * s, 1.0).unwrap();
        let ch: Vec<Channel> = (0..2)
            .map(|_| {
                let l = Operator::new(random::complex_matrix(&mut r, dim) * s, 1.0).unwrap();
                Channel::new(r.random_range(0.0..1.0), l)
            })
            .collect();
        let rho = random::density_matrix(&mut r, dim);
        let out = rhs(&rho, &h, &ch, 1.0).unwrap();
        tr_max = tr_max.max(trace(&out).norm());
        herm_max = herm_max.max(max_abs(&(&out - out.adjoint())));
    }

    let dim = 4;
    let dt = 1e-3;
    let h = Operator::hermitian(random::hermitian(&mut r, dim), 1.0).unwrap();
    let l = Operator::new(random::complex_matrix(&mut r, dim), 1.0).unwrap();
    let mut choi = [0.0; 2];
    let mut lib = [0.0; 2];
    for (slot, alpha) in [0.3, -0.1].into_iter().enumerate() {
        let ch = [Channel::new(alpha, l.clone())];
        let sup = oracle_liouvillian(h.matrix(), &[(alpha, l.matrix().clone())], 1.0);
        choi[slot] = oracle_choi_min(&(sup * c(dt)).exp(), dim);
        lib[slot] = cp_check(&h, &ch, 1.0, dt).unwrap().min_choi_eig;
    }
    let agree = (choi[0] - lib[0]).abs() <= 1e-12 && (choi[1] - lib[1]).abs() <= 1e-12;
    check(
        tr_max <= 1e-13 && herm_max <= 1e-12 && choi[0] >= -1e-8 && choi[1] < -1e-9 && agree,
        format!(
            "|tr rhs| {tr_max:.2e} <= 1e-13; Hermiticity {herm_max:.2e} <= 1e-12; Choi min eig {:.2e} >= -1e-8 for alpha = 0.3, {:.2e} < -1e-9 for alpha = -0.1; library Choi agrees with oracle",
            choi[0], choi[1]
        ),
    )
}

fn cli_contract() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_isolindblad");
    let dir = tempfile::tempdir().unwrap();
    let write_cfg = |name: &str, rate: f64| {
        let text = format!(
            "dim = 16\n\n[schedule]\nkind = \"exponential\"\nk0 = 1.0\nrate = {rate}\n\n[time]\nt1 = 2.0\nn_steps = 500\nrecord_every = 10\n\n[output]\npath = \"{}\"\n",
            dir.path().join(format!("{name}.csv")).display()
        );
        let p = dir.path().join(format!("{name}.toml"));
        std::fs::write(&p, text).unwrap();
        p
    };
    let run = |args: &[&str]| Command::new(exe).args(args).output().unwrap();
    let code = |args: &[&str]| run(args).status.code().unwrap_or(-1);
    let arg = |p: &Path| p.to_str().unwrap().to_string();

    let good = write_cfg("a", 0.2);
    let ok_a = code(&["simulate", "--config", &arg(&good)]);
    let csv_a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let ok_b = code(&["simulate", "--config", &arg(&good)]);
    let csv_b = std::fs::read(dir.path().join("a.csv")).unwrap();
    let v1 = run(&["verify", "--dim", "6", "--seed", "42", "--cases", "30"]);
    let v2 = run(&["verify", "--dim", "6", "--seed", "42", "--cases", "30"]);
    let identical = csv_a == csv_b && v1.stdout == v2.stdout && !csv_a.is_empty();

    let bad = write_cfg("bad", -0.1);
    let leak = write_cfg("leak", 2.0);
    let got = [
        code(&["simulate", "--config", &arg(&bad)]),
        code(&["simulate", "--config", &arg(&leak), "--dim", "8", "--strict"]),
        code(&["solve-coefficients", "--k", "1", "--kdot", "0.5"]),
    ];
    check(
        ok_a == 0 && ok_b == 0 && v1.status.code() == Some(0) && identical && got == [1, 2, 3],
        format!(
            "repeated simulate and verify output byte-identical: {identical}; exit codes success {ok_a}, config/CP/strict-leakage {:?} (expect [1, 2, 3])",
            got
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        all &= o.passed;
        println!("{} {n} {name}: {} ({secs:.2} s)", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, "coefficient solution", &mut coefficient_solution);
    report(2, "conservation identity", &mut conservation_identity);
    let start = Instant::now();
    let runs = reference_runs();
    println!("     reference runs at dims 40, 60, 80 in parallel: {:.2} s", start.elapsed().as_secs_f64());
    report(3, "energy conservation", &mut || energy_conservation(&runs));
    report(4, "entropy monotonicity", &mut || entropy_monotonicity(&runs));
    report(5, "Gamma inequality", &mut gamma_inequality);
    report(6, "Gamma formula cross-check", &mut gamma_formulas);
    report(7, "oracle equivalence", &mut oracle_equivalence);
    report(8, "structural conservation", &mut structural_conservation);
    report(9, "CLI determinism and exit codes", &mut cli_contract);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
