use isolindblad::evolution::{evolve, ground_state, propagate, thermal_state, Frozen};
use isolindblad::generator::rhs;
use isolindblad::operators::build_ladder_basis;
use isolindblad::{max_abs, random, CMatrix, Channel, DensityMatrix, Error, Generator, Operator, SpringSchedule};
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Superoperator assembled column by column from the action of `rhs` on the
/// matrix units, then exponentiated.
fn exact_map(h: &Operator, ch: &[Channel], t: f64) -> CMatrix {
    let n = h.dim();
    let mut sup = CMatrix::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let col = rhs(&e, h, ch, 1.0).unwrap();
            sup.set_column(j * n + i, &DVector::from_column_slice(col.as_slice()));
        }
    }
    (sup * Complex64::new(t, 0.0)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rk4_tracks_the_exact_semigroup(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Operator::hermitian(random::hermitian(&mut rng, dim), 1.0).unwrap();
        let l = Operator::new(random::complex_matrix(&mut rng, dim) * Complex64::new(0.5, 0.0), 1.0).unwrap();
        let ch = [Channel::new(0.4, l)];
        let rho0 = DensityMatrix::new(random::density_matrix(&mut rng, dim), 1.0).unwrap();
        let frozen = Frozen::new(Generator::new(&h, &ch, 1.0).unwrap(), 1.0);
        let rho = propagate(&frozen, &rho0, 0.0, 1.0, 400).unwrap();
        let v = exact_map(&h, &ch, 1.0) * DVector::from_column_slice(rho0.matrix().as_slice());
        let exact = CMatrix::from_column_slice(dim, dim, v.as_slice());
        prop_assert!(max_abs(&(rho.matrix() - exact)) <= 1e-8);
    }

    #[test]
    fn states_stay_physical(seed in any::<u64>(), rate in 0.0f64..1.0, k0 in 0.5f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = build_ladder_basis(16, 1.0, k0.sqrt()).unwrap();
        let sched = SpringSchedule::exponential(k0, rate).unwrap();
        let rho0 = DensityMatrix::new(random::density_matrix_on(&mut rng, 16, 6), 1.0).unwrap();
        let traj = evolve(&rho0, 0.0, 1.0, 200, &basis, &sched, 20).unwrap();
        for r in &traj.records {
            prop_assert!((r.trace - 1.0).abs() <= 1e-12);
            prop_assert!(r.min_eig >= -1e-9);
            prop_assert!(r.purity <= 1.0 + 1e-12);
        }
        prop_assert!(traj.entropy_monotone);
        prop_assert!(traj.final_state.matrix().iter().zip(traj.final_state.matrix().adjoint().iter()).all(|(a, b)| (a - b).norm() <= 1e-12));
    }
}

#[test]
fn pure_ground_state_of_current_spring() {
    let basis = build_ladder_basis(30, 1.0, 1.0).unwrap();
    let sched = SpringSchedule::constant(2.25).unwrap();
    let rho = ground_state(&basis, &sched, 0.0).unwrap();
    assert!((rho.purity() - 1.0).abs() <= 1e-12);
    let h = isolindblad::operators::hamiltonian(&basis, &sched, 0.0).unwrap();
    assert!((rho.expectation(&h) - 0.75).abs() <= 1e-8);
}

#[test]
fn thermal_weights_follow_boltzmann() {
    let basis = build_ladder_basis(40, 1.0, 1.0).unwrap();
    let rho = thermal_state(&basis, &SpringSchedule::constant(1.0).unwrap(), 0.0, 2.0).unwrap();
    let mut p = SymmetricEigen::new(rho.matrix().clone()).eigenvalues.as_slice().to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    for n in 0..5 {
        assert!((p[n + 1] / p[n] - (-2.0f64).exp()).abs() <= 1e-10);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let bad = CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.2, 0.0), Complex64::new(-0.2, 0.0)]));
    assert!(matches!(DensityMatrix::new(bad, 1.0), Err(Error::InvalidState(_))));
    let basis = build_ladder_basis(8, 1.0, 1.0).unwrap();
    let sched = SpringSchedule::exponential(1.0, 0.2).unwrap();
    assert!(matches!(thermal_state(&basis, &sched, 0.0, -1.0), Err(Error::InvalidParameter(_))));
    let rho = ground_state(&basis, &sched, 0.0).unwrap();
    assert!(evolve(&rho, 1.0, 0.0, 10, &basis, &sched, 1).is_err());
}
