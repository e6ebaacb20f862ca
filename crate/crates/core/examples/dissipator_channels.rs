//! Diagonalise a dissipation matrix `a_mn` over a set of operators into
//! canonical channels and check both forms act identically.

use isolindblad::generator::{diagonalize_dissipator, dissipator};
use isolindblad::operators::build_ladder_basis;
use isolindblad::{max_abs, random, CMatrix, DissipationMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> isolindblad::Result<()> {
    let basis = build_ladder_basis(10, 1.0, 1.0)?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // couplings between K₁, K₂ and K₃
    let a = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(1.0, 0.0),
            c(0.2, 0.1),
            c(0.0, 0.0),
            c(0.2, -0.1),
            c(0.5, 0.0),
            c(0.0, 0.3),
            c(0.0, 0.0),
            c(0.0, -0.3),
            c(0.4, 0.0),
        ],
    );
    let dm = DissipationMatrix::new(a, vec![basis.k1.clone(), basis.k2.clone(), basis.k3.clone()])?;
    let channels = diagonalize_dissipator(&dm);
    for (i, ch) in channels.iter().enumerate() {
        println!("channel {i}: alpha = {:.6}  completely positive: {}", ch.alpha, ch.is_cp());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho = random::density_matrix_on(&mut rng, 10, 6);
    let gap = max_abs(&(dm.apply(&rho, 1.0)? - dissipator(&rho, &channels, 1.0)?));
    println!("max difference between the two forms: {gap:.3e}");
    Ok(())
}
