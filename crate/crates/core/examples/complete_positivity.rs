//! Complete positivity of the short-time map `exp(𝓛 dt)` for shrinking and
//! growing springs: the Choi matrix picks up a negative eigenvalue exactly
//! when the rate `α = −k̇/2ħ` turns negative.

use isolindblad::generator::cp_check;
use isolindblad::operators::{build_ladder_basis, hamiltonian};
use isolindblad::{Channel, SpringSchedule};

fn main() -> isolindblad::Result<()> {
    let basis = build_ladder_basis(6, 1.0, 1.0)?;
    let h = hamiltonian(&basis, &SpringSchedule::constant(1.0)?, 0.0)?;
    for kdot in [-0.4, -0.1, 0.0, 0.1, 0.4] {
        let alpha = 0.0 - kdot / 2.0;
        let channels = [Channel::new(alpha, basis.k2.clone())];
        let r = cp_check(&h, &channels, 1.0, 1e-3)?;
        println!("kdot = {kdot:>5}  alpha = {alpha:>5}  min Choi eigenvalue = {:>10.3e}  CP: {}", r.min_choi_eig, r.ok);
    }
    Ok(())
}
