//! A thermal state under a softening spring: energy stays put while the
//! entropy grows, for a few initial temperatures.

use isolindblad::evolution::{evolve, thermal_state};
use isolindblad::operators::build_ladder_basis;
use isolindblad::SpringSchedule;

fn main() -> isolindblad::Result<()> {
    let schedule = SpringSchedule::linear(1.0, 0.15)?;
    let basis = build_ladder_basis(60, 1.0, 1.0)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "beta", "E(0)", "E drift", "S(0)", "S(4)");
    for beta in [4.0, 2.0, 1.0] {
        let rho0 = thermal_state(&basis, &schedule, 0.0, beta)?;
        let traj = evolve(&rho0, 0.0, 4.0, 2000, &basis, &schedule, 200)?;
        let (first, last) = (&traj.records[0], &traj.records[traj.records.len() - 1]);
        println!(
            "{beta:>6} {:>12.6} {:>12.3e} {:>12.6} {:>12.6}",
            first.energy,
            traj.max_energy_drift(),
            first.entropy,
            last.entropy
        );
        for w in &traj.warnings {
            println!("       warning: {w}");
        }
    }
    Ok(())
}
