//! Energy drift of the reference protocol as the Fock truncation grows.
//!
//! Each dimension runs on its own thread; the runs share nothing.

use std::time::Instant;

use isolindblad::evolution::{evolve, ground_state};
use isolindblad::operators::build_ladder_basis;
use isolindblad::SpringSchedule;

const DIMS: [usize; 3] = [40, 60, 80];
const STEPS: usize = 5000;

fn main() -> isolindblad::Result<()> {
    let schedule = SpringSchedule::exponential(1.0, 0.2)?;
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = DIMS
            .iter()
            .map(|&dim| {
                scope.spawn(move || -> isolindblad::Result<_> {
                    let start = Instant::now();
                    let basis = build_ladder_basis(dim, 1.0, 1.0)?;
                    let rho0 = ground_state(&basis, &schedule, 0.0)?;
                    let traj = evolve(&rho0, 0.0, 5.0, STEPS, &basis, &schedule, 50)?;
                    Ok((dim, traj, start.elapsed()))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    println!("{:>4} {:>12} {:>12} {:>12} {:>8}", "dim", "final drift", "max drift", "tail pop", "secs");
    for r in results {
        let (dim, traj, elapsed) = r?;
        println!(
            "{dim:>4} {:>12.3e} {:>12.3e} {:>12.3e} {:>8.2}",
            traj.final_energy_drift(),
            traj.max_energy_drift(),
            traj.max_tail_pop(),
            elapsed.as_secs_f64()
        );
    }
    Ok(())
}
