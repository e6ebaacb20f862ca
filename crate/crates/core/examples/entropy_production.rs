//! Entropy production along the reference protocol: the recorded rate
//! against a central finite difference of S(t).

use isolindblad::evolution::{evolve, ground_state};
use isolindblad::operators::build_ladder_basis;
use isolindblad::SpringSchedule;

fn main() -> isolindblad::Result<()> {
    let schedule = SpringSchedule::exponential(1.0, 0.2)?;
    let basis = build_ladder_basis(60, 1.0, 1.0)?;
    let rho0 = ground_state(&basis, &schedule, 0.0)?;
    let traj = evolve(&rho0, 0.0, 5.0, 5000, &basis, &schedule, 10)?;
    let r = &traj.records;

    println!("{:>6} {:>14} {:>14} {:>14} {:>10}", "t", "S", "dS/dt", "fd slope", "rel err");
    let mut worst: f64 = 0.0;
    for j in 1..r.len() - 1 {
        let fd = (r[j + 1].entropy - r[j - 1].entropy) / (r[j + 1].t - r[j - 1].t);
        let rel = ((fd - r[j].entropy_rate) / r[j].entropy_rate).abs();
        if j >= 10 {
            worst = worst.max(rel);
        }
        if j % 50 == 0 || j < 10 {
            println!(
                "{:>6.2} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.2e}",
                r[j].t, r[j].entropy, r[j].entropy_rate, fd, rel
            );
        }
    }
    println!("entropy nondecreasing: {}", traj.entropy_monotone);
    println!("worst relative mismatch for t >= 0.1: {worst:.3e}");
    Ok(())
}
