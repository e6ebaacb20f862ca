//! The `simulate` subcommand: run a config and write the trajectory.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{OutputFormat, RunConfig};
use crate::evolution::{evolve, Trajectory, TrajectoryRecord};

/// Contents of the `*.summary.json` file written next to the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub final_energy_drift: f64,
    pub final_entropy: f64,
    pub max_tail_pop: f64,
    pub steps: usize,
    pub wall_time_s: f64,
}

impl Summary {
    fn new(traj: &Trajectory, wall_time_s: f64) -> Self {
        Summary {
            final_energy_drift: traj.final_energy_drift(),
            final_entropy: traj.records[traj.records.len() - 1].entropy,
            max_tail_pop: traj.max_tail_pop(),
            steps: traj.steps,
            wall_time_s,
        }
    }
}

/// Runs the simulation described by a validated config.
pub fn run_config(config: &RunConfig) -> crate::Result<(Trajectory, Summary)> {
    let start = Instant::now();
    let basis = config.basis()?;
    let schedule = config.schedule();
    let rho0 = config.initial_state(&basis)?;
    let t = &config.time;
    let traj = evolve(&rho0, t.t0, t.t1, t.n_steps, &basis, &schedule, t.record_every)?;
    let summary = Summary::new(&traj, start.elapsed().as_secs_f64());
    Ok((traj, summary))
}

/// Header line plus one row per record, 17 significant digits per value.
pub fn write_csv<W: Write>(records: &[TrajectoryRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", TrajectoryRecord::CSV_HEADER)?;
    for r in records {
        let row: Vec<String> = r.fields().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write>(records: &[TrajectoryRecord], mut w: W) -> io::Result<()> {
    serde_json::to_writer(&mut w, records)?;
    writeln!(w)
}

/// `run.csv` → `run.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

pub fn write_outputs(path: &Path, format: OutputFormat, traj: &Trajectory, summary: &Summary) -> io::Result<PathBuf> {
    let file = io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(&traj.records, file)?,
        OutputFormat::Json => write_json(&traj.records, file)?,
    }
    let spath = summary_path(path);
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    std::fs::write(&spath, s)?;
    Ok(spath)
}

/// The line printed to standard output after a run.
pub fn summary_line(traj: &Trajectory, summary: &Summary) -> String {
    let first = &traj.records[0];
    let last = &traj.records[traj.records.len() - 1];
    format!(
        "steps={} final_energy_drift={:.3e} final_entropy={:.6e} entropy_drift={:.3e} max_tail_pop={:.3e} wall_time_s={:.2}",
        summary.steps,
        summary.final_energy_drift,
        summary.final_entropy,
        last.entropy - first.entropy,
        summary.max_tail_pop,
        summary.wall_time_s
    )
}
