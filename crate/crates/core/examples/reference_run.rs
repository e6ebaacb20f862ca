//! The reference protocol `k(t) = e^{−0.2t}` on `[0, 5]` from the ground
//! state, written as CSV to standard output.

use isolindblad::cli::config::RunConfig;
use isolindblad::cli::simulate::{run_config, summary_line, write_csv};

fn main() -> isolindblad::Result<()> {
    let config = RunConfig::reference();
    let (traj, summary) = run_config(&config)?;
    write_csv(&traj.records, std::io::stdout().lock()).expect("stdout");
    eprintln!("{}", summary_line(&traj, &summary));
    Ok(())
}
