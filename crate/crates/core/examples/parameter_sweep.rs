//! Sweeps the deception amplitude of the bundled two-player quadratic game and
//! compares each run with the predicted equilibrium cost. Set DNES_THREADS to
//! limit parallelism.
//!
//! cargo run --release --example parameter_sweep

use dnes::cli::run_sweep;
use dnes::deception::sdso_analyze;
use dnes::scenario::{bundled, Scenario};

fn main() -> dnes::error::Result<()> {
    let scn = Scenario::parse(bundled("quad2").expect("bundled"))?.with_override("sweep.step=0.45")?;
    let sdso = sdso_analyze(scn.quadratic().expect("quadratic game"), 1, 0)?;
    let runs = run_sweep(&scn, None)?;
    println!("{:>7} {:>10} {:>10}", "delta", "J2 (run)", "J2 (pred)");
    for (delta, summary) in runs.iter() {
        let predicted = sdso.payoff(1, sdso.f(*delta));
        match summary.cost_mean.get(1) {
            Some(j) => println!("{delta:7.3} {j:10.4} {predicted:10.4}"),
            None => println!("{delta:7.3} {:>10} {predicted:10.4}", summary.status),
        }
    }
    println!("{} runs", runs.len());
    Ok(())
}
