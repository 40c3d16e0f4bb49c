//! Runs model-free equilibrium seeking on the bundled duopoly scenario and
//! writes the trajectory CSV.
//!
//! cargo run --release --example simulate_duopoly [out.csv]

use std::path::PathBuf;

use dnes::scenario::{bundled, Scenario};
use dnes::sim::Window;

fn main() -> dnes::error::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("duopoly.csv"));
    let scn = Scenario::parse(bundled("duopoly").expect("bundled"))?;
    let sim = scn.simulation()?;
    println!("common probe period {:.4} s", sim.probe.common_period());

    let tr = sim.run()?;
    let j2 = tr.column_index("J2").expect("column");
    println!("{:>7} {:>9} {:>9} {:>7} {:>9}", "t", "x1", "x2", "delta", "profit2");
    let step = tr.len() / 10;
    for k in (step..tr.len()).step_by(step) {
        if let Some(m) = tr.average(k, Window::Trailing) {
            println!("{:7.1} {:9.3} {:9.3} {:7.4} {:9.2}", tr.t()[k], m[0], m[1], m[4], -m[j2]);
        }
    }
    tr.save_csv(&out)?;
    println!("wrote {} samples to {}", tr.len(), out.display());
    Ok(())
}
