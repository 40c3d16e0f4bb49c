//! Integral versus phase-lead tuning of the deception amplitude.
//!
//! cargo run --release --example phase_lead

use dnes::scenario::{bundled, Scenario};
use dnes::sim::{Trajectory, Window};

/// Largest excursion of the averaged profit above the target.
fn overshoot(tr: &Trajectory, target: f64) -> f64 {
    let c = tr.column_index("J2").unwrap();
    (0..tr.len()).filter_map(|k| tr.average(k, Window::Centered)).map(|m| -m[c] - target).fold(0.0, f64::max)
}

/// First time after which the averaged profit stays within 1% of the target.
fn settling_time(tr: &Trajectory, target: f64) -> f64 {
    let c = tr.column_index("J2").unwrap();
    let mut t = 0.0;
    for k in 0..tr.len() {
        if let Some(m) = tr.average(k, Window::Centered) {
            if (-m[c] - target).abs() > 0.01 * target {
                t = tr.t()[k];
            }
        }
    }
    t
}

fn main() -> dnes::error::Result<()> {
    for name in ["duopoly", "duopoly-phase-lead"] {
        let tr = Scenario::parse(bundled(name).expect("bundled"))?.simulation()?.run()?;
        let avg = tr.final_average().expect("one full period");
        println!(
            "{name:20} prices {:.3?}  overshoot {:6.2}  settled after {:5.1} s",
            &avg[..2],
            overshoot(&tr, 1000.0),
            settling_time(&tr, 1000.0)
        );
    }
    Ok(())
}
