//! Distance between the oscillating closed loop and its averaged system as the
//! probe frequencies grow.
//!
//! cargo run --release --example averaging_gap

use std::sync::Arc;

use dnes::game::QuadraticGame;
use dnes::sim::{averaging_gap, DeltaPolicy, PlayerPolicy, ProbeConfig, Rational, SimConfig, Simulation};

fn main() -> dnes::error::Result<()> {
    let game = Arc::new(QuadraticGame::duopoly(100.0, 0.2, [30.0, 30.0])?);
    let probe = ProbeConfig::new(0.05, 0.03, 100.0, vec![Rational::new(8, 1)?, Rational::new(7, 1)?])?;
    let policies = vec![
        PlayerPolicy::Oblivious,
        PlayerPolicy::Deceptive {
            targets: vec![0],
            policy: DeltaPolicy::Integral { epsilon: 1e-3, gain: 1.0, jref: -1000.0 },
            delta0: 0.0,
        },
    ];
    let sim = Simulation::new(game, probe, policies, SimConfig::new(20.0, vec![130.0 / 3.0, 110.0 / 3.0]))?;
    let multipliers = [1.0, 10.0, 100.0];
    for (m, gap) in multipliers.iter().zip(averaging_gap(&sim, &multipliers)?) {
        println!("omega x {m:>5}: gap {gap:.3e}");
    }
    Ok(())
}
