//! Deception in a two-player aggregative game with nonlinear costs.
//!
//! cargo run --example aggregative_game

use dnes::aggregative::{benefit_condition, delta_bounds, delta_for_ref, dne_agg, g_prime, AggDeception};
use dnes::game::Game;
use dnes::scenario::{bundled, Scenario};

fn main() -> dnes::error::Result<()> {
    let scn = Scenario::parse(bundled("agg2").expect("bundled"))?;
    let game = scn.aggregative().expect("aggregative game");
    let d = &scn.deception.deceivers()[0];
    let dec = AggDeception::new(game, d.player, d.targets.clone())?;

    let bounds = delta_bounds(game, &dec)?;
    println!("monotone for amplitudes in {bounds}");

    let benefit = benefit_condition(game, &dec, scn.effective_epsilon(0))?;
    println!("benefit condition {} ({:.3e}), move delta: {:?}", benefit.holds, benefit.value, benefit.direction);

    println!("\n{:>7} {:>9} {:>9} {:>9} {:>9}", "delta", "x1", "x2", "J2", "dx2/dd");
    for k in 0..=8 {
        let delta = -0.22 + 0.09 * k as f64;
        let s = dne_agg(game, &dec, delta, &[0.0, 0.0])?;
        let gp = g_prime(game, &dec, delta, &s.x)?;
        println!("{delta:7.3} {:9.5} {:9.5} {:9.5} {:9.5}", s.x[0], s.x[1], game.cost_at(1, &s.x), gp[1]);
    }

    let target = delta_for_ref(game, &dec, d.jref, &bounds, 1.0, 1e-2)?;
    println!("\nJ2 = {} at delta = {:.5}", d.jref, target.delta);
    Ok(())
}
