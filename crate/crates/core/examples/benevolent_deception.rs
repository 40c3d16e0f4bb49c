//! A three-player game where deception by player 1 lowers every player's cost.
//!
//! cargo run --example benevolent_deception

use dnes::deception::{benevolence, build_deceptive_matrices, delta_interval, dne, sdso_analyze, solve_delta_for_ref};
use dnes::game::Game;
use dnes::scenario::{bundled, Scenario};

fn main() -> dnes::error::Result<()> {
    let scn = Scenario::parse(bundled("quad3").expect("bundled"))?;
    let game = scn.quadratic().expect("quadratic game");
    let d = &scn.deception.deceivers()[0];
    let eps = scn.effective_epsilon(0);

    let mats = build_deceptive_matrices(game, &scn.deception)?;
    let sdso = sdso_analyze(game, d.player, d.targets[0])?;
    let delta_set = sdso.snap_to_pole(&delta_interval(game, &mats, 0, &[0.0], scn.scan_options())?, 1e-4);
    println!("Phi = {:.3?}", sdso.phi);
    println!("r1  = {:.2?}", sdso.r1);
    println!("stable amplitudes {delta_set}");

    let b = benevolence(&sdso, eps, scn.benevolence_members.as_deref().unwrap_or(&[]), &delta_set)?;
    println!("everyone gains for references in {}", b.window);

    let delta = solve_delta_for_ref(&sdso, d.jref, eps, &delta_set)?;
    let x = dne(game, &mats, &[delta])?;
    println!("\njref = {} reached at delta = {delta:.4}", d.jref);
    for i in 0..game.n() {
        println!("  player {}: cost {:8.3} (Nash {:8.3})", i + 1, game.cost_at(i, x.as_slice()), sdso.jstar[i]);
    }
    Ok(())
}
