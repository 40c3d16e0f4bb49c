//! Closed-form analysis of the price duopoly: company 2 deceives company 1.
//!
//! cargo run --example duopoly_analysis

use dnes::deception::{
    benevolence, build_deceptive_matrices, delta_interval, dne, omega_set, rc_classify, sdso_analyze,
    solve_delta_for_ref, DeceptionStructure, ReactionCurveChange, ScanOptions,
};
use dnes::game::{Game, QuadraticGame};

fn main() -> dnes::error::Result<()> {
    // costs are negative profits
    let game = QuadraticGame::duopoly(100.0, 0.2, [30.0, 30.0])?;
    let ds = DeceptionStructure::single(1, vec![0], 2)?;
    let mats = build_deceptive_matrices(&game, &ds)?;

    let xs = game.nash_equilibrium()?;
    println!("Nash prices      {:.4?}", xs.as_slice());
    println!("Nash profits     {:.2?}", [-game.cost_at(0, xs.as_slice()), -game.cost_at(1, xs.as_slice())]);

    let sdso = sdso_analyze(&game, 1, 0)?;
    // the scan edge lands within its tolerance of the pole of f
    let delta_set = sdso.snap_to_pole(&delta_interval(&game, &mats, 0, &[0.0], ScanOptions::default())?, 1e-4);
    println!("stable amplitudes {delta_set}");

    let eps = 1e-3;
    println!("attainable costs  {}", omega_set(&sdso, eps, &delta_set)?);

    let delta = solve_delta_for_ref(&sdso, -1000.0, eps, &delta_set)?;
    let x = dne(&game, &mats, &[delta])?;
    println!("\nfor a profit of 1000: delta = {delta:.5}");
    println!("  prices  {:.4?}", x.as_slice());
    println!("  profits {:.2?}", [-game.cost_at(0, x.as_slice()), -game.cost_at(1, x.as_slice())]);

    if let ReactionCurveChange::Rotation { center: Some(c) } = rc_classify(&game, 0, 1)? {
        println!("\ncompany 1's reaction curve rotates about {c:.2?}");
    }

    let b = benevolence(&sdso, eps, &[0], &delta_set)?;
    if b.exists {
        println!("both companies gain for costs in {} (amplitudes {})", b.window, b.deltas);
    }
    Ok(())
}
