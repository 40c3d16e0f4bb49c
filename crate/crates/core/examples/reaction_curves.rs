//! Perceived reaction curves: rotation, translation and immunity.
//!
//! cargo run --example reaction_curves

use dnes::deception::{immunity_check, perceived_reaction_curve, rc_classify};
use dnes::game::QuadraticGame;

fn game(b12: f64) -> dnes::error::Result<QuadraticGame> {
    QuadraticGame::from_rows(
        &[vec![vec![3.0, 1.0], vec![1.0, 1.0 / 3.0]], vec![vec![1.0, 2.0], vec![2.0, 4.0]]],
        &[vec![7.0, b12], vec![3.0, 6.0]],
        &[0.0, 0.0],
    )
}

fn main() -> dnes::error::Result<()> {
    let duopoly = QuadraticGame::duopoly(100.0, 0.2, [30.0, 30.0])?;
    for (name, g) in [("duopoly", duopoly), ("b12 = 4/3", game(4.0 / 3.0)?), ("b12 = 7/3", game(7.0 / 3.0)?)] {
        println!("{name}: {:?}, immune {}", rc_classify(&g, 0, 1)?, immunity_check(&g, 0, &[1])?);
        for delta in [0.0, 0.5, 1.0] {
            let l = perceived_reaction_curve(&g, 0, 1, delta);
            println!("  delta {delta:3.1}: {:8.3} x1 + {:8.3} x2 + {:8.3} = 0", l.normal[0], l.normal[1], l.offset);
        }
    }
    Ok(())
}
