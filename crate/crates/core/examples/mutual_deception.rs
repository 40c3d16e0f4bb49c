//! Both companies deceive each other, each aiming at its own profit.
//!
//! cargo run --release --example mutual_deception

use dnes::deception::mutual_attainability;
use dnes::scenario::{bundled, Scenario};

fn main() -> dnes::error::Result<()> {
    let scn = Scenario::parse(bundled("duopoly-mutual").expect("bundled"))?;
    let game = scn.quadratic().expect("quadratic game");

    let r = mutual_attainability(game, &scn.deception, &[0.459, 0.848])?;
    println!("candidate {:?} gives profits {:.1?}", r.candidate, r.costs_at_candidate.iter().map(|c| -c).collect::<Vec<_>>());
    println!("refined   {:.5?}", r.delta);
    println!("xi jacobian {:.1?}", r.xi_jacobian);
    println!("stable flow {}, references met {}, xi Hurwitz {}", r.stable_flow, r.references_met, r.xi_hurwitz);

    println!("\nsimulating {} s ...", scn.sim.t_final);
    let tr = scn.simulation()?.run()?;
    let avg = tr.final_average().expect("one full period");
    let n = tr.players();
    println!("averaged amplitudes {:.4?}", &avg[2 * n..2 * n + 2]);
    println!("averaged profits    {:.1?}", avg[2 * n + 2..].iter().map(|c| -c).collect::<Vec<_>>());
    Ok(())
}
