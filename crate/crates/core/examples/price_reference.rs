//! Company 2 regulates its own price instead of its profit.
//!
//! cargo run --release --example price_reference

use dnes::report::analyze;
use dnes::scenario::{bundled, Scenario};

fn main() -> dnes::error::Result<()> {
    let scn = Scenario::parse(bundled("duopoly-price-ref").expect("bundled"))?;

    let report = analyze(&scn);
    if let Some(lin) = &report.linearization {
        println!("linearization at delta = {:.5}, x = {:.3?}", lin.delta, lin.x);
        println!("  characteristic polynomial {:.5?}", lin.charpoly);
        println!("  a0* = {:.4}, epsilon* = {:.5}, Hurwitz {}", lin.a0_star, lin.epsilon_star, lin.hurwitz);
    }

    let tr = scn.simulation()?.run()?;
    let avg = tr.final_average().expect("one full period");
    println!("after {} s: price of company 2 = {:.3}, amplitude {:.4}", scn.sim.t_final, avg[1], avg[4]);
    Ok(())
}
