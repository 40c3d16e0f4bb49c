#![allow(dead_code)]

use std::sync::Arc;

use dnes::deception::DeceptionStructure;
use dnes::game::{AggregativeGame, QuadraticGame, SmoothCost};
use dnes::sim::{DeltaPolicy, PlayerPolicy, ProbeConfig, Rational, SimConfig, Simulation};
use nalgebra::DMatrix;

pub const DEMAND: f64 = 100.0;
pub const PREF: f64 = 0.2;
pub const MC: f64 = 30.0;

pub fn duopoly() -> QuadraticGame {
    QuadraticGame::duopoly(DEMAND, PREF, [MC, MC]).unwrap()
}

/// Closed-form deceptive equilibrium of the duopoly with company 2 deceiving.
pub fn duopoly_dne(delta: f64) -> [f64; 2] {
    let (m1, m2, s, p) = (MC, MC, DEMAND, PREF);
    let d = 3.0 - 2.0 * delta;
    [((2.0 - 2.0 * delta) * m1 + m2 + 2.0 * s * p) / d, ((1.0 - delta) * m1 + (2.0 - delta) * m2 + s * p) / d]
}

/// Profits written out from sales times margin, independent of the matrix form.
pub fn duopoly_profit(x: &[f64]) -> [f64; 2] {
    let s2 = (x[0] - x[1]) / PREF;
    let s1 = DEMAND - s2;
    [s1 * (x[0] - MC), s2 * (x[1] - MC)]
}

pub fn example3() -> QuadraticGame {
    QuadraticGame::from_rows(
        &[vec![vec![3.0, 1.0], vec![1.0, 1.0 / 3.0]], vec![vec![1.0, 2.0], vec![2.0, 4.0]]],
        &[vec![7.0, 4.0 / 3.0], vec![3.0, 6.0]],
        &[0.0, 0.0],
    )
    .unwrap()
}

pub fn example4() -> QuadraticGame {
    QuadraticGame::from_rows(
        &[vec![vec![3.0, 1.0], vec![1.0, 1.0 / 3.0]], vec![vec![1.0, 2.0], vec![2.0, 4.0]]],
        &[vec![7.0, 7.0 / 3.0], vec![3.0, 6.0]],
        &[0.0, 0.0],
    )
    .unwrap()
}

pub fn example5() -> QuadraticGame {
    QuadraticGame::from_rows(
        &[vec![vec![3.0, 1.0], vec![1.0, 5.0]], vec![vec![7.0, 2.0], vec![2.0, 4.0]]],
        &[vec![4.0, 2.0], vec![1.0, 6.0]],
        &[0.0, 0.0],
    )
    .unwrap()
}

pub fn example7() -> QuadraticGame {
    QuadraticGame::from_rows(
        &[
            vec![vec![0.7, 0.25, -0.1], vec![0.25, 0.6, 0.05], vec![-0.1, 0.05, 0.9]],
            vec![vec![0.7, -0.15, 0.05], vec![-0.15, 0.8, -0.1], vec![0.05, -0.1, 0.2]],
            vec![vec![-0.15, 0.0, 0.125], vec![0.0, 0.1, 0.05], vec![0.125, 0.05, 0.35]],
        ],
        &[vec![2.0, 2.0, -3.0], vec![-1.0, -3.0, 3.0], vec![2.0, 7.0, -3.0]],
        &[0.0, 0.0, 0.0],
    )
    .unwrap()
}

/// `c1 = x² + x⁴`, `c2 = x² + eˣ`, `α12 = 2`, `α21 = 1.1`.
pub fn aggregative() -> AggregativeGame {
    let c1 = SmoothCost::polynomial(vec![0.0, 0.0, 1.0, 0.0, 1.0]);
    let c2 = SmoothCost::polynomial(vec![0.0, 0.0, 1.0]).with_exp(1.0, 1.0);
    let alpha = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.1, 0.0]);
    AggregativeGame::new(vec![Arc::new(c1), Arc::new(c2)], vec![2.0, 2.0], alpha).unwrap()
}

pub fn player2_deceives_1() -> DeceptionStructure {
    DeceptionStructure::single(1, vec![0], 2).unwrap()
}

pub fn rational(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Probe amplitudes and frequencies used for the duopoly figures.
pub fn duopoly_probe() -> ProbeConfig {
    ProbeConfig::new(0.05, 0.03, 1.0, vec![rational("31511/4"), rational("14873/2")]).unwrap()
}

pub fn duopoly_sim(policy: DeltaPolicy, t_final: f64) -> Simulation {
    let g = Arc::new(duopoly());
    let u0 = vec![130.0 / 3.0, 110.0 / 3.0];
    Simulation::new(
        g,
        duopoly_probe(),
        vec![PlayerPolicy::Oblivious, PlayerPolicy::Deceptive { targets: vec![0], policy, delta0: 0.0 }],
        SimConfig::new(t_final, u0),
    )
    .unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Relative error, guarded near zero.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
