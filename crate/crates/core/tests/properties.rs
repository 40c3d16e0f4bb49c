mod common;

use common::*;
use dnes::aggregative::{delta_bounds, dne_agg, g_prime, AggDeception};
use dnes::deception::{
    build_deceptive_matrices, delta_interval, dne, immunity_check, mutual_attainability, q_delta, sdso_analyze, Deceiver,
    DeceptionStructure, ScanOptions,
};
use dnes::game::{cost, pseudogradient, ActionVector, Game, QuadraticGame};
use dnes::linalg;
use dnes::sim::{DeltaPolicy, Window};
use dnes::stability::{build_jacobian, equal_marginal_matrix, routh_hurwitz_3, Regulated};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn quadratic_games() -> Vec<QuadraticGame> {
    vec![duopoly(), example3(), example4(), example5(), example7()]
}

/// Random symmetric `Q_i` with a dominant positive diagonal, so the game has a unique NE.
fn random_game(n: usize) -> impl Strategy<Value = QuadraticGame> {
    (prop::collection::vec(-1.0..1.0f64, n * n * n), prop::collection::vec(-5.0..5.0f64, n * n)).prop_map(
        move |(qs, bs)| {
            let q: Vec<Vec<Vec<f64>>> = (0..n)
                .map(|i| {
                    let m = DMatrix::from_fn(n, n, |r, c| qs[i * n * n + r * n + c]);
                    let mut s = (&m + m.transpose()) * 0.5;
                    s[(i, i)] = 2.0 * n as f64 + s[(i, i)].abs();
                    (0..n).map(|r| s.row(r).iter().copied().collect()).collect()
                })
                .collect();
            let b: Vec<Vec<f64>> = (0..n).map(|i| bs[i * n..(i + 1) * n].to_vec()).collect();
            QuadraticGame::from_rows(&q, &b, &vec![0.0; n]).unwrap()
        },
    )
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn quadratic_pseudogradient_is_affine(g in random_game(3), x in point(3), y in point(3)) {
        let pg = g.pseudogradient_matrices();
        let lhs = pseudogradient(&g, &ActionVector::new(x.clone())).unwrap()
            - pseudogradient(&g, &ActionVector::new(y.clone())).unwrap();
        let rhs = &pg.qcal * (DVector::from_vec(x) - DVector::from_vec(y));
        prop_assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn nash_equilibrium_zeroes_the_pseudogradient(g in random_game(3)) {
        let x = g.nash_equilibrium().unwrap();
        let scale = 1.0 + x.amax();
        prop_assert!(pseudogradient(&g, &x).unwrap().amax() <= 1e-10 * scale);
    }

    #[test]
    fn own_partials_match_central_differences(g in random_game(3), x in point(3), i in 0usize..3) {
        check_partial(&g, &x, i)?;
        check_partial(&aggregative(), &x[..2], i % 2)?;
    }

    #[test]
    fn aggregative_game_is_strongly_monotone(x in point(2), y in point(2)) {
        let g = aggregative();
        let kmin = g.monotonicity_margins().min();
        let gx = pseudogradient(&g, &ActionVector::new(x.clone())).unwrap();
        let gy = pseudogradient(&g, &ActionVector::new(y.clone())).unwrap();
        let d = DVector::from_vec(x) - DVector::from_vec(y);
        prop_assert!((gx - gy).dot(&d) >= (kmin - 1e-9) * d.norm_squared());
    }

    #[test]
    fn deceptive_game_stays_monotone_inside_bounds(x in point(2), y in point(2), s in 0.0..1.0f64) {
        let g = aggregative();
        let dec = AggDeception::new(&g, 1, vec![0]).unwrap();
        let lo = delta_bounds(&g, &dec).unwrap().intervals()[0].0;
        let delta = lo + 1e-6 + s * (0.5 - lo);
        let d = DVector::from_vec(x.clone()) - DVector::from_vec(y.clone());
        let v = (dec.gamma(&g, &x, delta) - dec.gamma(&g, &y, delta)).dot(&d);
        prop_assert!(d.norm() < 1e-12 || v > 0.0);
    }

    #[test]
    fn routh_hurwitz_agrees_with_eigenvalues(c2 in -10.0..10.0f64, c1 in -10.0..10.0f64, c0 in -10.0..10.0f64) {
        let companion = DMatrix::from_row_slice(3, 3, &[-c2, -c1, -c0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let margin = linalg::max_real_eigenvalue(&companion).unwrap();
        prop_assume!(margin.abs() > 1e-6);
        prop_assert_eq!(routh_hurwitz_3(c2, c1, c0), margin < 0.0);
    }

    #[test]
    fn greedy_deceiver_keeps_equal_marginal_duopoly_stable(
        le in -4.0..0.0f64, lp in (0.05f64).log10()..(5.0f64).log10(), lj in 1.0..5.0f64, s in 10.0..500.0f64,
    ) {
        let (eps, p, jref) = (10f64.powf(le), 10f64.powf(lp), 10f64.powf(lj));
        let (a, poly) = equal_marginal_matrix(s, p, jref, eps).unwrap();
        prop_assert!(linalg::is_hurwitz(&a, 0.0).unwrap());
        prop_assert!(routh_hurwitz_3(poly[1], poly[2], poly[3]));
    }
}

fn check_partial(g: &dyn Game, x: &[f64], i: usize) -> Result<(), TestCaseError> {
    let h = 1e-5;
    let mut up = x.to_vec();
    let mut dn = x.to_vec();
    up[i] += h;
    dn[i] -= h;
    let fd = (g.cost_at(i, &up) - g.cost_at(i, &dn)) / (2.0 * h);
    let pg = pseudogradient(g, &ActionVector::new(x.to_vec())).unwrap()[i];
    let scale = pg.abs().max(1.0);
    prop_assert!((fd - pg).abs() / scale < 1e-5, "fd {} vs {}", fd, pg);
    Ok(())
}

/// δ samples strictly inside each component of Δ.
fn delta_grid(g: &QuadraticGame, ds: &DeceptionStructure, count: usize) -> Vec<f64> {
    let mats = build_deceptive_matrices(g, ds).unwrap();
    let set = delta_interval(g, &mats, 0, &[0.0], ScanOptions { lo: -20.0, hi: 20.0, ..ScanOptions::default() }).unwrap();
    let (lo, hi) = set.component_of(0.0).unwrap();
    let (lo, hi) = (lo.max(-20.0) + 1e-3, hi.min(20.0) - 1e-3);
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

#[test]
fn zero_deception_recovers_the_nash_equilibrium() {
    for g in quadratic_games() {
        let n = g.n();
        for d in 0..n {
            let ds = DeceptionStructure::single(d, vec![(d + 1) % n], n).unwrap();
            let mats = build_deceptive_matrices(&g, &ds).unwrap();
            let x = dne(&g, &mats, &[0.0]).unwrap();
            assert!((&*x - &*g.nash_equilibrium().unwrap()).amax() < 1e-10);
        }
    }
}

#[test]
fn dne_solves_the_deceptive_pseudogradient_inside_delta() {
    for g in [duopoly(), example5(), example7()] {
        let ds = DeceptionStructure::single(if g.n() == 3 { 0 } else { 1 }, vec![if g.n() == 3 { 2 } else { 0 }], g.n())
            .unwrap();
        let mats = build_deceptive_matrices(&g, &ds).unwrap();
        for d in delta_grid(&g, &ds, 60) {
            let (q, b) = q_delta(&g, &mats, &[d]).unwrap();
            let x = dne(&g, &mats, &[d]).unwrap();
            let res = (&q * &*x + &b).amax();
            assert!(res < 1e-10 * (1.0 + x.amax()) * q.amax(), "delta {d}: residual {res}");
            assert!(linalg::max_real_eigenvalue(&(-q)).unwrap() < 0.0);
        }
    }
}

#[test]
fn single_deceiver_displacement_follows_phi() {
    for (g, dec, tgt) in [(duopoly(), 1, 0), (example5(), 1, 0), (example7(), 0, 2)] {
        let ds = DeceptionStructure::single(dec, vec![tgt], g.n()).unwrap();
        let mats = build_deceptive_matrices(&g, &ds).unwrap();
        let s = sdso_analyze(&g, dec, tgt).unwrap();
        for d in delta_grid(&g, &ds, 50) {
            let x = dne(&g, &mats, &[d]).unwrap();
            let f = s.f(d);
            for i in 0..g.n() {
                let want = s.xstar[i] + f * s.phi[i];
                assert!((x[i] - want).abs() < 1e-9 * (1.0 + x[i].abs()), "delta {d} coordinate {i}");
                let j = cost(&g, i, &x).unwrap();
                assert!((s.payoff(i, f) - j).abs() < 1e-9 * (1.0 + j.abs()), "delta {d} player {i}");
            }
        }
    }
}

#[test]
fn integral_deception_is_locally_stable_on_the_stable_half_line() {
    for (g, dec, tgt, eps) in [(duopoly(), 1, 0, 1.0), (example5(), 1, 0, 1.0), (example7(), 0, 2, 1.0)] {
        let ds = DeceptionStructure::single(dec, vec![tgt], g.n()).unwrap();
        let s = sdso_analyze(&g, dec, tgt).unwrap();
        let half = s.stable_half_line(eps).unwrap();
        let h = 1e-6;
        let mut checked = 0;
        for d in delta_grid(&g, &ds, 100) {
            if !half.contains(s.f(d)) {
                continue;
            }
            let slope = eps * (s.payoff(dec, s.f(d + h)) - s.payoff(dec, s.f(d - h))) / (2.0 * h);
            assert!(slope < 0.0, "delta {d}: slope {slope}");
            checked += 1;
        }
        assert!(checked > 10);
    }
}

#[test]
fn immune_player_keeps_its_reaction_curve() {
    let g = example4();
    assert!(immunity_check(&g, 0, &[1]).unwrap());
    let ds = player2_deceives_1();
    let mats = build_deceptive_matrices(&g, &ds).unwrap();
    for d in delta_grid(&g, &ds, 50) {
        let x = dne(&g, &mats, &[d]).unwrap();
        let r = g.partial_at(0, 0, x.as_slice());
        assert!(r.abs() < 1e-9, "delta {d}: residual {r}");
    }
}

#[test]
fn mutual_sensitivity_matches_finite_differences() {
    let ds = DeceptionStructure::new(
        vec![
            Deceiver { player: 0, targets: vec![1], gain: 1.0, jref: -1200.0 },
            Deceiver { player: 1, targets: vec![0], gain: 0.5, jref: -1800.0 },
        ],
        2,
    )
    .unwrap();
    let r = mutual_attainability(&duopoly(), &ds, &[0.459, 0.848]).unwrap();
    for (row, fd) in r.xi_jacobian.iter().zip(&r.xi_jacobian_fd) {
        for (a, b) in row.iter().zip(fd) {
            assert!(rel(*b, *a) < 1e-4, "{a} vs {b}");
        }
    }
}

fn agg_samples(count: usize) -> Vec<f64> {
    let (lo, hi) = (-0.225, 0.5);
    (1..=count).map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64).collect()
}

#[test]
fn aggregative_equilibrium_moves_continuously() {
    let g = aggregative();
    let dec = AggDeception::new(&g, 1, vec![0]).unwrap();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for d in agg_samples(100) {
        let a = dne_agg(&g, &dec, d, &[0.0, 0.0]).unwrap();
        let b = dne_agg(&g, &dec, d + h, &a.x).unwrap();
        worst = worst.max(dist(&a.x, &b.x) / h);
    }
    assert!(worst < 10.0, "Lipschitz estimate {worst}");
}

#[test]
fn g_prime_matches_finite_differences() {
    let g = aggregative();
    let dec = AggDeception::new(&g, 1, vec![0]).unwrap();
    let h = 1e-6;
    for d in agg_samples(40) {
        let x = dne_agg(&g, &dec, d, &[0.0, 0.0]).unwrap().x;
        let gp = g_prime(&g, &dec, d, &x).unwrap();
        let up = dne_agg(&g, &dec, d + h, &x).unwrap().x;
        let dn = dne_agg(&g, &dec, d - h, &x).unwrap().x;
        for i in 0..2 {
            let fd = (up[i] - dn[i]) / (2.0 * h);
            assert!(rel(fd, gp[i]) < 1e-5, "delta {d}, i {i}: {fd} vs {}", gp[i]);
        }
    }
}

#[test]
fn deceiver_action_is_injective_in_delta() {
    let g = aggregative();
    let dec = AggDeception::new(&g, 1, vec![0]).unwrap();
    let xs: Vec<f64> = agg_samples(100).iter().map(|&d| dne_agg(&g, &dec, d, &[0.0, 0.0]).unwrap().x[1]).collect();
    let up = xs.windows(2).all(|w| w[1] > w[0]);
    let down = xs.windows(2).all(|w| w[1] < w[0]);
    assert!(up || down);
}

#[test]
fn deceiver_reaction_cost_peaks_at_zero() {
    // c(x) − c'(x)x has slope −c''(x)x
    let g = aggregative();
    let c = g.own_cost(1);
    let jt = |x: f64| c.value(x) - c.first(x) * x;
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.025).collect();
    for w in grid.windows(2) {
        assert!(jt(w[1]) <= jt(w[0]) + 1e-12);
        assert!(jt(-w[1]) <= jt(-w[0]) + 1e-12);
    }
}

#[test]
fn charpoly_splits_into_flow_and_integrator_parts() {
    let g = duopoly();
    let ds = player2_deceives_1();
    let delta = (3.0 - 2f64.sqrt()) / 2.0;
    let x = duopoly_dne(delta);
    for eps in [1e-4, 1e-3, 0.05] {
        let jac = build_jacobian(&g, &ds, delta, &x, eps, Regulated::Payoff).unwrap();
        let p = jac.parts;
        let expect = [1.0, p.a1, p.a0 + eps * p.a1_star, eps * p.a0_star];
        for (c, e) in jac.charpoly.iter().zip(expect) {
            assert!((c - e).abs() <= 1e-10 * (1.0 + e.abs()), "{c} vs {e}");
        }
        assert!((jac.p_direct[0] - p.a1_star).abs() < 1e-10 * (1.0 + p.a1_star.abs()));
        assert!((jac.p_direct[1] - p.a0_star).abs() < 1e-10 * (1.0 + p.a0_star.abs()));
    }
}

#[test]
fn probes_are_orthogonal_over_the_common_period() {
    let probe = duopoly_probe();
    let t = probe.common_period();
    let n = 400_000;
    let h = t / n as f64;
    for i in 0..2 {
        for j in 0..2 {
            let (wi, wj) = (probe.frequency(i), probe.frequency(j));
            let f = |s: f64| (wi * s).sin() * (wj * s).sin();
            // composite Simpson
            let mut acc = f(0.0) + f(t);
            for k in 1..n {
                acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let mean = acc * h / 3.0 / t;
            let want = if i == j { 0.5 } else { 0.0 };
            assert!((mean - want).abs() < 1e-10, "({i},{j}): {mean}");
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let s = duopoly_sim(DeltaPolicy::Integral { epsilon: 1e-3, gain: 1.0, jref: -1000.0 }, 3.0);
    assert_eq!(s.run().unwrap(), s.run().unwrap());
}

#[test]
fn equal_lead_gains_reduce_to_integral_action() {
    let integral = duopoly_sim(DeltaPolicy::Integral { epsilon: 1e-3, gain: 1.0, jref: -1000.0 }, 5.0).run().unwrap();
    let lead = duopoly_sim(DeltaPolicy::PhaseLead { epsilon: 1e-3, gain: 1.0, jref: -1000.0, g1: 0.7, g2: 0.7 }, 5.0)
        .run()
        .unwrap();
    assert_eq!(integral.len(), lead.len());
    for k in 0..integral.len() {
        for (a, b) in integral.row(k).iter().zip(lead.row(k)) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "sample {k}: {a} vs {b}");
        }
    }
}

#[test]
fn fixed_deception_converges_inside_delta_and_not_outside() {
    let run = |delta: f64| {
        let mut s = duopoly_sim(DeltaPolicy::Fixed { delta }, 500.0);
        s.config.blowup = 1e4;
        (s.run_averaged().unwrap(), s)
    };
    let (inside, _) = run(1.0);
    let avg = inside.row(inside.len() - 1);
    assert!(dist(&avg[2..4], &duopoly_dne(1.0)) < 1e-6, "{avg:?} {:?}", duopoly_dne(1.0));
    let (outside, s) = run(1.6);
    assert!(outside.is_unstable());
    let mut s = s;
    s.config.t_final = 60.0;
    let full = s.run().unwrap();
    let k = full.len() - 1;
    let far = full.average(k, Window::Trailing).map_or(f64::INFINITY, |m| dist(&m[2..4], &duopoly_dne(1.6)));
    assert!(full.is_unstable() || far > 1.0);
}
