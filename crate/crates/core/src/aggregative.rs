//! Deception in strongly monotone aggregative games.
//!
//! A single deceiver `d` perturbs its targets' gradient estimates, so the
//! averaged flow follows `γ(x, δ) = 𝒢(x) + δ Λ x` with `Λ` diagonal and
//! `Λ_tt = α_{t,d}` for every target `t`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_dim, check_player, AggregativeGame, Game};
use crate::interval::IntervalSet;
use crate::linalg;

/// Residual tolerance for the equilibrium solver.
pub const NEWTON_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 100;
const HOMOTOPY_STEPS: usize = 20;

/// A single deceiver and the diagonal coupling matrix its deception induces.
#[derive(Debug, Clone, PartialEq)]
pub struct AggDeception {
    pub deceiver: usize,
    pub targets: Vec<usize>,
    pub lambda: DMatrix<f64>,
}

impl AggDeception {
    pub fn new(game: &AggregativeGame, deceiver: usize, targets: Vec<usize>) -> Result<Self> {
        let n = game.n();
        check_player(deceiver, n)?;
        if targets.is_empty() {
            return Err(Error::InvalidDeception("empty target list".into()));
        }
        let mut lambda = DMatrix::zeros(n, n);
        for &t in &targets {
            check_player(t, n)?;
            if t == deceiver {
                return Err(Error::InvalidDeception(format!("player {} cannot deceive itself", t + 1)));
            }
            lambda[(t, t)] = game.alpha()[(t, deceiver)];
        }
        Ok(AggDeception { deceiver, targets, lambda })
    }

    /// `γ(x, δ)`.
    pub fn gamma(&self, game: &AggregativeGame, x: &[f64], delta: f64) -> DVector<f64> {
        let mut out = vec![0.0; x.len()];
        game.pseudogradient_into(x, &mut out);
        let mut g = DVector::from_vec(out);
        for &t in &self.targets {
            g[t] += delta * self.lambda[(t, t)] * x[t];
        }
        g
    }

    /// `D_x γ = Ξ(x) + δ Λ`.
    pub fn jacobian(&self, game: &AggregativeGame, x: &[f64], delta: f64) -> DMatrix<f64> {
        game.pseudogradient_jacobian(x) + &self.lambda * delta
    }
}

/// Inner estimate of `Δ` that keeps the deceptive game strongly monotone.
pub fn delta_bounds(game: &AggregativeGame, dec: &AggDeception) -> Result<IntervalSet> {
    let k = game.monotonicity_margins();
    if k.iter().any(|&kj| kj <= 0.0) {
        return Err(Error::NotStronglyMonotone { margins: k.iter().copied().collect() });
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for &t in &dec.targets {
        let a = dec.lambda[(t, t)];
        if a > 0.0 {
            lo = lo.max(-k[t] / a);
        } else if a < 0.0 {
            hi = hi.min(-k[t] / a);
        }
    }
    Ok(IntervalSet::single(lo, hi))
}

/// A deceptive Nash equilibrium of an aggregative game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggDne {
    pub x: Vec<f64>,
    pub delta: f64,
    /// Whether `δ` lies inside the monotonicity-preserving interval.
    pub certified: bool,
    pub residual: f64,
}

fn newton(game: &AggregativeGame, dec: &AggDeception, delta: f64, x0: &DVector<f64>) -> Option<DVector<f64>> {
    let mut x = x0.clone();
    let mut r = dec.gamma(game, x.as_slice(), delta);
    for _ in 0..MAX_NEWTON {
        let rn = r.norm();
        if !rn.is_finite() {
            return None;
        }
        if rn <= NEWTON_TOL {
            return Some(x);
        }
        let jac = dec.jacobian(game, x.as_slice(), delta);
        let step = jac.lu().solve(&r)?;
        let mut t = 1.0;
        loop {
            let trial = &x - &step * t;
            let rt = dec.gamma(game, trial.as_slice(), delta);
            if rt.norm() < rn || t < 1e-10 {
                x = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
    }
    (r.norm() <= NEWTON_TOL).then_some(x)
}

/// Solves `γ(x, δ) = 0` by damped Newton from `x0`, falling back to
/// continuation in `δ` from zero.
pub fn dne_agg(game: &AggregativeGame, dec: &AggDeception, delta: f64, x0: &[f64]) -> Result<AggDne> {
    check_dim(game.n(), x0.len())?;
    if !delta.is_finite() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial guess or delta".into()));
    }
    let start = DVector::from_column_slice(x0);
    let x = match newton(game, dec, delta, &start) {
        Some(x) => x,
        None => {
            let mut x = newton(game, dec, 0.0, &start)
                .ok_or_else(|| Error::NewtonFailed(format!("no equilibrium found at delta = 0")))?;
            for s in 1..=HOMOTOPY_STEPS {
                let d = delta * s as f64 / HOMOTOPY_STEPS as f64;
                x = newton(game, dec, d, &x).ok_or_else(|| {
                    Error::NewtonFailed(format!("continuation lost the branch at delta = {d}"))
                })?;
            }
            x
        }
    };
    let jac = dec.jacobian(game, x.as_slice(), delta);
    if linalg::max_real_eigenvalue(&(-jac))? >= 0.0 {
        return Err(Error::UnstableEquilibrium(format!(
            "D_x gamma has an eigenvalue outside the right half-plane at delta = {delta}"
        )));
    }
    let certified = delta_bounds(game, dec).map(|s| s.contains(delta)).unwrap_or(false);
    let residual = dec.gamma(game, x.as_slice(), delta).norm();
    Ok(AggDne { x: x.iter().copied().collect(), delta, certified, residual })
}

/// `g'(δ) = −(D_x γ)⁻¹ Λ g(δ)`.
pub fn g_prime(game: &AggregativeGame, dec: &AggDeception, delta: f64, x_delta: &[f64]) -> Result<DVector<f64>> {
    check_dim(game.n(), x_delta.len())?;
    let jac = dec.jacobian(game, x_delta, delta);
    let rhs = -(&dec.lambda * DVector::from_column_slice(x_delta));
    linalg::solve(&jac, &rhs, "D_x gamma")
}

/// Direction in which the deceiver should move `δ` away from zero to lower its cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
    None,
}

/// Outcome of [`benefit_condition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitReport {
    pub holds: bool,
    /// `ε_d g_d'(0) x_d*`; positive means a stable, cost-lowering window exists.
    pub value: f64,
    pub g_prime: Vec<f64>,
    pub xstar: Vec<f64>,
    pub direction: Direction,
    pub note: Option<String>,
}

/// Tests whether the deceiver can lower its own cost by stable integral deception.
///
/// Along its reaction curve the deceiver's cost is `c_d(x_d) − c_d'(x_d) x_d`,
/// whose slope is `−c_d''(x_d) x_d`. Moving `δ` lowers the cost in the
/// direction of `sgn(g_d'(0) x_d*)`, and the integrator is stable there when
/// `ε_d g_d'(0) x_d* > 0`.
pub fn benefit_condition(game: &AggregativeGame, dec: &AggDeception, epsilon_d: f64) -> Result<BenefitReport> {
    let ne = dne_agg(game, dec, 0.0, &vec![0.0; game.n()])?;
    let gp = g_prime(game, dec, 0.0, &ne.x)?;
    let d = dec.deceiver;
    let xd = ne.x[d];
    let value = epsilon_d * gp[d] * xd;
    let slope = gp[d] * xd;
    let direction = if slope > 0.0 {
        Direction::Increase
    } else if slope < 0.0 {
        Direction::Decrease
    } else {
        Direction::None
    };
    let note = if xd == 0.0 {
        Some("deceiver action at the Nash equilibrium is zero: its cost is already maximal there".into())
    } else if dec.lambda.amax() == 0.0 {
        Some("deception has no effect (Lambda = 0)".into())
    } else {
        None
    };
    Ok(BenefitReport {
        holds: value > 0.0,
        value,
        g_prime: gp.iter().copied().collect(),
        xstar: ne.x,
        direction,
        note,
    })
}

/// For two-player games: the direction in which the deceiver's cost strictly
/// decreases near `δ = 0`, found by solving for `g(±h)`.
pub fn monotone_tuning_hint(game: &AggregativeGame, dec: &AggDeception) -> Result<Direction> {
    if game.n() != 2 {
        return Err(Error::Precondition("tuning hint needs a two-player game".into()));
    }
    let d = dec.deceiver;
    let t = 1 - d;
    let ne = dne_agg(game, dec, 0.0, &[0.0, 0.0])?;
    if ne.x[t] == 0.0 {
        return Ok(Direction::None);
    }
    let h = 1e-3;
    let j = |delta: f64| -> Result<f64> {
        let s = dne_agg(game, dec, delta, &ne.x)?;
        Ok(game.cost_at(d, &s.x))
    };
    let (jm, j0, jp) = (j(-h)?, game.cost_at(d, &ne.x), j(h)?);
    Ok(if jp < j0 && jp <= jm {
        Direction::Increase
    } else if jm < j0 {
        Direction::Decrease
    } else {
        Direction::None
    })
}

/// Amplitude nearest zero, inside `bounds` and `|δ| <= reach`, at which the
/// deceiver's equilibrium cost equals `jref`. Found by continuation on a grid
/// of spacing `step` followed by bisection.
pub fn delta_for_ref(
    game: &AggregativeGame,
    dec: &AggDeception,
    jref: f64,
    bounds: &IntervalSet,
    reach: f64,
    step: f64,
) -> Result<AggDne> {
    if !bounds.contains(0.0) {
        return Err(Error::Precondition("zero must lie in the amplitude interval".into()));
    }
    if !(step > 0.0) || !(reach > 0.0) {
        return Err(Error::EmptyBox { lo: -reach, hi: reach });
    }
    let d = dec.deceiver;
    let ne = dne_agg(game, dec, 0.0, &vec![0.0; game.n()])?;
    let miss = |x: &[f64]| game.cost_at(d, x) - jref;
    let m0 = miss(&ne.x);
    if m0 == 0.0 {
        return Ok(ne);
    }
    let mut best: Option<AggDne> = None;
    for dir in [1.0, -1.0] {
        let mut prev = (0.0, ne.x.clone(), m0);
        let mut k = 1;
        loop {
            let delta = dir * k as f64 * step;
            if delta.abs() > reach || !bounds.contains(delta) {
                break;
            }
            let Ok(s) = dne_agg(game, dec, delta, &prev.1) else { break };
            let m = miss(&s.x);
            if m.signum() != prev.2.signum() {
                let (mut lo, mut hi) = (prev.0, delta);
                let (mut xlo, mut mlo) = (prev.1.clone(), prev.2);
                let mut found = s;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    found = dne_agg(game, dec, mid, &xlo)?;
                    let mm = miss(&found.x);
                    if mm == 0.0 || (hi - lo).abs() < 1e-13 {
                        break;
                    }
                    if mm.signum() == mlo.signum() {
                        lo = mid;
                        xlo = found.x.clone();
                        mlo = mm;
                    } else {
                        hi = mid;
                    }
                }
                if best.as_ref().is_none_or(|b| found.delta.abs() < b.delta.abs()) {
                    best = Some(found);
                }
                break;
            }
            prev = (delta, s.x, m);
            k += 1;
        }
    }
    best.ok_or(Error::NotAttainable { jref })
}
