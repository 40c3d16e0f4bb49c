//! Deception algebra for quadratic games.
//!
//! A deceiver `i` that knows the probe frequency of a target `d` injects that
//! probe into its own action with amplitude `δ_i`. The target then estimates a
//! corrupted gradient, and the averaged flow becomes `−k(Qcal_δ x + Bcal_δ)`.
//! This module builds `Qcal_δ`, the stability set `Δ`, the deceptive Nash
//! equilibrium `g(δ)` and, for a single deceiver acting on a single target, the
//! closed-form payoff curves used to decide which references are attainable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_dim, check_player, ActionVector, Game, QuadraticGame};
use crate::interval::IntervalSet;
use crate::linalg;

/// One deceiving player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deceiver {
    pub player: usize,
    pub targets: Vec<usize>,
    /// `ε_i`; its sign decides the direction of the payoff-tracking integrator.
    pub gain: f64,
    /// Payoff reference `J_i^ref` (a cost).
    pub jref: f64,
}

/// Who deceives whom.
#[derive(Debug, Clone, PartialEq)]
pub struct DeceptionStructure {
    deceivers: Vec<Deceiver>,
}

impl DeceptionStructure {
    pub fn new(deceivers: Vec<Deceiver>, players: usize) -> Result<Self> {
        let mut seen = vec![false; players];
        for d in &deceivers {
            check_player(d.player, players)?;
            if seen[d.player] {
                return Err(Error::InvalidDeception(format!(
                    "player {} is listed as a deceiver twice",
                    d.player + 1
                )));
            }
            seen[d.player] = true;
            if d.targets.is_empty() {
                return Err(Error::InvalidDeception(format!(
                    "deceiver {} has an empty target list",
                    d.player + 1
                )));
            }
            for (k, &t) in d.targets.iter().enumerate() {
                check_player(t, players)?;
                if t == d.player {
                    return Err(Error::InvalidDeception(format!(
                        "player {} cannot deceive itself",
                        t + 1
                    )));
                }
                if d.targets[..k].contains(&t) {
                    return Err(Error::InvalidDeception(format!(
                        "target {} repeated for deceiver {}",
                        t + 1,
                        d.player + 1
                    )));
                }
            }
            if d.gain == 0.0 || !d.gain.is_finite() {
                return Err(Error::InvalidDeception(format!(
                    "deceiver {} needs a finite nonzero gain",
                    d.player + 1
                )));
            }
        }
        Ok(DeceptionStructure { deceivers })
    }

    /// A single deceiver with gain `+1` and reference 0.
    pub fn single(deceiver: usize, targets: Vec<usize>, players: usize) -> Result<Self> {
        DeceptionStructure::new(
            vec![Deceiver { player: deceiver, targets, gain: 1.0, jref: 0.0 }],
            players,
        )
    }

    pub fn deceivers(&self) -> &[Deceiver] {
        &self.deceivers
    }

    pub fn len(&self) -> usize {
        self.deceivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deceivers.is_empty()
    }

    /// Positions (in `deceivers()`) of the players deceiving `i`.
    pub fn deceivers_of(&self, i: usize) -> Vec<usize> {
        self.deceivers
            .iter()
            .enumerate()
            .filter(|(_, d)| d.targets.contains(&i))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_oblivious(&self, i: usize) -> bool {
        !self.deceivers.iter().any(|d| d.player == i)
    }
}

/// `Qbar(i,j)` and `Bbar(i,j)` for every deceiver/target pair, plus per-deceiver sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DeceptiveMatrices {
    /// Indexed `[deceiver position][target position]`.
    pub qbar: Vec<Vec<DMatrix<f64>>>,
    pub bbar: Vec<Vec<DVector<f64>>>,
    /// `Σ_j Qbar(i,j)` per deceiver.
    pub qbar_sum: Vec<DMatrix<f64>>,
    pub bbar_sum: Vec<DVector<f64>>,
}

pub fn build_deceptive_matrices(game: &QuadraticGame, ds: &DeceptionStructure) -> Result<DeceptiveMatrices> {
    let n = game.n();
    let mut out = DeceptiveMatrices { qbar: vec![], bbar: vec![], qbar_sum: vec![], bbar_sum: vec![] };
    for d in ds.deceivers() {
        check_player(d.player, n)?;
        let mut qs = Vec::new();
        let mut bs = Vec::new();
        let mut qsum = DMatrix::zeros(n, n);
        let mut bsum = DVector::zeros(n);
        for &t in &d.targets {
            check_player(t, n)?;
            if t == d.player {
                return Err(Error::InvalidDeception(format!("player {} cannot deceive itself", t + 1)));
            }
            let mut q = DMatrix::zeros(n, n);
            q.set_row(t, &game.q(t).row(d.player));
            let mut b = DVector::zeros(n);
            b[t] = game.b(t)[d.player];
            qsum += &q;
            bsum += &b;
            qs.push(q);
            bs.push(b);
        }
        out.qbar.push(qs);
        out.bbar.push(bs);
        out.qbar_sum.push(qsum);
        out.bbar_sum.push(bsum);
    }
    Ok(out)
}

/// `(Qcal_δ, Bcal_δ)`.
pub fn q_delta(
    game: &QuadraticGame,
    mats: &DeceptiveMatrices,
    delta: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_dim(mats.qbar_sum.len(), delta.len())?;
    let pg = game.pseudogradient_matrices();
    let mut q = pg.qcal;
    let mut b = pg.bcal;
    for (k, &dk) in delta.iter().enumerate() {
        q += &mats.qbar_sum[k] * dk;
        b += &mats.bbar_sum[k] * dk;
    }
    Ok((q, b))
}

/// True iff every eigenvalue of `Qcal_δ` lies in the open right half-plane.
pub fn in_delta(q_delta: &DMatrix<f64>) -> Result<bool> {
    Ok(linalg::max_real_eigenvalue(&(-q_delta))? < 0.0)
}

/// The deceptive Nash equilibrium `g(δ) = −Qcal_δ⁻¹ Bcal_δ`.
pub fn dne(game: &QuadraticGame, mats: &DeceptiveMatrices, delta: &[f64]) -> Result<ActionVector> {
    let (q, b) = q_delta(game, mats, delta)?;
    if !in_delta(&q)? {
        return Err(Error::OutsideDelta { delta: delta.to_vec() });
    }
    let x = linalg::solve(&q, &(-b), "Qcal_delta")?;
    Ok(ActionVector::from(x))
}

/// Search settings for [`delta_interval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    pub lo: f64,
    pub hi: f64,
    pub grid: f64,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { lo: -100.0, hi: 100.0, grid: 1e-2, tol: 1e-6 }
    }
}

/// Slice of `Δ` along deceiver `axis` with the other amplitudes held at `base`.
///
/// Stability is scanned on a grid and the sign changes of the largest real
/// eigenvalue of `−Qcal_δ` are refined by bisection. Stable runs that reach the
/// edge of the scan box are reported as unbounded.
pub fn delta_interval(
    game: &QuadraticGame,
    mats: &DeceptiveMatrices,
    axis: usize,
    base: &[f64],
    opts: ScanOptions,
) -> Result<IntervalSet> {
    check_dim(mats.qbar_sum.len(), base.len())?;
    check_player(axis, base.len())?;
    if !(opts.lo < opts.hi) || !(opts.grid > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::EmptyBox { lo: opts.lo, hi: opts.hi });
    }
    let margin = |d: f64| -> Result<f64> {
        let mut v = base.to_vec();
        v[axis] = d;
        let (q, _) = q_delta(game, mats, &v)?;
        linalg::max_real_eigenvalue(&(-q))
    };
    let bisect = |mut a: f64, mut b: f64, stable_a: bool| -> Result<f64> {
        while b - a > opts.tol {
            let m = 0.5 * (a + b);
            if (margin(m)? < 0.0) == stable_a {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let steps = ((opts.hi - opts.lo) / opts.grid).ceil() as usize;
    let at = |s: usize| if s == steps { opts.hi } else { opts.lo + s as f64 * opts.grid };
    let mut pieces = Vec::new();
    let mut prev_stable = margin(opts.lo)? < 0.0;
    let mut start = if prev_stable { Some(f64::NEG_INFINITY) } else { None };
    for s in 1..=steps {
        let d = at(s);
        let stable = margin(d)? < 0.0;
        if stable != prev_stable {
            let edge = bisect(at(s - 1), d, prev_stable)?;
            if stable {
                start = Some(edge);
            } else if let Some(a) = start.take() {
                pieces.push((a, edge));
            }
        }
        prev_stable = stable;
    }
    if let Some(a) = start {
        pieces.push((a, f64::INFINITY));
    }
    Ok(IntervalSet::new(pieces))
}

/// Closed-form description of a game with one deceiver acting on one target.
///
/// Along the equilibrium branch `g(δ) = x* + f(δ) Φ` with
/// `f(δ) = q1 δ / (q2 δ + q3)`, and each cost is the quadratic
/// `𝒥_i(e) = r2[i] e² + r1[i] e + jstar[i]` of the displacement `e = f(δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdsoAnalysis {
    pub deceiver: usize,
    pub target: usize,
    pub pivot: usize,
    pub phi: Vec<f64>,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub jstar: Vec<f64>,
    pub xstar: Vec<f64>,
}

pub fn sdso_analyze(game: &QuadraticGame, deceiver: usize, target: usize) -> Result<SdsoAnalysis> {
    let n = game.n();
    check_player(deceiver, n)?;
    check_player(target, n)?;
    if deceiver == target {
        return Err(Error::InvalidDeception("deceiver and target must differ".into()));
    }
    let xstar = game.nash_equilibrium()?;
    let qcal = game.pseudogradient_matrices().qcal;
    let rows: Vec<usize> = (0..n).filter(|&r| r != target).collect();
    let reduced = qcal.select_rows(&rows);
    let (pivot, phi) = (0..n)
        .find_map(|p| linalg::null_vector_with_pivot(&reduced, p).map(|phi| (p, phi)))
        .ok_or_else(|| Error::Degenerate("no well-conditioned pivot minor for Phi".into()))?;

    let qd = game.q(target);
    let q1 = -(game.b(target)[deceiver] + qd.row(deceiver).dot(&xstar.transpose()));
    let q2 = qd.row(deceiver).dot(&phi.transpose());
    let q3 = qd.row(target).dot(&phi.transpose());
    if q1 == 0.0 && q2 == 0.0 && q3 == 0.0 {
        return Err(Error::Degenerate("q1 = q2 = q3 = 0".into()));
    }
    let mut r1 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    let mut jstar = Vec::with_capacity(n);
    for i in 0..n {
        let grad = game.q(i) * &*xstar + game.b(i);
        r1.push(grad.dot(&phi));
        r2.push(0.5 * phi.dot(&(game.q(i) * &phi)));
        jstar.push(game.cost_at(i, xstar.as_slice()));
    }
    Ok(SdsoAnalysis {
        deceiver,
        target,
        pivot,
        phi: phi.iter().copied().collect(),
        q1,
        q2,
        q3,
        r1,
        r2,
        jstar,
        xstar: xstar.iter().copied().collect(),
    })
}

impl SdsoAnalysis {
    /// `f(δ)`.
    pub fn f(&self, delta: f64) -> f64 {
        self.q1 * delta / (self.q2 * delta + self.q3)
    }

    /// `f'(δ) = q1 q3 / (q2 δ + q3)²`.
    pub fn f_prime(&self, delta: f64) -> f64 {
        let den = self.q2 * delta + self.q3;
        self.q1 * self.q3 / (den * den)
    }

    /// `f⁻¹(e)`, `None` where `f` never reaches `e`.
    pub fn f_inverse(&self, e: f64) -> Option<f64> {
        let den = self.q1 - self.q2 * e;
        if den == 0.0 {
            None
        } else {
            Some(self.q3 * e / den)
        }
    }

    /// Pole of `f`, if any.
    pub fn pole(&self) -> Option<f64> {
        (self.q2 != 0.0).then(|| -self.q3 / self.q2)
    }

    /// `𝒥_i(e)`.
    pub fn payoff(&self, i: usize, e: f64) -> f64 {
        self.r2[i] * e * e + self.r1[i] * e + self.jstar[i]
    }

    /// `ℱ_i(e) = 𝒥_i(e) − J_i(x*)`.
    pub fn improvement(&self, i: usize, e: f64) -> f64 {
        self.r2[i] * e * e + self.r1[i] * e
    }

    /// `g(δ)` reconstructed from `Φ` and `f`.
    pub fn dne(&self, delta: f64) -> Vec<f64> {
        let e = self.f(delta);
        self.xstar.iter().zip(&self.phi).map(|(x, p)| x + e * p).collect()
    }

    /// `∂ξ/∂δ` with `ξ = ε J_deceiver(g(δ))`.
    pub fn dxi_ddelta(&self, epsilon: f64, delta: f64) -> f64 {
        let i = self.deceiver;
        epsilon * (2.0 * self.r2[i] * self.f(delta) + self.r1[i]) * self.f_prime(delta)
    }

    /// Vertex `−r1/(2 r2)` of the deceiver's payoff parabola.
    pub fn vertex(&self) -> Option<f64> {
        let i = self.deceiver;
        (self.r2[i] != 0.0).then(|| -self.r1[i] / (2.0 * self.r2[i]))
    }

    /// `f(Δ)`: image of an interval set under the Möbius map `f`.
    pub fn image_of(&self, delta: &IntervalSet) -> IntervalSet {
        let mut pieces = Vec::new();
        for &(a, b) in delta.intervals() {
            let mut cuts = vec![a];
            if let Some(p) = self.pole() {
                if a < p && p < b {
                    cuts.push(p);
                }
            }
            cuts.push(b);
            for w in cuts.windows(2) {
                let (lo, hi) = (self.f_limit(w[0], true), self.f_limit(w[1], false));
                pieces.push((lo.min(hi), lo.max(hi)));
            }
        }
        IntervalSet::new(pieces)
    }

    /// One-sided limit of `f` at `x`, approached from above when `from_above`.
    fn f_limit(&self, x: f64, from_above: bool) -> f64 {
        if x.is_infinite() {
            if self.q2 != 0.0 {
                return self.q1 / self.q2;
            }
            return (self.q1 / self.q3) * x.signum() * f64::INFINITY;
        }
        if Some(x) == self.pole() {
            // sign of f just beside the pole
            let h = if from_above { 1.0 } else { -1.0 };
            let num = self.q1 * x;
            let den_sign = self.q2 * h;
            return (num * den_sign).signum() * f64::INFINITY;
        }
        self.f(x)
    }

    /// Half-line of displacements on which the integrator is locally stable.
    pub fn stable_half_line(&self, epsilon: f64) -> Result<IntervalSet> {
        let i = self.deceiver;
        let s = epsilon * self.q1 * self.q3;
        if s == 0.0 {
            return Err(Error::Degenerate("epsilon q1 q3 = 0".into()));
        }
        if self.r2[i] == 0.0 {
            // 𝒥 is affine: the sign of ∂ξ/∂δ is constant
            return Ok(if s * self.r1[i] < 0.0 { IntervalSet::real_line() } else { IntervalSet::empty() });
        }
        let v = -self.r1[i] / (2.0 * self.r2[i]);
        Ok(if s * self.r2[i] > 0.0 {
            IntervalSet::single(f64::NEG_INFINITY, v)
        } else {
            IntervalSet::single(v, f64::INFINITY)
        })
    }

    /// Moves interval ends lying within `tol` of the pole onto it, so images
    /// of numerically located stability edges come out unbounded.
    pub fn snap_to_pole(&self, delta: &IntervalSet, tol: f64) -> IntervalSet {
        let Some(p) = self.pole() else { return delta.clone() };
        let snap = |x: f64| if (x - p).abs() <= tol { p } else { x };
        IntervalSet::new(delta.intervals().iter().map(|&(a, b)| (snap(a), snap(b))).collect())
    }

    /// Image of an interval set of displacements under player `i`'s payoff,
    /// assuming the payoff is monotone on each piece.
    fn payoff_image(&self, i: usize, e: &IntervalSet) -> IntervalSet {
        let lim = |x: f64| -> f64 {
            if x.is_infinite() {
                if self.r2[i] != 0.0 {
                    self.r2[i].signum() * f64::INFINITY
                } else if self.r1[i] != 0.0 {
                    (self.r1[i] * x).signum() * f64::INFINITY
                } else {
                    self.jstar[i]
                }
            } else {
                self.payoff(i, x)
            }
        };
        IntervalSet::new(
            e.intervals()
                .iter()
                .map(|&(a, b)| {
                    let (u, v) = (lim(a), lim(b));
                    (u.min(v), u.max(v))
                })
                .collect(),
        )
    }

    /// Displacements reachable by stable deception: `H ∩ f(Δ)`.
    pub fn attainable_displacements(&self, epsilon: f64, delta: &IntervalSet) -> Result<IntervalSet> {
        Ok(self.stable_half_line(epsilon)?.intersect(&self.image_of(delta)))
    }
}

/// The set `Ω` of references the deceiver can attain with stable integral deception.
pub fn omega_set(sdso: &SdsoAnalysis, epsilon: f64, delta: &IntervalSet) -> Result<IntervalSet> {
    let i = sdso.deceiver;
    if epsilon * sdso.r2[i] * sdso.q1 * sdso.q3 == 0.0 {
        return Err(Error::Degenerate(
            "epsilon r2 q1 q3 = 0: attainable set undefined".into(),
        ));
    }
    let e = sdso.attainable_displacements(epsilon, delta)?;
    Ok(sdso.payoff_image(i, &e))
}

/// Amplitude `δ*` at which the deceiver's cost equals `jref` on a stable branch.
///
/// Of the candidate roots inside `Δ` with `∂ξ/∂δ < 0`, the one closest to zero
/// is returned, polished by Newton iterations on `J(g(δ)) − jref`.
pub fn solve_delta_for_ref(
    sdso: &SdsoAnalysis,
    jref: f64,
    epsilon: f64,
    delta: &IntervalSet,
) -> Result<f64> {
    let i = sdso.deceiver;
    let (a, b, c) = (sdso.r2[i], sdso.r1[i], sdso.jstar[i] - jref);
    let roots: Vec<f64> = if a == 0.0 {
        if b == 0.0 {
            vec![]
        } else {
            vec![-c / b]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            vec![]
        } else {
            let sq = disc.sqrt();
            let qq = -0.5 * (b + b.signum() * sq);
            let mut r = vec![];
            if qq != 0.0 {
                r.push(qq / a);
                r.push(c / qq);
            } else {
                r.push(0.0);
            }
            r
        }
    };
    let in_domain: Vec<f64> = roots
        .into_iter()
        .filter_map(|e| sdso.f_inverse(e))
        .filter(|d| d.is_finite() && delta.contains(*d))
        .collect();
    if in_domain.is_empty() {
        return Err(Error::NotAttainable { jref });
    }
    let mut stable: Vec<f64> =
        in_domain.into_iter().filter(|&d| sdso.dxi_ddelta(epsilon, d) < 0.0).collect();
    stable.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let mut d = *stable.first().ok_or(Error::NoStableBranch { jref })?;
    for _ in 0..20 {
        let r = sdso.payoff(i, sdso.f(d)) - jref;
        let slope = (2.0 * sdso.r2[i] * sdso.f(d) + sdso.r1[i]) * sdso.f_prime(d);
        if slope == 0.0 || r.abs() <= 1e-13 * (1.0 + jref.abs()) {
            break;
        }
        d -= r / slope;
    }
    Ok(d)
}

/// Result of [`benevolence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benevolence {
    pub exists: bool,
    /// References at which the deceiver and every member strictly improve.
    pub window: IntervalSet,
    /// The matching range of deception amplitudes.
    pub deltas: IntervalSet,
}

/// Benevolent deception: references that improve the deceiver and all `members`.
pub fn benevolence(
    sdso: &SdsoAnalysis,
    epsilon: f64,
    members: &[usize],
    delta: &IntervalSet,
) -> Result<Benevolence> {
    let dec = sdso.deceiver;
    let none = Benevolence { exists: false, window: IntervalSet::empty(), deltas: IntervalSet::empty() };
    for &m in members {
        check_player(m, sdso.r1.len())?;
    }
    let s = sdso.r1[dec].signum();
    if s == 0.0 || members.iter().any(|&m| sdso.r1[m].signum() != s) {
        return Ok(none);
    }
    if !(epsilon * sdso.r1[dec] * sdso.q1 * sdso.q3 < 0.0) {
        return Ok(none);
    }
    let mut e = sdso.attainable_displacements(epsilon, delta)?;
    let mut who = members.to_vec();
    who.push(dec);
    for &m in &who {
        e = e.intersect(&negative_set(sdso.r2[m], sdso.r1[m]));
    }
    if e.is_empty() {
        return Ok(none);
    }
    let window = sdso.payoff_image(dec, &e);
    let deltas = IntervalSet::new(
        e.intervals()
            .iter()
            .filter_map(|&(a, b)| {
                let (u, v) = (inverse_limit(sdso, a), inverse_limit(sdso, b));
                Some((u?.min(v?), u?.max(v?)))
            })
            .collect(),
    )
    .intersect(delta);
    Ok(Benevolence { exists: true, window, deltas })
}

fn inverse_limit(sdso: &SdsoAnalysis, e: f64) -> Option<f64> {
    if e.is_infinite() {
        return sdso.pole().or(Some(e * (sdso.q3 / sdso.q1).signum()));
    }
    sdso.f_inverse(e).or(Some(e.signum() * f64::INFINITY))
}

/// `{e : r2 e² + r1 e < 0}`.
fn negative_set(r2: f64, r1: f64) -> IntervalSet {
    if r2 == 0.0 {
        return match r1.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => IntervalSet::single(f64::NEG_INFINITY, 0.0),
            Some(std::cmp::Ordering::Less) => IntervalSet::single(0.0, f64::INFINITY),
            _ => IntervalSet::empty(),
        };
    }
    let other = -r1 / r2;
    let (lo, hi) = (other.min(0.0), other.max(0.0));
    if r2 > 0.0 {
        IntervalSet::single(lo, hi)
    } else {
        IntervalSet::new(vec![(f64::NEG_INFINITY, lo), (hi, f64::INFINITY)])
    }
}

/// Whether player `i` is immune to deception from each player in `deceivers`.
///
/// Requires row `i` of `Q_i` to be the multiple `(b_i)_i / (b_i)_k` of row `k`.
/// A zero `(b_i)_k` makes the test inconclusive and yields `false`.
pub fn immunity_check(game: &QuadraticGame, i: usize, deceivers: &[usize]) -> Result<bool> {
    check_player(i, game.n())?;
    let (q, b) = (game.q(i), game.b(i));
    for &k in deceivers {
        check_player(k, game.n())?;
        if b[k] == 0.0 {
            return Ok(false);
        }
        let ratio = b[i] / b[k];
        let own = q.row(i);
        let scaled = q.row(k) * ratio;
        let scale = own.amax().max(scaled.amax()).max(f64::MIN_POSITIVE);
        if (own - scaled).amax() > 1e-9 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Effect of deception on an oblivious player's reaction curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReactionCurveChange {
    /// The curve pivots about `center` (given for two-player games with invertible `Q_k`).
    Rotation { center: Option<Vec<f64>> },
    Translation,
    Unchanged,
}

/// An affine hyperplane `normal · x + offset = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Perceived reaction curve of `k` under amplitude `delta` from `j`:
/// `∇_k J_k + δ ∇_j J_k = 0`.
pub fn perceived_reaction_curve(game: &QuadraticGame, k: usize, j: usize, delta: f64) -> Line {
    let q = game.q(k);
    let b = game.b(k);
    Line {
        normal: (q.row(k) + q.row(j) * delta).iter().copied().collect(),
        offset: b[k] + delta * b[j],
    }
}

pub fn rc_classify(game: &QuadraticGame, k: usize, j: usize) -> Result<ReactionCurveChange> {
    let n = game.n();
    check_player(k, n)?;
    check_player(j, n)?;
    let q = game.q(k);
    let b = game.b(k);
    let r1 = q.row(k);
    let r2 = q.row(j);
    if r1.amax() == 0.0 || r2.amax() == 0.0 {
        return Err(Error::Degenerate("zero gradient row in reaction-curve classification".into()));
    }
    // rank of [r1 b_k; r2 b_j]
    let aug = DMatrix::from_row_slice(
        2,
        n + 1,
        &r1.iter().chain([&b[k]]).chain(r2.iter()).chain([&b[j]]).copied().collect::<Vec<_>>(),
    );
    let coef = DMatrix::from_row_slice(2, n, &r1.iter().chain(r2.iter()).copied().collect::<Vec<_>>());
    let rank = |m: &DMatrix<f64>| {
        let sv = m.singular_values();
        let tol = 1e-10 * sv.max();
        sv.iter().filter(|&&s| s > tol).count()
    };
    match (rank(&coef), rank(&aug)) {
        (1, 1) => Ok(ReactionCurveChange::Unchanged),
        (1, _) => Ok(ReactionCurveChange::Translation),
        _ => {
            let center = if n == 2 {
                linalg::solve(q, &(-b), "Q_k").ok().map(|c| c.iter().copied().collect())
            } else {
                None
            };
            Ok(ReactionCurveChange::Rotation { center })
        }
    }
}

/// Outcome of the mutual-deception attainability test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualReport {
    pub candidate: Vec<f64>,
    /// Candidate refined so that both references are met exactly.
    pub delta: Vec<f64>,
    pub costs_at_candidate: Vec<f64>,
    pub costs: Vec<f64>,
    pub stable_flow: bool,
    pub references_met: bool,
    /// `∂ξ_i/∂δ_j` from the implicit-function formula, row-major.
    pub xi_jacobian: Vec<Vec<f64>>,
    pub xi_jacobian_fd: Vec<Vec<f64>>,
    pub xi_hurwitz: bool,
}

impl MutualReport {
    pub fn attainable(&self) -> bool {
        self.stable_flow && self.references_met && self.xi_hurwitz
    }
}

/// `∂J_i(g(δ))/∂δ_m` for all deceivers `i` and amplitudes `m`.
pub fn cost_sensitivity(
    game: &QuadraticGame,
    mats: &DeceptiveMatrices,
    ds: &DeceptionStructure,
    delta: &[f64],
) -> Result<DMatrix<f64>> {
    let (q, _) = q_delta(game, mats, delta)?;
    let x = dne(game, mats, delta)?;
    let m = ds.len();
    let mut out = DMatrix::zeros(m, m);
    for c in 0..m {
        let rhs = -(&mats.qbar_sum[c] * &*x + &mats.bbar_sum[c]);
        let dg = linalg::solve(&q, &rhs, "Qcal_delta")?;
        for (r, d) in ds.deceivers().iter().enumerate() {
            out[(r, c)] = game.cost_gradient(d.player, &x)?.dot(&dg);
        }
    }
    Ok(out)
}

pub fn mutual_attainability(
    game: &QuadraticGame,
    ds: &DeceptionStructure,
    candidate: &[f64],
) -> Result<MutualReport> {
    let mats = build_deceptive_matrices(game, ds)?;
    let m = ds.len();
    check_dim(m, candidate.len())?;
    let jrefs: DVector<f64> = DVector::from_iterator(m, ds.deceivers().iter().map(|d| d.jref));
    let costs_of = |d: &[f64]| -> Result<DVector<f64>> {
        let x = dne(game, &mats, d)?;
        Ok(DVector::from_iterator(m, ds.deceivers().iter().map(|dc| game.cost_at(dc.player, x.as_slice()))))
    };
    let costs_at_candidate = costs_of(candidate)?;

    let mut d = DVector::from_column_slice(candidate);
    for _ in 0..50 {
        let r = costs_of(d.as_slice())? - &jrefs;
        if r.amax() <= 1e-10 * (1.0 + jrefs.amax()) {
            break;
        }
        let jac = cost_sensitivity(game, &mats, ds, d.as_slice())?;
        let step = linalg::solve(&jac, &r, "cost sensitivity")?;
        d -= step;
    }
    let (q, _) = q_delta(game, &mats, d.as_slice())?;
    let stable_flow = in_delta(&q)?;
    let costs = costs_of(d.as_slice())?;
    let references_met = (&costs - &jrefs).amax() <= 1e-6 * (1.0 + jrefs.amax());

    let gains = DMatrix::from_diagonal(&DVector::from_iterator(m, ds.deceivers().iter().map(|x| x.gain)));
    let xi = &gains * cost_sensitivity(game, &mats, ds, d.as_slice())?;
    let h = 1e-6;
    let mut xi_fd = DMatrix::zeros(m, m);
    for c in 0..m {
        let mut dp = d.clone();
        let mut dm = d.clone();
        dp[c] += h;
        dm[c] -= h;
        let col = (costs_of(dp.as_slice())? - costs_of(dm.as_slice())?) / (2.0 * h);
        xi_fd.set_column(c, &(&gains * col));
    }
    let xi_hurwitz = linalg::is_hurwitz(&xi, 0.0)?;
    let rows = |a: &DMatrix<f64>| (0..m).map(|r| a.row(r).iter().copied().collect()).collect();
    Ok(MutualReport {
        candidate: candidate.to_vec(),
        delta: d.iter().copied().collect(),
        costs_at_candidate: costs_at_candidate.iter().copied().collect(),
        costs: costs.iter().copied().collect(),
        stable_flow,
        references_met,
        xi_jacobian: rows(&xi),
        xi_jacobian_fd: rows(&xi_fd),
        xi_hurwitz,
    })
}

/// Perceived cost `J̃_i` of an oblivious player.
///
/// Each deceiver `k` adds `δ_k ∫ ∇_k J_i dx_i`; the integration constant is
/// chosen so the added term vanishes where `∇_k J_i` does. Deceivers get their
/// true cost back.
pub fn perceived_cost(
    game: &QuadraticGame,
    ds: &DeceptionStructure,
    i: usize,
    x: &ActionVector,
    delta: &[f64],
) -> Result<f64> {
    check_player(i, game.n())?;
    check_dim(game.n(), x.len())?;
    check_dim(ds.len(), delta.len())?;
    let base = game.cost_at(i, x.as_slice());
    if !ds.is_oblivious(i) {
        return Ok(base);
    }
    let mut extra = 0.0;
    for pos in ds.deceivers_of(i) {
        let k = ds.deceivers()[pos].player;
        let grad = game.partial_at(i, k, x.as_slice());
        let slope = game.q(i)[(k, i)];
        let term = if slope == 0.0 {
            grad * x[i]
        } else {
            let y0 = x[i] - grad / slope;
            0.5 * slope * (x[i] - y0) * (x[i] - y0)
        };
        extra += delta[pos] * term;
    }
    Ok(base + extra)
}
