//! Extremum-seeking Nash equilibrium dynamics with deceptive players.
//!
//! Every player probes with `a sin(ω_i t + φ_i)` and updates its nominal action
//! by `u̇_i = −(2k/a) J_i(x) sin(ω_i t + φ_i)`. A deceiver additionally replays
//! its targets' probes with amplitude `δ_i`, and `δ_i` follows one of the
//! policies in [`DeltaPolicy`]. [`Simulation::run`] integrates the oscillatory
//! system with fixed-step RK4; [`Simulation::run_averaged`] integrates the
//! averaged flow it approximates.

mod probe;
mod trajectory;

pub use probe::{PhaseEstimate, ProbeConfig, Rational};
pub use trajectory::{Trajectory, Window};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deception::{Deceiver, DeceptionStructure};
use crate::error::{Error, Result};
use crate::game::Game;

/// How a deceiver adapts its amplitude `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeltaPolicy {
    Fixed { delta: f64 },
    /// `δ̇ = ε ε_i (J_i − J_ref)`.
    Integral { epsilon: f64, gain: f64, jref: f64 },
    /// Lead compensator: `ϕ̇ = (ϱ − ϕ)/G1`, `ϱ̇ = ε ε_i (J_i − J_ref)`,
    /// `δ = (G2/G1) ϱ − (G2/G1 − 1) ϕ`.
    PhaseLead { epsilon: f64, gain: f64, jref: f64, g1: f64, g2: f64 },
    /// `δ̇ = ε (u_i − u_ref)`.
    PriceRef { epsilon: f64, uref: f64 },
}

impl DeltaPolicy {
    fn states(&self) -> usize {
        match self {
            DeltaPolicy::Fixed { .. } => 0,
            DeltaPolicy::Integral { .. } | DeltaPolicy::PriceRef { .. } => 1,
            DeltaPolicy::PhaseLead { .. } => 2,
        }
    }

    fn validate(&self, player: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDeception(format!("player {}: {m}", player + 1)));
        match *self {
            DeltaPolicy::Fixed { delta } if !delta.is_finite() => bad("fixed delta must be finite"),
            DeltaPolicy::Integral { gain, .. } | DeltaPolicy::PhaseLead { gain, .. } if gain == 0.0 => {
                bad("integrator gain must be nonzero")
            }
            DeltaPolicy::PhaseLead { g1, g2, .. } if !(g1 > 0.0 && g2 >= g1) => {
                bad("phase-lead gains need G2 >= G1 > 0")
            }
            _ => Ok(()),
        }
    }
}

/// Per-player behaviour.
#[derive(Debug, Clone, PartialEq)]
pub enum PlayerPolicy {
    Oblivious,
    Deceptive { targets: Vec<usize>, policy: DeltaPolicy, delta0: f64 },
}

/// Integration horizon and output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_final: f64,
    pub u0: Vec<f64>,
    /// Requested spacing of output samples; rounded so that a whole number of
    /// samples (always even) fits into one common probe period.
    pub output_dt: f64,
    /// Lower bound on RK4 steps per period of the fastest probe.
    pub samples_per_period: usize,
    pub blowup: f64,
}

impl SimConfig {
    pub fn new(t_final: f64, u0: Vec<f64>) -> Self {
        SimConfig { t_final, u0, output_dt: 0.1, samples_per_period: 40, blowup: 1e6 }
    }
}

/// A complete simulation setup.
#[derive(Clone)]
pub struct Simulation {
    pub game: Arc<dyn Game>,
    pub probe: ProbeConfig,
    pub policies: Vec<PlayerPolicy>,
    pub config: SimConfig,
}

/// Integration state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    /// Per deceiver: `[δ]`, `[ϕ, ϱ]`, or empty for a fixed amplitude.
    pub policy_states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
struct DeceiverPlan {
    player: usize,
    policy: DeltaPolicy,
    offset: usize,
    /// `(target, estimated phase)` pairs.
    targets: Vec<(usize, f64)>,
    /// `cos(φ̂ − φ_target)` per target, used by the averaged flow.
    cos_mismatch: Vec<f64>,
}

/// Flattened system shared by the oscillatory and the averaged integrators.
struct Plan {
    n: usize,
    omegas: Vec<f64>,
    phases: Vec<f64>,
    deceivers: Vec<DeceiverPlan>,
    dim: usize,
}

impl Plan {
    fn delta(&self, d: &DeceiverPlan, y: &[f64]) -> f64 {
        match d.policy {
            DeltaPolicy::Fixed { delta } => delta,
            DeltaPolicy::Integral { .. } | DeltaPolicy::PriceRef { .. } => y[d.offset],
            DeltaPolicy::PhaseLead { g1, g2, .. } => {
                let r = g2 / g1;
                r * y[d.offset + 1] - (r - 1.0) * y[d.offset]
            }
        }
    }

    fn policy_rhs(&self, d: &DeceiverPlan, y: &[f64], j: f64, dy: &mut [f64]) {
        match d.policy {
            DeltaPolicy::Fixed { .. } => {}
            DeltaPolicy::Integral { epsilon, gain, jref } => dy[d.offset] = epsilon * gain * (j - jref),
            DeltaPolicy::PhaseLead { epsilon, gain, jref, g1, .. } => {
                dy[d.offset] = (y[d.offset + 1] - y[d.offset]) / g1;
                dy[d.offset + 1] = epsilon * gain * (j - jref);
            }
            DeltaPolicy::PriceRef { epsilon, uref } => dy[d.offset] = epsilon * (y[d.player] - uref),
        }
    }
}

/// Scratch buffers for one right-hand-side evaluation.
struct Scratch {
    sines: Vec<f64>,
    x: Vec<f64>,
    j: Vec<f64>,
}

impl Simulation {
    pub fn new(
        game: Arc<dyn Game>,
        probe: ProbeConfig,
        policies: Vec<PlayerPolicy>,
        config: SimConfig,
    ) -> Result<Self> {
        let s = Simulation { game, probe, policies, config };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.game.players();
        self.probe.validate()?;
        if self.probe.players() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.probe.players() });
        }
        if self.policies.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.policies.len() });
        }
        if self.config.u0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.config.u0.len() });
        }
        if self.config.u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial action".into()));
        }
        if !(self.config.t_final > 0.0) || !(self.config.output_dt > 0.0) || self.config.samples_per_period == 0 {
            return Err(Error::Precondition("t_final, output_dt and samples_per_period must be positive".into()));
        }
        let _ = self.deception_structure()?;
        for (i, p) in self.policies.iter().enumerate() {
            if let PlayerPolicy::Deceptive { policy, delta0, .. } = p {
                policy.validate(i)?;
                if !delta0.is_finite() {
                    return Err(Error::NonFinite(format!("initial delta of player {}", i + 1)));
                }
            }
        }
        for e in &self.probe.phase_estimates {
            let ok = matches!(self.policies.get(e.deceiver), Some(PlayerPolicy::Deceptive { targets, .. }) if targets.contains(&e.target));
            if !ok {
                return Err(Error::InvalidProbe(format!(
                    "phase estimate for a pair that is not a deception link ({} -> {})",
                    e.deceiver + 1,
                    e.target + 1
                )));
            }
        }
        Ok(())
    }

    /// The deception links implied by the policies, with payoff gains and references.
    pub fn deception_structure(&self) -> Result<DeceptionStructure> {
        let mut out = Vec::new();
        for (i, p) in self.policies.iter().enumerate() {
            if let PlayerPolicy::Deceptive { targets, policy, .. } = p {
                let (gain, jref) = match *policy {
                    DeltaPolicy::Integral { gain, jref, .. } | DeltaPolicy::PhaseLead { gain, jref, .. } => (gain, jref),
                    _ => (1.0, 0.0),
                };
                out.push(Deceiver { player: i, targets: targets.clone(), gain, jref });
            }
        }
        DeceptionStructure::new(out, self.game.players())
    }

    /// Player indices of the deceivers, in state order.
    pub fn deceivers(&self) -> Vec<usize> {
        self.policies
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, PlayerPolicy::Deceptive { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    fn plan(&self) -> Plan {
        let n = self.game.players();
        let mut offset = n;
        let mut deceivers = Vec::new();
        for (i, p) in self.policies.iter().enumerate() {
            if let PlayerPolicy::Deceptive { targets, policy, .. } = p {
                let t: Vec<(usize, f64)> =
                    targets.iter().map(|&t| (t, self.probe.estimated_phase(i, t))).collect();
                let cos_mismatch = t.iter().map(|&(tg, ph)| (ph - self.probe.phases[tg]).cos()).collect();
                deceivers.push(DeceiverPlan {
                    player: i,
                    policy: policy.clone(),
                    offset,
                    targets: t,
                    cos_mismatch,
                });
                offset += policy.states();
            }
        }
        Plan {
            n,
            omegas: (0..n).map(|i| self.probe.frequency(i)).collect(),
            phases: self.probe.phases.clone(),
            deceivers,
            dim: offset,
        }
    }

    fn initial_vector(&self, plan: &Plan) -> Vec<f64> {
        let mut y = vec![0.0; plan.dim];
        y[..plan.n].copy_from_slice(&self.config.u0);
        for d in &plan.deceivers {
            let delta0 = match &self.policies[d.player] {
                PlayerPolicy::Deceptive { delta0, .. } => *delta0,
                PlayerPolicy::Oblivious => 0.0,
            };
            for s in 0..d.policy.states() {
                y[d.offset + s] = delta0;
            }
        }
        y
    }

    fn state_of(&self, plan: &Plan, t: f64, y: &[f64]) -> SimState {
        SimState {
            t,
            u: y[..plan.n].to_vec(),
            policy_states: plan
                .deceivers
                .iter()
                .map(|d| y[d.offset..d.offset + d.policy.states()].to_vec())
                .collect(),
        }
    }

    fn flatten(&self, plan: &Plan, state: &SimState) -> Result<Vec<f64>> {
        if state.u.len() != plan.n || state.policy_states.len() != plan.deceivers.len() {
            return Err(Error::DimensionMismatch { expected: plan.n, got: state.u.len() });
        }
        let mut y = vec![0.0; plan.dim];
        y[..plan.n].copy_from_slice(&state.u);
        for (d, s) in plan.deceivers.iter().zip(&state.policy_states) {
            if s.len() != d.policy.states() {
                return Err(Error::DimensionMismatch { expected: d.policy.states(), got: s.len() });
            }
            y[d.offset..d.offset + s.len()].copy_from_slice(s);
        }
        Ok(y)
    }

    /// Initial state as configured.
    pub fn initial_state(&self) -> SimState {
        let plan = self.plan();
        let y = self.initial_vector(&plan);
        self.state_of(&plan, 0.0, &y)
    }

    /// Current deception amplitudes, one per deceiver.
    pub fn deltas(&self, state: &SimState) -> Result<Vec<f64>> {
        let plan = self.plan();
        let y = self.flatten(&plan, state)?;
        Ok(plan.deceivers.iter().map(|d| plan.delta(d, &y)).collect())
    }

    fn fill_action(&self, plan: &Plan, t: f64, y: &[f64], sc: &mut Scratch) {
        let a = self.probe.a;
        for i in 0..plan.n {
            sc.sines[i] = (plan.omegas[i] * t + plan.phases[i]).sin();
            sc.x[i] = y[i] + a * sc.sines[i];
        }
        for d in &plan.deceivers {
            let delta = plan.delta(d, y);
            if delta == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for &(tg, ph) in &d.targets {
                s += if ph == plan.phases[tg] { sc.sines[tg] } else { (plan.omegas[tg] * t + ph).sin() };
            }
            sc.x[d.player] += a * delta * s;
        }
    }

    /// The applied action `x(t)`.
    pub fn action(&self, state: &SimState) -> Result<Vec<f64>> {
        let plan = self.plan();
        let y = self.flatten(&plan, state)?;
        let mut sc = Scratch { sines: vec![0.0; plan.n], x: vec![0.0; plan.n], j: vec![0.0; plan.n] };
        self.fill_action(&plan, state.t, &y, &mut sc);
        Ok(sc.x)
    }

    fn eval(&self, plan: &Plan, t: f64, y: &[f64], dy: &mut [f64], sc: &mut Scratch) -> Result<()> {
        self.fill_action(plan, t, y, sc);
        let gain = 2.0 * self.probe.k / self.probe.a;
        for i in 0..plan.n {
            let j = self.game.cost_at(i, &sc.x);
            if !j.is_finite() {
                return Err(Error::Diverged { t, reason: format!("non-finite cost for player {}", i + 1) });
            }
            sc.j[i] = j;
            dy[i] = -gain * j * sc.sines[i];
        }
        for d in &plan.deceivers {
            plan.policy_rhs(d, y, sc.j[d.player], dy);
        }
        Ok(())
    }

    /// Time derivative of the full oscillatory system at `state`.
    pub fn rhs(&self, state: &SimState) -> Result<SimState> {
        let plan = self.plan();
        let y = self.flatten(&plan, state)?;
        let mut dy = vec![0.0; plan.dim];
        let mut sc = Scratch { sines: vec![0.0; plan.n], x: vec![0.0; plan.n], j: vec![0.0; plan.n] };
        self.eval(&plan, state.t, &y, &mut dy, &mut sc)?;
        let mut out = self.state_of(&plan, 1.0, &dy);
        out.t = 1.0;
        Ok(out)
    }

    fn averaged_eval(&self, plan: &Plan, y: &[f64], dy: &mut [f64], j: &mut [f64], pg: &mut [f64]) -> Result<()> {
        let u = &y[..plan.n];
        self.game.pseudogradient_into(u, pg);
        for d in &plan.deceivers {
            let delta = plan.delta(d, y);
            for (&(tg, _), c) in d.targets.iter().zip(&d.cos_mismatch) {
                pg[tg] += delta * c * self.game.partial_at(tg, d.player, u);
            }
        }
        for i in 0..plan.n {
            j[i] = self.game.cost_at(i, u);
            if !j[i].is_finite() || !pg[i].is_finite() {
                return Err(Error::Diverged { t: f64::NAN, reason: "non-finite averaged vector field".into() });
            }
            dy[i] = -self.probe.k * pg[i];
        }
        for d in &plan.deceivers {
            plan.policy_rhs(d, y, j[d.player], dy);
        }
        Ok(())
    }

    /// Averaged vector field `−k(𝒢(ũ) + Λ(ũ)δ)` together with the averaged policy dynamics.
    pub fn average_rhs(&self, state: &SimState) -> Result<SimState> {
        let plan = self.plan();
        let y = self.flatten(&plan, state)?;
        let mut dy = vec![0.0; plan.dim];
        let mut j = vec![0.0; plan.n];
        let mut pg = vec![0.0; plan.n];
        self.averaged_eval(&plan, &y, &mut dy, &mut j, &mut pg)?;
        Ok(self.state_of(&plan, 1.0, &dy))
    }

    /// Output samples per common period and RK4 steps per output sample.
    pub fn grid(&self) -> (usize, usize, f64) {
        let period = self.probe.common_period();
        let half = ((period / (2.0 * self.config.output_dt)).round() as usize).max(1);
        let per_window = 2 * half;
        let fastest = (0..self.probe.players()).map(|i| self.probe.frequency(i)).fold(0.0, f64::max);
        let h_max = 2.0 * std::f64::consts::PI / (fastest * self.config.samples_per_period as f64);
        let stride = ((period / per_window as f64) / h_max).ceil().max(1.0) as usize;
        let h = period / (per_window * stride) as f64;
        (per_window, stride, h)
    }

    /// Integrates the oscillatory system with fixed-step RK4.
    pub fn run(&self) -> Result<Trajectory> {
        self.validate()?;
        let plan = self.plan();
        let (window, stride, h) = self.grid();
        let mut y = self.initial_vector(&plan);
        let dim = plan.dim;
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        let mut tmp = vec![0.0; dim];
        let mut sc = Scratch { sines: vec![0.0; plan.n], x: vec![0.0; plan.n], j: vec![0.0; plan.n] };
        let n_samples = (self.config.t_final / (h * stride as f64)).round().max(1.0) as usize;
        let mut traj = Trajectory::new(plan.n, self.deceivers(), self.probe.common_period(), window);
        let mut row = vec![0.0; traj.width()];
        let mut prev_row = vec![0.0; traj.width()];
        let mut cum = vec![0.0; traj.width()];

        let fill_row = |row: &mut [f64], y: &[f64], sc: &Scratch| {
            let n = plan.n;
            row[..n].copy_from_slice(&sc.x);
            row[n..2 * n].copy_from_slice(&y[..n]);
            for (m, d) in plan.deceivers.iter().enumerate() {
                row[2 * n + m] = plan.delta(d, y);
            }
            let off = 2 * n + plan.deceivers.len();
            row[off..off + n].copy_from_slice(&sc.j);
        };

        let mut step = 0usize;
        let total = n_samples * stride;
        loop {
            let t = step as f64 * h;
            self.eval(&plan, t, &y, &mut k1, &mut sc)?;
            fill_row(&mut row, &y, &sc);
            if step > 0 {
                for c in 0..row.len() {
                    cum[c] += 0.5 * h * (prev_row[c] + row[c]);
                }
            }
            std::mem::swap(&mut row, &mut prev_row);
            if step % stride == 0 {
                traj.push(t, &prev_row, &cum);
                let umax = y[..plan.n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if umax > self.config.blowup {
                    traj.mark_unstable();
                    break;
                }
            }
            if step == total {
                break;
            }
            for c in 0..dim {
                tmp[c] = y[c] + 0.5 * h * k1[c];
            }
            self.eval(&plan, t + 0.5 * h, &tmp, &mut k2, &mut sc)?;
            for c in 0..dim {
                tmp[c] = y[c] + 0.5 * h * k2[c];
            }
            self.eval(&plan, t + 0.5 * h, &tmp, &mut k3, &mut sc)?;
            for c in 0..dim {
                tmp[c] = y[c] + h * k3[c];
            }
            self.eval(&plan, t + h, &tmp, &mut k4, &mut sc)?;
            for c in 0..dim {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { t: t + h, reason: "non-finite state".into() });
            }
            step += 1;
        }
        Ok(traj)
    }

    /// Integrates the averaged system on the same output grid as [`Simulation::run`].
    pub fn run_averaged(&self) -> Result<Trajectory> {
        self.validate()?;
        let plan = self.plan();
        let (window, stride, h_osc) = self.grid();
        let dt_out = h_osc * stride as f64;
        let sub = (dt_out / 1e-3).ceil().max(1.0) as usize;
        let h = dt_out / sub as f64;
        let n_samples = (self.config.t_final / dt_out).round().max(1.0) as usize;
        let dim = plan.dim;
        let mut y = self.initial_vector(&plan);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        let mut tmp = vec![0.0; dim];
        let mut j = vec![0.0; plan.n];
        let mut pg = vec![0.0; plan.n];
        let mut traj = Trajectory::new(plan.n, self.deceivers(), self.probe.common_period(), window);
        let mut row = vec![0.0; traj.width()];
        let mut prev_row = vec![0.0; traj.width()];
        let mut cum = vec![0.0; traj.width()];
        let total = n_samples * sub;
        let mut step = 0usize;
        loop {
            let t = step as f64 * h;
            self.averaged_eval(&plan, &y, &mut k1, &mut j, &mut pg)?;
            let n = plan.n;
            row[..n].copy_from_slice(&y[..n]);
            row[n..2 * n].copy_from_slice(&y[..n]);
            for (m, d) in plan.deceivers.iter().enumerate() {
                row[2 * n + m] = plan.delta(d, &y);
            }
            let off = 2 * n + plan.deceivers.len();
            row[off..off + n].copy_from_slice(&j);
            if step > 0 {
                for c in 0..row.len() {
                    cum[c] += 0.5 * h * (prev_row[c] + row[c]);
                }
            }
            std::mem::swap(&mut row, &mut prev_row);
            if step % sub == 0 {
                traj.push(t, &prev_row, &cum);
                if y[..n].iter().any(|v| v.abs() > self.config.blowup) {
                    traj.mark_unstable();
                    break;
                }
            }
            if step == total {
                break;
            }
            for c in 0..dim {
                tmp[c] = y[c] + 0.5 * h * k1[c];
            }
            self.averaged_eval(&plan, &tmp, &mut k2, &mut j, &mut pg)?;
            for c in 0..dim {
                tmp[c] = y[c] + 0.5 * h * k2[c];
            }
            self.averaged_eval(&plan, &tmp, &mut k3, &mut j, &mut pg)?;
            for c in 0..dim {
                tmp[c] = y[c] + h * k3[c];
            }
            self.averaged_eval(&plan, &tmp, &mut k4, &mut j, &mut pg)?;
            for c in 0..dim {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            step += 1;
        }
        Ok(traj)
    }

    /// Copy with all probe frequencies scaled by `factor`.
    pub fn with_frequency_scale(&self, factor: f64) -> Simulation {
        Simulation { probe: self.probe.scaled(factor), ..self.clone() }
    }

    /// Copy with probe amplitude `a`.
    pub fn with_amplitude(&self, a: f64) -> Simulation {
        let mut s = self.clone();
        s.probe.a = a;
        s
    }
}

/// Sup-norm distance between the centred period average of the oscillatory
/// run and the averaged run, over `u` and `δ`, for each frequency multiplier.
pub fn averaging_gap(sim: &Simulation, multipliers: &[f64]) -> Result<Vec<f64>> {
    multipliers
        .iter()
        .map(|&m| {
            let s = sim.with_frequency_scale(m);
            let full = s.run()?;
            let avg = s.run_averaged()?;
            if full.is_unstable() || avg.is_unstable() {
                return Err(Error::Diverged { t: full.t().last().copied().unwrap_or(0.0), reason: "run blew up".into() });
            }
            let n = full.players();
            let cols: Vec<usize> = (n..2 * n + full.deceivers().len()).collect();
            let mut gap = 0.0f64;
            for k in 0..full.len().min(avg.len()) {
                if let Some(mean) = full.average(k, Window::Centered) {
                    let reference = avg.row(k);
                    for &c in &cols {
                        gap = gap.max((mean[c] - reference[c]).abs());
                    }
                }
            }
            Ok(gap)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::QuadraticGame;

    fn duopoly_sim(policy: PlayerPolicy, t_final: f64) -> Simulation {
        let g = Arc::new(QuadraticGame::duopoly(100.0, 0.2, [30.0, 30.0]).unwrap());
        let probe = ProbeConfig::new(0.05, 0.03, 1000.0, vec![Rational::new(8, 1).unwrap(), Rational::new(7, 1).unwrap()])
            .unwrap();
        let cfg = SimConfig::new(t_final, vec![130.0 / 3.0, 110.0 / 3.0]);
        Simulation::new(g, probe, vec![PlayerPolicy::Oblivious, policy], cfg).unwrap()
    }

    #[test]
    fn zero_amplitude_action_is_nominal() {
        let sim = duopoly_sim(PlayerPolicy::Oblivious, 1.0);
        let mut s = sim.initial_state();
        s.t = 0.37;
        let x = sim.action(&s).unwrap();
        let w = [8000.0, 7000.0];
        for i in 0..2 {
            assert!((x[i] - (s.u[i] + 0.05 * (w[i] * 0.37f64).sin())).abs() < 1e-14);
        }
    }

    #[test]
    fn deceiver_replays_target_probe() {
        let sim = duopoly_sim(
            PlayerPolicy::Deceptive { targets: vec![0], policy: DeltaPolicy::Fixed { delta: 0.6 }, delta0: 0.0 },
            1.0,
        );
        let mut s = sim.initial_state();
        s.t = 1.234;
        let x = sim.action(&s).unwrap();
        let want = s.u[1] + 0.05 * ((7000.0 * 1.234f64).sin() + 0.6 * (8000.0 * 1.234f64).sin());
        assert!((x[1] - want).abs() < 1e-13);
    }

    #[test]
    fn integral_policy_is_idle_at_reference() {
        let g = Arc::new(QuadraticGame::from_rows(
            &[vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![0.0, 1.0]]],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
            &[0.0, 0.0],
        )
        .unwrap());
        let probe = ProbeConfig::new(0.1, 0.1, 1.0, vec![Rational::new(3, 1).unwrap(), Rational::new(5, 1).unwrap()])
            .unwrap();
        let pol = PlayerPolicy::Deceptive {
            targets: vec![0],
            policy: DeltaPolicy::Integral { epsilon: 1.0, gain: 1.0, jref: 0.0 },
            delta0: 0.0,
        };
        let sim = Simulation::new(g, probe, vec![PlayerPolicy::Oblivious, pol], SimConfig::new(1.0, vec![0.0, 0.0]))
            .unwrap();
        let mut s = sim.initial_state();
        s.t = 0.0;
        let d = sim.rhs(&s).unwrap();
        assert_eq!(d.u, vec![0.0, 0.0]);
        assert_eq!(d.policy_states, vec![vec![0.0]]);
    }

    #[test]
    fn averaged_field_matches_deceptive_pseudogradient() {
        let sim = duopoly_sim(
            PlayerPolicy::Deceptive { targets: vec![0], policy: DeltaPolicy::Fixed { delta: 0.5 }, delta0: 0.0 },
            1.0,
        );
        let s = SimState { t: 0.0, u: vec![40.0, 35.0], policy_states: vec![vec![]] };
        let d = sim.average_rhs(&s).unwrap();
        let (x1, x2) = (40.0, 35.0);
        let g1 = 10.0 * x1 - 5.0 * x2 - 250.0 + 0.5 * (-5.0 * x1 + 150.0);
        let g2 = -5.0 * x1 + 10.0 * x2 - 150.0;
        assert!((d.u[0] + 0.03 * g1).abs() < 1e-12);
        assert!((d.u[1] + 0.03 * g2).abs() < 1e-12);
    }

    #[test]
    fn runs_are_bit_identical() {
        let pol = PlayerPolicy::Deceptive {
            targets: vec![0],
            policy: DeltaPolicy::Integral { epsilon: 0.001, gain: 1.0, jref: -1000.0 },
            delta0: 0.0,
        };
        let sim = duopoly_sim(pol, 2.0);
        let a = sim.run().unwrap();
        let b = sim.run().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_lead_with_equal_gains_is_integral() {
        let mk = |p| PlayerPolicy::Deceptive { targets: vec![0], policy: p, delta0: 0.1 };
        let a = duopoly_sim(mk(DeltaPolicy::Integral { epsilon: 0.001, gain: 1.0, jref: -1000.0 }), 3.0)
            .run()
            .unwrap();
        let b = duopoly_sim(
            mk(DeltaPolicy::PhaseLead { epsilon: 0.001, gain: 1.0, jref: -1000.0, g1: 0.7, g2: 0.7 }),
            3.0,
        )
        .run()
        .unwrap();
        assert_eq!(a.len(), b.len());
        for k in 0..a.len() {
            for (p, q) in a.row(k).iter().zip(b.row(k)) {
                assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs()), "{p} vs {q}");
            }
        }
    }

    #[test]
    fn blowup_truncates_and_flags() {
        let sim = duopoly_sim(
            PlayerPolicy::Deceptive { targets: vec![0], policy: DeltaPolicy::Fixed { delta: 3.0 }, delta0: 0.0 },
            100.0,
        );
        let mut sim = sim;
        sim.config.blowup = 1e3;
        let tr = sim.run().unwrap();
        assert!(tr.is_unstable());
        assert!(*tr.t().last().unwrap() < 100.0);
    }

    #[test]
    fn rejects_inconsistent_setup() {
        let g = Arc::new(QuadraticGame::duopoly(100.0, 0.2, [30.0, 30.0]).unwrap());
        let probe = ProbeConfig::new(0.05, 0.03, 1000.0, vec![Rational::new(8, 1).unwrap(), Rational::new(7, 1).unwrap()])
            .unwrap();
        let self_target = PlayerPolicy::Deceptive { targets: vec![1], policy: DeltaPolicy::Fixed { delta: 0.1 }, delta0: 0.0 };
        let r = Simulation::new(g.clone(), probe.clone(), vec![PlayerPolicy::Oblivious, self_target], SimConfig::new(1.0, vec![0.0, 0.0]));
        assert!(matches!(r, Err(Error::InvalidDeception(_))));
        let bad_lead = PlayerPolicy::Deceptive {
            targets: vec![0],
            policy: DeltaPolicy::PhaseLead { epsilon: 0.1, gain: 1.0, jref: 0.0, g1: 2.0, g2: 1.0 },
            delta0: 0.0,
        };
        let r = Simulation::new(g, probe, vec![PlayerPolicy::Oblivious, bad_lead], SimConfig::new(1.0, vec![0.0, 0.0]));
        assert!(matches!(r, Err(Error::InvalidDeception(_))));
    }
}
