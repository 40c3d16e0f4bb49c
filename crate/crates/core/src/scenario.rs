//! Scenario files.
//!
//! A scenario is a TOML document with the sections `[game]` (required),
//! `[deception]`, `[probe]`, `[sim]`, `[analysis]` and `[sweep]`. Players are
//! numbered from 1 in files and from 0 in the library. Unknown keys are
//! rejected, and every problem found is reported at once.
//!
//! ```toml
//! [game]
//! kind = "duopoly"
//! demand = 100.0
//! preference = 0.2
//! marginal_costs = [30.0, 30.0]
//!
//! [deception]
//! epsilon = 0.001
//!
//! [[deception.deceivers]]
//! player = 2
//! targets = [1]
//! jref = -1000.0
//! policy = "integral"
//! ```
//!
//! Overrides use dotted paths; array elements are addressed by their 1-based
//! position, so `deception.deceivers.1.jref=-900` edits the first deceiver.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::aggregative::{dne_agg, AggDeception};
use crate::deception::{Deceiver, DeceptionStructure, ScanOptions};
use crate::error::{Error, Result};
use crate::game::{AggregativeGame, Game, QuadraticGame, ScalarCost, SmoothCost};
use crate::sim::{DeltaPolicy, PhaseEstimate, PlayerPolicy, ProbeConfig, Rational, SimConfig, Simulation};
use crate::stability::Regulated;

/// Scenarios shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("duopoly", include_str!("../scenarios/duopoly.scn")),
    ("duopoly-mutual", include_str!("../scenarios/duopoly-mutual.scn")),
    ("duopoly-phase-lead", include_str!("../scenarios/duopoly-phase-lead.scn")),
    ("duopoly-price-ref", include_str!("../scenarios/duopoly-price-ref.scn")),
    ("quad2", include_str!("../scenarios/quad2.scn")),
    ("quad2-immune", include_str!("../scenarios/quad2-immune.scn")),
    ("quad3", include_str!("../scenarios/quad3.scn")),
    ("agg2", include_str!("../scenarios/agg2.scn")),
];

/// Text of a bundled scenario; accepts `duopoly` or `duopoly.scn`.
pub fn bundled(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".scn").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == stem).map(|(_, t)| *t)
}

const SECTIONS: &[&str] = &["name", "description", "game", "deception", "probe", "sim", "analysis", "sweep"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuopolySpec {
    pub demand: f64,
    pub preference: f64,
    pub marginal_costs: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    /// One symmetric matrix per player.
    pub q: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<f64>>,
    #[serde(default)]
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregativeSpec {
    pub alpha: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub costs: Vec<SmoothCost>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameSpec {
    Duopoly(DuopolySpec),
    Quadratic(QuadraticSpec),
    Aggregative(AggregativeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Fixed,
    #[default]
    Integral,
    PhaseLead,
    PriceRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeceiverSpec {
    pub player: usize,
    pub targets: Vec<usize>,
    /// Signed gain `ε_i`.
    #[serde(default = "one")]
    pub gain: f64,
    #[serde(default)]
    pub jref: f64,
    #[serde(default)]
    pub policy: PolicyKind,
    /// Initial amplitude, or the constant amplitude of a fixed policy.
    #[serde(default)]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeceptionSpec {
    /// Common integrator rate `ε`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub deceivers: Vec<DeceiverSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub a: f64,
    pub k: f64,
    #[serde(default = "one")]
    pub omega: f64,
    pub omega_bar: Vec<Rational>,
    #[serde(default)]
    pub phases: Vec<f64>,
    #[serde(default)]
    pub phase_estimates: Vec<PhaseEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Initial nominal action; the Nash equilibrium when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    #[serde(default = "default_output_dt")]
    pub output_dt: f64,
    #[serde(default = "default_spp")]
    pub samples_per_period: usize,
    #[serde(default = "default_blowup")]
    pub blowup: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            t_final: default_t_final(),
            u0: None,
            output_dt: default_output_dt(),
            samples_per_period: default_spp(),
            blowup: default_blowup(),
        }
    }
}

/// One amplitude, or one per deceiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaPoint {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl DeltaPoint {
    pub fn values(&self) -> Vec<f64> {
        match self {
            DeltaPoint::Scalar(d) => vec![*d],
            DeltaPoint::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "default_box")]
    pub delta_box: [f64; 2],
    #[serde(default = "default_grid")]
    pub delta_grid: f64,
    /// Amplitudes at which the equilibrium is tabulated.
    #[serde(default)]
    pub dne_deltas: Vec<DeltaPoint>,
    /// Amplitudes at which perceived reaction curves are reported.
    #[serde(default)]
    pub reaction_deltas: Vec<f64>,
    /// Players (besides the deceiver) that should benefit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benevolence: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutual_candidate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearization: Option<Regulated>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            delta_box: default_box(),
            delta_grid: default_grid(),
            dne_deltas: vec![],
            reaction_deltas: vec![],
            benevolence: None,
            mutual_candidate: None,
            linearization: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path of the swept value, in `--set` syntax.
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl SweepSpec {
    /// Grid values; `from..=to` includes `to` when it lies on the grid.
    pub fn grid(&self) -> std::result::Result<Vec<f64>, String> {
        match (&self.values, self.from, self.to, self.step) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a), Some(b), Some(h)) if h > 0.0 && b >= a => {
                let n = ((b - a) / h + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| a + k as f64 * h).collect())
            }
            _ => Err("sweep needs either a non-empty `values` list or `from`, `to` and a positive `step`".into()),
        }
    }
}

/// The normalized content of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub game: GameSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deception: Option<DeceptionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn one() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    100.0
}
fn default_output_dt() -> f64 {
    0.1
}
fn default_spp() -> usize {
    40
}
fn default_blowup() -> f64 {
    1e6
}
fn default_box() -> [f64; 2] {
    [-100.0, 100.0]
}
fn default_grid() -> f64 {
    1e-2
}

/// The game a scenario describes.
#[derive(Debug, Clone)]
pub enum GameModel {
    Quadratic(QuadraticGame),
    Aggregative(AggregativeGame),
}

impl GameModel {
    pub fn players(&self) -> usize {
        match self {
            GameModel::Quadratic(g) => g.n(),
            GameModel::Aggregative(g) => g.n(),
        }
    }

    pub fn as_game(&self) -> Arc<dyn Game> {
        match self {
            GameModel::Quadratic(g) => Arc::new(g.clone()),
            GameModel::Aggregative(g) => Arc::new(g.clone()),
        }
    }

    /// The Nash equilibrium without deception.
    pub fn nash_equilibrium(&self) -> Result<Vec<f64>> {
        match self {
            GameModel::Quadratic(g) => Ok(g.nash_equilibrium()?.as_slice().to_vec()),
            GameModel::Aggregative(g) => {
                let n = g.n();
                let d = AggDeception { deceiver: 0, targets: vec![], lambda: DMatrix::zeros(n, n) };
                Ok(dne_agg(g, &d, 0.0, &vec![0.0; n])?.x)
            }
        }
    }
}

/// A validated scenario with 0-based indices.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub file: ScenarioFile,
    pub model: GameModel,
    pub deception: DeceptionStructure,
    pub epsilon: f64,
    pub policies: Vec<PlayerPolicy>,
    pub probe: Option<ProbeConfig>,
    pub sim: SimConfig,
    pub benevolence_members: Option<Vec<usize>>,
    pub sweep_values: Option<Vec<f64>>,
    source: Table,
}

impl Scenario {
    /// Parses and validates scenario text.
    pub fn parse(text: &str) -> Result<Scenario> {
        Scenario::parse_with(text, &[])
    }

    /// Parses `text`, applying `key=value` overrides first.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Scenario> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::Scenario(vec![e.to_string()]))?;
        let mut errors = Vec::new();
        for o in overrides {
            if let Err(e) = apply_override(&mut table, o) {
                errors.push(e);
            }
        }
        if !errors.is_empty() {
            return Err(Error::Scenario(errors));
        }
        Scenario::from_table(table)
    }

    /// Reads a file, or a bundled scenario when no such file exists.
    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Scenario> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => match path.to_str().and_then(bundled) {
                Some(t) if !path.exists() => t.to_string(),
                _ => return Err(Error::Io(format!("{}: {e}", path.display()))),
            },
        };
        let mut s = Scenario::parse_with(&text, overrides)?;
        if s.file.name.is_none() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                s.name = stem.to_string();
            }
        }
        Ok(s)
    }

    pub fn from_table(table: Table) -> Result<Scenario> {
        let mut errors = Vec::new();
        for key in table.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                errors.push(format!("unknown section or key `{key}`"));
            }
        }
        if !table.contains_key("game") {
            errors.push("missing required section [game]".into());
        }
        let name = section::<String>(&table, "name", &mut errors);
        let description = section::<String>(&table, "description", &mut errors);
        let game = section::<GameSpec>(&table, "game", &mut errors);
        let deception = section::<DeceptionSpec>(&table, "deception", &mut errors);
        let probe = section::<ProbeSpec>(&table, "probe", &mut errors);
        let sim = section::<SimSpec>(&table, "sim", &mut errors);
        let analysis = section::<AnalysisSpec>(&table, "analysis", &mut errors);
        let sweep = section::<SweepSpec>(&table, "sweep", &mut errors);
        if !errors.is_empty() {
            return Err(Error::Scenario(errors));
        }
        let file = ScenarioFile {
            name,
            description,
            game: game.expect("checked above"),
            deception,
            probe,
            sim: sim.unwrap_or_default(),
            analysis: analysis.unwrap_or_default(),
            sweep,
        };
        build(file, table)
    }

    /// Normalized TOML text; parsing it gives back the same scenario.
    pub fn to_text(&self) -> String {
        toml::to_string(&self.file).expect("scenario serializes")
    }

    pub fn quadratic(&self) -> Option<&QuadraticGame> {
        match &self.model {
            GameModel::Quadratic(g) => Some(g),
            GameModel::Aggregative(_) => None,
        }
    }

    pub fn aggregative(&self) -> Option<&AggregativeGame> {
        match &self.model {
            GameModel::Aggregative(g) => Some(g),
            GameModel::Quadratic(_) => None,
        }
    }

    pub fn scan_options(&self) -> ScanOptions {
        let a = &self.file.analysis;
        ScanOptions { lo: a.delta_box[0], hi: a.delta_box[1], grid: a.delta_grid, ..ScanOptions::default() }
    }

    /// `ε ε_i` for deceiver position `m`.
    pub fn effective_epsilon(&self, m: usize) -> f64 {
        self.epsilon * self.deception.deceivers()[m].gain
    }

    /// Simulation set up from `[probe]` and `[sim]`.
    pub fn simulation(&self) -> Result<Simulation> {
        let probe = self
            .probe
            .clone()
            .ok_or_else(|| Error::Scenario(vec!["simulation needs a [probe] section".into()]))?;
        Simulation::new(self.model.as_game(), probe, self.policies.clone(), self.sim.clone())
    }

    /// Copy of the scenario with one more override applied.
    pub fn with_override(&self, assignment: &str) -> Result<Scenario> {
        let mut t = self.source.clone();
        apply_override(&mut t, assignment).map_err(|e| Error::Scenario(vec![e]))?;
        let mut s = Scenario::from_table(t)?;
        if self.file.name.is_none() {
            s.name = self.name.clone();
        }
        Ok(s)
    }
}

fn section<T: DeserializeOwned>(table: &Table, key: &str, errors: &mut Vec<String>) -> Option<T> {
    let v = table.get(key)?;
    match v.clone().try_into::<T>() {
        Ok(x) => Some(x),
        Err(e) => {
            errors.push(format!("[{key}] {}", e.to_string().trim()));
            None
        }
    }
}

fn player_index(p: usize, n: usize, what: &str, errors: &mut Vec<String>) -> Option<usize> {
    if p == 0 || p > n {
        errors.push(format!("{what}: player {p} does not exist in a {n}-player game (players are numbered from 1)"));
        None
    } else {
        Some(p - 1)
    }
}

fn build_game(spec: &GameSpec) -> std::result::Result<GameModel, String> {
    let r = match spec {
        GameSpec::Duopoly(d) => QuadraticGame::duopoly(d.demand, d.preference, d.marginal_costs).map(GameModel::Quadratic),
        GameSpec::Quadratic(q) => {
            let p = if q.p.is_empty() { vec![0.0; q.q.len()] } else { q.p.clone() };
            QuadraticGame::from_rows(&q.q, &q.b, &p).map(GameModel::Quadratic)
        }
        GameSpec::Aggregative(a) => {
            let n = a.costs.len();
            if a.alpha.len() != n || a.alpha.iter().any(|r| r.len() != n) {
                return Err(format!("[game] alpha must be a {n}x{n} matrix"));
            }
            let alpha = DMatrix::from_fn(n, n, |i, j| a.alpha[i][j]);
            let costs: Vec<Arc<dyn ScalarCost>> =
                a.costs.iter().map(|c| Arc::new(c.clone()) as Arc<dyn ScalarCost>).collect();
            AggregativeGame::new(costs, a.kappa.clone(), alpha).map(GameModel::Aggregative)
        }
    };
    r.map_err(|e| format!("[game] {e}"))
}

fn build(file: ScenarioFile, source: Table) -> Result<Scenario> {
    let mut errors = Vec::new();
    let model = match build_game(&file.game) {
        Ok(m) => m,
        Err(e) => return Err(Error::Scenario(vec![e])),
    };
    let n = model.players();

    let dspec = file.deception.clone().unwrap_or(DeceptionSpec { epsilon: default_epsilon(), deceivers: vec![] });
    if !dspec.epsilon.is_finite() || dspec.epsilon == 0.0 {
        errors.push("[deception] epsilon must be finite and nonzero".into());
    }
    let mut deceivers = Vec::new();
    let mut policies = vec![PlayerPolicy::Oblivious; n];
    let mut link_set = BTreeSet::new();
    for (pos, d) in dspec.deceivers.iter().enumerate() {
        let what = format!("[deception] deceiver {}", pos + 1);
        let Some(p) = player_index(d.player, n, &what, &mut errors) else { continue };
        let targets: Vec<usize> =
            d.targets.iter().filter_map(|&t| player_index(t, n, &what, &mut errors)).collect();
        if targets.len() != d.targets.len() {
            continue;
        }
        for &t in &targets {
            link_set.insert((p, t));
        }
        let eps = dspec.epsilon;
        let policy = match d.policy {
            PolicyKind::Fixed => Some(DeltaPolicy::Fixed { delta: d.delta }),
            PolicyKind::Integral => Some(DeltaPolicy::Integral { epsilon: eps, gain: d.gain, jref: d.jref }),
            PolicyKind::PhaseLead => match (d.g1, d.g2) {
                (Some(g1), Some(g2)) if g1 > 0.0 && g2 >= g1 => {
                    Some(DeltaPolicy::PhaseLead { epsilon: eps, gain: d.gain, jref: d.jref, g1, g2 })
                }
                (Some(_), Some(_)) => {
                    errors.push(format!("{what}: phase_lead needs g2 >= g1 > 0"));
                    None
                }
                _ => {
                    errors.push(format!("{what}: phase_lead needs g1 and g2"));
                    None
                }
            },
            PolicyKind::PriceRef => match d.uref {
                Some(uref) => Some(DeltaPolicy::PriceRef { epsilon: eps * d.gain, uref }),
                None => {
                    errors.push(format!("{what}: price_ref needs uref"));
                    None
                }
            },
        };
        if d.policy != PolicyKind::PhaseLead && (d.g1.is_some() || d.g2.is_some()) {
            errors.push(format!("{what}: g1 and g2 only apply to phase_lead"));
        }
        if d.policy != PolicyKind::PriceRef && d.uref.is_some() {
            errors.push(format!("{what}: uref only applies to price_ref"));
        }
        if let Some(policy) = policy {
            if matches!(policies[p], PlayerPolicy::Deceptive { .. }) {
                errors.push(format!("{what}: player {} is listed twice", d.player));
            }
            policies[p] = PlayerPolicy::Deceptive { targets: targets.clone(), policy, delta0: d.delta };
        }
        deceivers.push(Deceiver { player: p, targets, gain: d.gain, jref: d.jref });
    }
    let deception = match DeceptionStructure::new(deceivers, n) {
        Ok(ds) => Some(ds),
        Err(e) => {
            errors.push(format!("[deception] {e}"));
            None
        }
    };

    let probe = file.probe.as_ref().and_then(|p| {
        let mut ok = true;
        if p.omega_bar.len() != n {
            errors.push(format!("[probe] omega_bar has {} entries for {n} players", p.omega_bar.len()));
            ok = false;
        }
        if !p.phases.is_empty() && p.phases.len() != n {
            errors.push(format!("[probe] phases has {} entries for {n} players", p.phases.len()));
            ok = false;
        }
        let mut estimates = Vec::new();
        for e in &p.phase_estimates {
            let d = player_index(e.deceiver, n, "[probe] phase estimate", &mut errors);
            let t = player_index(e.target, n, "[probe] phase estimate", &mut errors);
            match (d, t) {
                (Some(d), Some(t)) if link_set.contains(&(d, t)) => {
                    estimates.push(PhaseEstimate { deceiver: d, target: t, phase: e.phase })
                }
                (Some(_), Some(_)) => {
                    errors.push(format!(
                        "[probe] phase estimate for {} -> {} but player {} does not deceive player {}",
                        e.deceiver, e.target, e.deceiver, e.target
                    ));
                    ok = false;
                }
                _ => ok = false,
            }
        }
        if !ok {
            return None;
        }
        let cfg = ProbeConfig {
            a: p.a,
            k: p.k,
            omega: p.omega,
            omega_bar: p.omega_bar.clone(),
            phases: if p.phases.is_empty() { vec![0.0; n] } else { p.phases.clone() },
            phase_estimates: estimates,
        };
        match cfg.validate() {
            Ok(()) => Some(cfg),
            Err(e) => {
                errors.push(format!("[probe] {e}"));
                None
            }
        }
    });

    let s = &file.sim;
    if !(s.t_final > 0.0) || !(s.output_dt > 0.0) || s.samples_per_period == 0 || !(s.blowup > 0.0) {
        errors.push("[sim] t_final, output_dt, samples_per_period and blowup must be positive".into());
    }
    let u0 = match &s.u0 {
        Some(u) if u.len() != n => {
            errors.push(format!("[sim] u0 has {} entries for {n} players", u.len()));
            vec![0.0; n]
        }
        Some(u) => u.clone(),
        None => model.nash_equilibrium().unwrap_or_else(|e| {
            errors.push(format!("[sim] no u0 given and the Nash equilibrium is unavailable: {e}"));
            vec![0.0; n]
        }),
    };
    let sim = SimConfig {
        t_final: s.t_final,
        u0,
        output_dt: s.output_dt,
        samples_per_period: s.samples_per_period,
        blowup: s.blowup,
    };

    let a = &file.analysis;
    let m = dspec.deceivers.len();
    if !(a.delta_box[0] < a.delta_box[1]) || !(a.delta_grid > 0.0) {
        errors.push("[analysis] delta_box must be increasing and delta_grid positive".into());
    }
    for d in &a.dne_deltas {
        if d.values().len() != m {
            errors.push(format!("[analysis] dne_deltas entry {:?} needs {m} amplitude(s)", d.values()));
        }
    }
    if let Some(c) = &a.mutual_candidate {
        if c.len() != m {
            errors.push(format!("[analysis] mutual_candidate needs {m} amplitude(s)"));
        }
    }
    let benevolence_members = a
        .benevolence
        .as_ref()
        .map(|v| v.iter().filter_map(|&p| player_index(p, n, "[analysis] benevolence", &mut errors)).collect());

    let sweep_values = match &file.sweep {
        Some(sw) => match sw.grid() {
            Ok(v) => {
                let mut probe = source.clone();
                if let Err(e) = apply_override(&mut probe, &format!("{}={}", sw.parameter, v[0])) {
                    errors.push(format!("[sweep] {e}"));
                }
                Some(v)
            }
            Err(e) => {
                errors.push(format!("[sweep] {e}"));
                None
            }
        },
        None => None,
    };

    if !errors.is_empty() {
        return Err(Error::Scenario(errors));
    }
    Ok(Scenario {
        name: file.name.clone().unwrap_or_else(|| "scenario".into()),
        model,
        deception: deception.expect("no errors"),
        epsilon: dspec.epsilon,
        policies,
        probe,
        sim,
        benevolence_members,
        sweep_values,
        file,
        source,
    })
}

/// Applies `path=value` to a TOML table. The value is read as TOML, falling
/// back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> std::result::Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let path = path.trim();
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override path `{path}` is malformed"));
    }
    let (first, rest) = parts.split_first().expect("split yields one part");
    set_in_table(table, first, rest, parse_value(raw.trim()), path)
}

fn set_in_table(t: &mut Table, key: &str, rest: &[&str], value: Value, path: &str) -> std::result::Result<(), String> {
    match rest.split_first() {
        None => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        Some((next, tail)) => {
            let child = t.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new()));
            set_in_value(child, next, tail, value, path)
        }
    }
}

fn set_in_value(v: &mut Value, key: &str, rest: &[&str], value: Value, path: &str) -> std::result::Result<(), String> {
    match v {
        Value::Table(t) => set_in_table(t, key, rest, value, path),
        Value::Array(a) => {
            let idx: usize =
                key.parse().map_err(|_| format!("override path `{path}`: `{key}` is not an array position"))?;
            if idx == 0 || idx > a.len() {
                return Err(format!("override path `{path}`: position {idx} is outside 1..={}", a.len()));
            }
            match rest.split_first() {
                None => {
                    a[idx - 1] = value;
                    Ok(())
                }
                Some((next, tail)) => set_in_value(&mut a[idx - 1], next, tail, value, path),
            }
        }
        _ => Err(format!("override path `{path}`: `{key}` is inside a plain value")),
    }
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}
