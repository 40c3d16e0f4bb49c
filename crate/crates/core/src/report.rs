//! Analysis reports.
//!
//! [`analyze`] runs every analysis that applies to a scenario and collects the
//! results in a [`Report`], serialized as TOML. Players are numbered from 1.
//! Sections that do not apply are skipped with a note; a requested analysis
//! that fails is recorded under `errors` and sets `error_code`.

use serde::Serialize;

use crate::aggregative::{self, AggDeception, Direction};
use crate::deception::{
    self, benevolence, build_deceptive_matrices, delta_interval, immunity_check, mutual_attainability, omega_set,
    perceived_reaction_curve, rc_classify, sdso_analyze, solve_delta_for_ref, DeceptiveMatrices, MutualReport,
    ReactionCurveChange, SdsoAnalysis,
};
use crate::error::{Error, Result};
use crate::game::{AggregativeGame, Game, QuadraticGame};
use crate::interval::IntervalSet;
use crate::scenario::{PolicyKind, Scenario};
use crate::stability::{self, Regulated};

/// An interval set with its rendering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetReport {
    pub text: String,
    pub intervals: Vec<[f64; 2]>,
}

impl From<&IntervalSet> for SetReport {
    fn from(s: &IntervalSet) -> Self {
        SetReport { text: s.to_string(), intervals: s.intervals().iter().map(|&(a, b)| [a, b]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameReport {
    pub kind: String,
    pub players: usize,
    pub nash_equilibrium: Vec<f64>,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub delta: Vec<f64>,
    pub x: Vec<f64>,
    pub costs: Vec<f64>,
}

/// Closed-form single-deceiver, single-target analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdsoReport {
    pub target: usize,
    pub phi: Vec<f64>,
    /// `[q1, q2, q3]` of `f(δ) = q1 δ / (q2 δ + q3)`.
    pub q: [f64; 3],
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub displacement_image: SetReport,
    pub stable_half_line: SetReport,
    pub omega: SetReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeceiverReport {
    pub player: usize,
    pub targets: Vec<usize>,
    pub gain: f64,
    pub jref: f64,
    /// `ε ε_i`.
    pub epsilon: f64,
    /// Slice of `Δ` along this deceiver's amplitude, others at zero.
    pub delta_set: SetReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdso: Option<SdsoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<EquilibriumReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImmunityReport {
    pub player: usize,
    pub deceivers: Vec<usize>,
    pub immune: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveChangeReport {
    pub player: usize,
    pub deceiver: usize,
    #[serde(flatten)]
    pub change: ReactionCurveChange,
}

/// The perceived reaction curve `normal · x + offset = 0` of `player`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReactionCurveReport {
    pub player: usize,
    /// Zero for the undeceived curve.
    pub deceiver: usize,
    pub delta: f64,
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenevolenceReport {
    pub members: Vec<usize>,
    pub exists: bool,
    pub window: SetReport,
    pub deltas: SetReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationReport {
    pub regulated: Regulated,
    pub delta: f64,
    pub x: Vec<f64>,
    pub epsilon: f64,
    pub matrix: Vec<Vec<f64>>,
    pub charpoly: Vec<f64>,
    pub a1: f64,
    pub a0: f64,
    pub a1_star: f64,
    pub a0_star: f64,
    pub epsilon_star: f64,
    pub epsilon_star_bounded: bool,
    pub routh_hurwitz: bool,
    pub hurwitz: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregativeReport {
    pub deceiver: usize,
    pub targets: Vec<usize>,
    pub delta_bounds: SetReport,
    pub benefit_holds: bool,
    pub benefit_value: f64,
    pub g_prime: Vec<f64>,
    pub direction: Direction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning_hint: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<EquilibriumReport>,
}

/// Everything `dnes analyze` writes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_code: Option<String>,
    pub errors: Vec<String>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<GameReport>,
    pub deceivers: Vec<DeceiverReport>,
    pub dne: Vec<EquilibriumReport>,
    pub immunity: Vec<ImmunityReport>,
    pub curve_changes: Vec<CurveChangeReport>,
    pub reaction_curves: Vec<ReactionCurveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benevolence: Option<BenevolenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutual: Option<MutualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearization: Option<LinearizationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregative: Option<AggregativeReport>,
    #[serde(skip)]
    first_error: Option<Error>,
}

impl Report {
    fn new(name: &str) -> Self {
        Report {
            scenario: name.to_string(),
            status: "ok".into(),
            error_code: None,
            errors: vec![],
            notes: vec![],
            game: None,
            deceivers: vec![],
            dne: vec![],
            immunity: vec![],
            curve_changes: vec![],
            reaction_curves: vec![],
            benevolence: None,
            mutual: None,
            linearization: None,
            aggregative: None,
            first_error: None,
        }
    }

    fn fail(&mut self, what: &str, e: Error) {
        self.errors.push(format!("{what}: {e}"));
        if self.first_error.is_none() {
            self.status = "error".into();
            self.error_code = Some(e.code().into());
            self.first_error = Some(e);
        }
    }

    /// The first error recorded, if any.
    pub fn error(&self) -> Option<&Error> {
        self.first_error.as_ref()
    }

    /// Process exit code for this report.
    pub fn exit_code(&self) -> i32 {
        self.first_error.as_ref().map_or(0, Error::exit_code)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn equilibrium(game: &dyn Game, delta: Vec<f64>, x: Vec<f64>) -> EquilibriumReport {
    let costs = (0..game.players()).map(|i| game.cost_at(i, &x)).collect();
    EquilibriumReport { delta, x, costs }
}

/// Runs all applicable analyses.
pub fn analyze(scn: &Scenario) -> Report {
    let mut rep = Report::new(&scn.name);
    match (scn.quadratic(), scn.aggregative()) {
        (Some(g), _) => analyze_quadratic(scn, g, &mut rep),
        (_, Some(g)) => analyze_aggregative(scn, g, &mut rep),
        _ => unreachable!("a scenario holds one game"),
    }
    rep
}

fn analyze_quadratic(scn: &Scenario, g: &QuadraticGame, rep: &mut Report) {
    let kind = match scn.file.game {
        crate::scenario::GameSpec::Duopoly(_) => "duopoly",
        _ => "quadratic",
    };
    let ne = match g.nash_equilibrium() {
        Ok(x) => x.as_slice().to_vec(),
        Err(e) => return rep.fail("Nash equilibrium", e),
    };
    let costs = (0..g.n()).map(|i| g.cost_at(i, &ne)).collect();
    rep.game = Some(GameReport { kind: kind.into(), players: g.n(), nash_equilibrium: ne.clone(), costs });
    let ds = &scn.deception;
    if ds.is_empty() {
        rep.notes.push("no deceivers: only the Nash equilibrium is reported".into());
        push_reaction_curves(scn, g, rep, &[]);
        return;
    }
    let mats = match build_deceptive_matrices(g, ds) {
        Ok(m) => m,
        Err(e) => return rep.fail("deceptive matrices", e),
    };
    let m = ds.len();
    let single = m == 1 && ds.deceivers()[0].targets.len() == 1;
    let mut sdso: Option<(SdsoAnalysis, IntervalSet, f64)> = None;
    let mut delta_stars = vec![];

    for (pos, d) in ds.deceivers().iter().enumerate() {
        let eps = scn.effective_epsilon(pos);
        let slice = match delta_interval(g, &mats, pos, &vec![0.0; m], scn.scan_options()) {
            Ok(s) => s,
            Err(e) => {
                rep.fail(&format!("delta set of player {}", d.player + 1), e);
                continue;
            }
        };
        let slice = match single.then(|| sdso_analyze(g, d.player, d.targets[0])) {
            Some(Ok(s)) => s.snap_to_pole(&slice, 100.0 * scn.scan_options().tol),
            _ => slice,
        };
        let mut dr = DeceiverReport {
            player: d.player + 1,
            targets: one_based(&d.targets),
            gain: d.gain,
            jref: d.jref,
            epsilon: eps,
            delta_set: (&slice).into(),
            sdso: None,
            reference: None,
        };
        if single {
            match sdso_report(g, d.player, d.targets[0], eps, &slice) {
                Ok((s, r)) => {
                    dr.sdso = Some(r);
                    let tracks_payoff = matches!(
                        scn.file.deception.as_ref().map(|x| x.deceivers[0].policy),
                        Some(PolicyKind::Integral | PolicyKind::PhaseLead)
                    );
                    if tracks_payoff {
                        match solve_delta_for_ref(&s, d.jref, eps, &slice) {
                            Ok(dstar) => {
                                dr.reference = Some(equilibrium(g, vec![dstar], s.dne(dstar)));
                                delta_stars.push(dstar);
                            }
                            Err(e) => rep.fail(&format!("reference of player {}", d.player + 1), e),
                        }
                    }
                    sdso = Some((s, slice, eps));
                }
                Err(e) => rep.notes.push(format!("closed-form analysis unavailable: {e}")),
            }
        }
        rep.deceivers.push(dr);
    }
    if m > 1 {
        rep.notes.push("several deceivers: the closed-form attainable set is not computed".into());
    }

    for p in &scn.file.analysis.dne_deltas {
        let delta = p.values();
        match deception::dne(g, &mats, &delta) {
            Ok(x) => rep.dne.push(equilibrium(g, delta, x.as_slice().to_vec())),
            Err(e) => rep.fail(&format!("equilibrium at {delta:?}"), e),
        }
    }

    for i in 0..g.n() {
        if !ds.is_oblivious(i) {
            continue;
        }
        let decs: Vec<usize> = ds.deceivers_of(i).iter().map(|&pos| ds.deceivers()[pos].player).collect();
        if decs.is_empty() {
            continue;
        }
        match immunity_check(g, i, &decs) {
            Ok(immune) => rep.immunity.push(ImmunityReport { player: i + 1, deceivers: one_based(&decs), immune }),
            Err(e) => rep.notes.push(format!("immunity of player {}: {e}", i + 1)),
        }
        for &j in &decs {
            match rc_classify(g, i, j) {
                Ok(change) => rep.curve_changes.push(CurveChangeReport { player: i + 1, deceiver: j + 1, change }),
                Err(e) => rep.notes.push(format!("reaction curve of player {}: {e}", i + 1)),
            }
        }
    }
    push_reaction_curves(scn, g, rep, &delta_stars);
    rep.notes.push(
        "outside the stability set the perceived reaction curves may meet in several critical points; \
         which one the dynamics select is not characterized"
            .into(),
    );

    if let Some(members) = &scn.benevolence_members {
        match &sdso {
            Some((s, slice, eps)) => match benevolence(s, *eps, members, slice) {
                Ok(b) => {
                    rep.benevolence = Some(BenevolenceReport {
                        members: one_based(members),
                        exists: b.exists,
                        window: (&b.window).into(),
                        deltas: (&b.deltas).into(),
                    })
                }
                Err(e) => rep.fail("benevolence", e),
            },
            None => rep.fail(
                "benevolence",
                Error::Precondition("needs exactly one deceiver with one target".into()),
            ),
        }
    }

    if let Some(c) = &scn.file.analysis.mutual_candidate {
        match mutual_attainability(g, ds, c) {
            Ok(r) => rep.mutual = Some(r),
            Err(e) => rep.fail("mutual deception", e),
        }
    }

    if let Some(reg) = scn.file.analysis.linearization {
        match linearize(scn, g, &mats, sdso.as_ref().map(|s| &s.0), &delta_stars, reg) {
            Ok(l) => rep.linearization = Some(l),
            Err(e) => rep.fail("linearization", e),
        }
    }
}

fn sdso_report(
    g: &QuadraticGame,
    dec: usize,
    target: usize,
    eps: f64,
    slice: &IntervalSet,
) -> Result<(SdsoAnalysis, SdsoReport)> {
    let s = sdso_analyze(g, dec, target)?;
    let half = s.stable_half_line(eps)?;
    let omega = omega_set(&s, eps, slice)?;
    let r = SdsoReport {
        target: target + 1,
        phi: s.phi.clone(),
        q: [s.q1, s.q2, s.q3],
        r1: s.r1.clone(),
        r2: s.r2.clone(),
        displacement_image: (&s.image_of(slice)).into(),
        stable_half_line: (&half).into(),
        omega: (&omega).into(),
    };
    Ok((s, r))
}

fn push_reaction_curves(scn: &Scenario, g: &QuadraticGame, rep: &mut Report, delta_stars: &[f64]) {
    let ds = &scn.deception;
    for i in 0..g.n() {
        let line = perceived_reaction_curve(g, i, i, 0.0);
        rep.reaction_curves.push(ReactionCurveReport {
            player: i + 1,
            deceiver: 0,
            delta: 0.0,
            normal: line.normal,
            offset: line.offset,
        });
    }
    let mut deltas = scn.file.analysis.reaction_deltas.clone();
    if deltas.is_empty() {
        deltas.extend_from_slice(delta_stars);
    }
    for d in ds.deceivers() {
        for &t in &d.targets {
            for &delta in &deltas {
                let line = perceived_reaction_curve(g, t, d.player, delta);
                rep.reaction_curves.push(ReactionCurveReport {
                    player: t + 1,
                    deceiver: d.player + 1,
                    delta,
                    normal: line.normal,
                    offset: line.offset,
                });
            }
        }
    }
}

fn linearize(
    scn: &Scenario,
    g: &QuadraticGame,
    mats: &DeceptiveMatrices,
    sdso: Option<&SdsoAnalysis>,
    delta_stars: &[f64],
    reg: Regulated,
) -> Result<LinearizationReport> {
    let ds = &scn.deception;
    let spec = scn
        .file
        .deception
        .as_ref()
        .and_then(|d| d.deceivers.first())
        .ok_or_else(|| Error::Precondition("linearization needs a deceiver".into()))?;
    let (delta, eps) = match reg {
        Regulated::Payoff => {
            let d = *delta_stars
                .first()
                .ok_or_else(|| Error::Precondition("payoff linearization needs an attainable reference".into()))?;
            (d, scn.effective_epsilon(0))
        }
        Regulated::Price => {
            let uref = spec
                .uref
                .ok_or_else(|| Error::Precondition("price linearization needs a price_ref deceiver".into()))?;
            let s = sdso.ok_or_else(|| Error::Precondition("needs one deceiver with one target".into()))?;
            let p = ds.deceivers()[0].player;
            if s.phi[p] == 0.0 {
                return Err(Error::Degenerate("the deceiver's price does not move with delta".into()));
            }
            let e = (uref - s.xstar[p]) / s.phi[p];
            let d = s.f_inverse(e).ok_or(Error::NotAttainable { jref: uref })?;
            (d, scn.effective_epsilon(0))
        }
    };
    let x = deception::dne(g, mats, &[delta])?;
    let j = stability::build_jacobian(g, ds, delta, x.as_slice(), eps, reg)?;
    let es = stability::epsilon_star(&j.parts)?;
    let c = &j.charpoly;
    Ok(LinearizationReport {
        regulated: reg,
        delta,
        x: x.as_slice().to_vec(),
        epsilon: eps,
        matrix: rows(&j.a),
        charpoly: c.clone(),
        a1: j.parts.a1,
        a0: j.parts.a0,
        a1_star: j.parts.a1_star,
        a0_star: j.parts.a0_star,
        epsilon_star: es.value,
        epsilon_star_bounded: es.bounded,
        routh_hurwitz: c.len() == 4 && stability::routh_hurwitz_3(c[1], c[2], c[3]),
        hurwitz: crate::linalg::is_hurwitz(&j.a, 0.0)?,
    })
}

fn analyze_aggregative(scn: &Scenario, g: &AggregativeGame, rep: &mut Report) {
    let ne = match scn.model.nash_equilibrium() {
        Ok(x) => x,
        Err(e) => return rep.fail("Nash equilibrium", e),
    };
    let costs = (0..g.n()).map(|i| g.cost_at(i, &ne)).collect();
    rep.game = Some(GameReport { kind: "aggregative".into(), players: g.n(), nash_equilibrium: ne.clone(), costs });
    let ds = &scn.deception;
    if ds.is_empty() {
        rep.notes.push("no deceivers: only the Nash equilibrium is reported".into());
        return;
    }
    if ds.len() > 1 {
        rep.fail(
            "aggregative analysis",
            Error::Precondition("aggregative analysis handles a single deceiver".into()),
        );
        return;
    }
    let d = &ds.deceivers()[0];
    let dec = match AggDeception::new(g, d.player, d.targets.clone()) {
        Ok(x) => x,
        Err(e) => return rep.fail("aggregative deception", e),
    };
    let bounds = match aggregative::delta_bounds(g, &dec) {
        Ok(b) => b,
        Err(e) => return rep.fail("delta bounds", e),
    };
    let eps = scn.effective_epsilon(0);
    let benefit = match aggregative::benefit_condition(g, &dec, eps) {
        Ok(b) => b,
        Err(e) => return rep.fail("benefit condition", e),
    };
    if let Some(n) = &benefit.note {
        rep.notes.push(n.clone());
    }
    let tuning_hint = if g.n() == 2 {
        match aggregative::monotone_tuning_hint(g, &dec) {
            Ok(h) => Some(h),
            Err(e) => {
                rep.notes.push(format!("tuning hint: {e}"));
                None
            }
        }
    } else {
        None
    };
    let tracks_payoff = matches!(
        scn.file.deception.as_ref().map(|x| x.deceivers[0].policy),
        Some(PolicyKind::Integral | PolicyKind::PhaseLead)
    );
    let mut reference = None;
    if tracks_payoff {
        let opts = scn.scan_options();
        let reach = opts.lo.abs().max(opts.hi.abs());
        match aggregative::delta_for_ref(g, &dec, d.jref, &bounds, reach, opts.grid) {
            Ok(s) => reference = Some(equilibrium(g, vec![s.delta], s.x)),
            Err(e) => rep.fail(&format!("reference of player {}", d.player + 1), e),
        }
    }
    for p in &scn.file.analysis.dne_deltas {
        let delta = p.values();
        match aggregative::dne_agg(g, &dec, delta[0], &ne) {
            Ok(s) => {
                if !s.certified {
                    rep.notes.push(format!(
                        "equilibrium at delta = {} lies outside the certified interval",
                        delta[0]
                    ));
                }
                rep.dne.push(equilibrium(g, delta, s.x))
            }
            Err(e) => rep.fail(&format!("equilibrium at {delta:?}"), e),
        }
    }
    rep.deceivers.push(DeceiverReport {
        player: d.player + 1,
        targets: one_based(&d.targets),
        gain: d.gain,
        jref: d.jref,
        epsilon: eps,
        delta_set: (&bounds).into(),
        sdso: None,
        reference: reference.clone(),
    });
    rep.aggregative = Some(AggregativeReport {
        deceiver: d.player + 1,
        targets: one_based(&d.targets),
        delta_bounds: (&bounds).into(),
        benefit_holds: benefit.holds,
        benefit_value: benefit.value,
        g_prime: benefit.g_prime,
        direction: benefit.direction,
        tuning_hint,
        reference,
    });
}
