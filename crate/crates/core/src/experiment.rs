//! Running scenarios and sweeps, and writing their artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{marginal_of_proposition, simulate, BeliefState, Learnability, LearnabilityProbe, UpdateMode};
use crate::error::{Error, Result};
use crate::game::{play, win_eval, GameOutcome, Status};
use crate::generator::build_stream;
use crate::lattice::hierarchical_step;
use crate::literal::Literal;
use crate::propositions::{self as props, Check};
use crate::scenario::{Assertion, Experiment, Quantity, Scenario};
use crate::schedule::LikelihoodSchedule;
use crate::stream::{entails, TestimonyStream};

pub const MAX_GRID_POINTS: usize = 10_000;
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits, trimming trailing zeros.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        return format!("{mantissa}e{e}");
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Hypothesis,
    Stream,
    Literal,
}

impl EntityKind {
    fn as_str(self) -> &'static str {
        match self {
            EntityKind::Hypothesis => "hypothesis",
            EntityKind::Stream => "stream",
            EntityKind::Literal => "literal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: usize,
    pub status: Status,
    pub rounds: usize,
    pub verdict: String,
    pub final_marginals: BTreeMap<String, f64>,
    pub transcript_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub variants: Vec<VariantSummary>,
    pub accepted: usize,
    pub exhausted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub mode: UpdateMode,
    pub steps: usize,
    pub final_probs: BTreeMap<String, f64>,
    pub final_marginals: BTreeMap<String, f64>,
    pub convergence_steps: BTreeMap<String, Option<usize>>,
    pub game_outcome: Option<GameSummary>,
    pub assertions: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub trace: Vec<TraceRow>,
    pub summary: Summary,
}

/// What assertions are evaluated against.
enum Evidence<'a> {
    Beliefs(&'a BeliefState),
    Games(&'a [GameOutcome]),
    Nothing,
}

fn observe(evidence: &Evidence, a: &Assertion) -> Vec<Option<f64>> {
    let at = |hist_len: usize| a.stage.map(|s| s - 1).filter(|&i| i < hist_len);
    match evidence {
        Evidence::Beliefs(b) => {
            let snap = match a.stage {
                Some(_) => at(b.history.len()).map(|i| (&b.history[i].hypothesis_probs, &b.history[i].stream_marginals)),
                None => Some((&b.hypothesis_probs, &b.stream_marginals)),
            };
            vec![snap.and_then(|(probs, marg)| match &a.quantity {
                Quantity::Marginal(s) => marg.get(s).copied(),
                Quantity::Probability(h) => probs.get(h).copied(),
                _ => None,
            })]
        }
        Evidence::Games(outcomes) => outcomes
            .iter()
            .map(|o| match (&a.quantity, a.stage) {
                (Quantity::Marginal(s), Some(_)) => at(o.marginal_history.len()).and_then(|i| o.marginal_history[i].get(s).copied()),
                (Quantity::Marginal(s), None) => o.final_marginals.get(s).copied(),
                (Quantity::Probability(h), None) => o.final_beliefs.get(h).copied(),
                (Quantity::Accepted, _) => Some(if o.accepted() { 1.0 } else { 0.0 }),
                (Quantity::Rounds, _) => Some(o.rounds as f64),
                (Quantity::PostGameFloor(s), _) => Some(props::post_game_floor(o, s)),
                _ => None,
            })
            .collect(),
        Evidence::Nothing => vec![None],
    }
}

fn evaluate(assertions: &[Assertion], evidence: &Evidence, default_tol: f64) -> Vec<Check> {
    assertions
        .iter()
        .map(|a| {
            let values = observe(evidence, a);
            let passed = !values.is_empty() && values.iter().all(|v| v.is_some_and(|v| a.holds(v, default_tol)));
            let shown: Vec<String> = values.iter().map(|v| v.map(fmt12).unwrap_or_else(|| "n/a".into())).collect();
            let mut detail = format!("observed {}", shown.join(", "));
            if let Some(n) = &a.note {
                detail.push_str(&format!(" ({n})"));
            }
            Check::new(a.describe(), passed, detail)
        })
        .collect()
}

fn belief_rows(state: &BeliefState, trace: &mut Vec<TraceRow>) {
    for snap in &state.history {
        for (id, v) in &snap.hypothesis_probs {
            trace.push(TraceRow { step: snap.step, entity_kind: EntityKind::Hypothesis, entity_id: id.clone(), value: *v });
        }
        for (id, v) in &snap.stream_marginals {
            trace.push(TraceRow { step: snap.step, entity_kind: EntityKind::Stream, entity_id: id.clone(), value: *v });
        }
    }
}

fn convergence(state: &BeliefState, eps: f64) -> BTreeMap<String, Option<usize>> {
    state
        .hypothesis_probs
        .keys()
        .map(|id| (id.clone(), state.history.iter().find(|s| s.hypothesis_probs[id] >= 1.0 - eps).map(|s| s.step)))
        .collect()
}

fn stream_of(scenario: &Scenario, id: &str, length: usize) -> Result<TestimonyStream> {
    let mut spec = scenario.stream(id).cloned().ok_or_else(|| Error::Unknown { kind: "stream", id: id.into() })?;
    if spec.alphabet.is_empty() {
        spec.alphabet = scenario.alphabet.clone();
    }
    build_stream(&spec, length)
}

/// Updates the scenario's learner on `observe` for `steps` steps, tracking `track`.
pub fn trajectory(scenario: &Scenario, observe: &str, track: &[String], steps: usize) -> Result<BeliefState> {
    let t = stream_of(scenario, observe, 1)?;
    let lattice = scenario.lattice()?;
    let track = if track.is_empty() { scenario.stream_ids() } else { track.to_vec() };
    if lattice.depth() == 1 {
        let state = BeliefState::new(lattice.first_order(), &scenario.priors, &track, scenario.mode)?;
        return simulate(&state, lattice.first_order(), &t, steps);
    }
    let mut l = lattice;
    let mut b = l.belief_state(&track, scenario.mode);
    for _ in 0..steps {
        (l, b) = hierarchical_step(&l, b, &t, &[observe.to_string()])?;
    }
    Ok(b)
}

/// Final marginals of every alphabet literal some stream asserts.
fn literal_rows(scenario: &Scenario, state: &BeliefState, trace: &mut Vec<TraceRow>, notes: &mut Vec<String>) -> Result<()> {
    let streams: Vec<TestimonyStream> = scenario.streams.iter().map(|s| stream_of(scenario, &s.id, 1)).collect::<Result<_>>()?;
    let lattice = scenario.lattice()?;
    let mut seen = std::collections::BTreeSet::new();
    for s in &streams {
        for lit in s.last_stage() {
            if !seen.insert(lit.clone()) || streams.iter().filter(|x| entails(x, lit, 1).unwrap_or(false)).count() == 0 {
                continue;
            }
            match marginal_of_proposition(state, lattice.first_order(), lit, &streams) {
                Ok(v) => trace.push(TraceRow { step: state.step, entity_kind: EntityKind::Literal, entity_id: lit.to_string(), value: v }),
                Err(e) => notes.push(format!("no marginal for `{lit}`: {e}")),
            }
        }
    }
    Ok(())
}

pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let steps = scenario.steps();
    let tol = scenario.tolerances;
    let mut trace = Vec::new();
    let mut notes = scenario.notes.clone();
    let mut checks = Vec::new();
    let mut summary = Summary {
        scenario: scenario.name.clone(),
        kind: String::new(),
        seed: scenario.seed,
        mode: scenario.mode,
        steps,
        final_probs: BTreeMap::new(),
        final_marginals: BTreeMap::new(),
        convergence_steps: BTreeMap::new(),
        game_outcome: None,
        assertions: Vec::new(),
        notes: Vec::new(),
        passed: false,
    };
    let asserted = match &scenario.experiment {
        Experiment::Reproduce { observe, .. } | Experiment::Sweep { observe, .. } => {
            let track = match &scenario.experiment {
                Experiment::Reproduce { track, .. } => track.clone(),
                _ => Vec::new(),
            };
            summary.kind = "reproduce".into();
            let state = trajectory(scenario, observe, &track, steps)?;
            belief_rows(&state, &mut trace);
            if scenario.higher.is_empty() {
                literal_rows(scenario, &state, &mut trace, &mut notes)?;
            }
            summary.final_probs = state.hypothesis_probs.clone();
            summary.final_marginals = state.stream_marginals.clone();
            summary.convergence_steps = convergence(&state, tol.convergence);
            evaluate(&scenario.assertions, &Evidence::Beliefs(&state), tol.default)
        }
        Experiment::Proposition { number, count } => {
            summary.kind = format!("proposition {number}");
            let state = proposition(scenario, *number, *count, steps, &mut trace, &mut checks, &mut summary)?;
            let evidence = match &state {
                Some(PropositionData::Beliefs(b)) => Evidence::Beliefs(b),
                Some(PropositionData::Games(g)) => Evidence::Games(g),
                None => Evidence::Nothing,
            };
            evaluate(&scenario.assertions, &evidence, tol.default)
        }
        Experiment::Game(spec) => {
            summary.kind = "game".into();
            let config = scenario.game_config()?;
            let strategies = spec.e_strategies(scenario.seed);
            let f = spec.f_strategy();
            let outcomes = strategies.par_iter().map(|e| play(&config, e, f)).collect::<Result<Vec<_>>>()?;
            game_rows(&outcomes, &mut trace);
            summary.game_outcome = Some(game_summary(&outcomes, &config));
            if let Some(o) = outcomes.first() {
                summary.final_probs = o.final_beliefs.clone();
                summary.final_marginals = o.final_marginals.clone();
            }
            evaluate(&scenario.assertions, &Evidence::Games(&outcomes), tol.default)
        }
    };
    checks.extend(asserted);
    summary.passed = checks.iter().all(|c| c.passed);
    summary.assertions = checks;
    summary.notes = notes;
    Ok(RunOutput { trace, summary })
}

fn game_summary(outcomes: &[GameOutcome], config: &crate::game::GameConfig) -> GameSummary {
    let variants: Vec<VariantSummary> = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| VariantSummary {
            variant: i,
            status: o.status,
            rounds: o.rounds,
            verdict: win_eval(o, config).verdict,
            final_marginals: o.final_marginals.clone(),
            transcript_len: o.transcript.len(),
        })
        .collect();
    GameSummary {
        accepted: outcomes.iter().filter(|o| o.accepted()).count(),
        exhausted: outcomes.iter().filter(|o| o.status == Status::HorizonExhausted).count(),
        variants,
    }
}

fn game_rows(outcomes: &[GameOutcome], trace: &mut Vec<TraceRow>) {
    let multi = outcomes.len() > 1;
    for (i, o) in outcomes.iter().enumerate() {
        let name = |id: &str| if multi { format!("v{i}/{id}") } else { id.to_string() };
        let points = o.marginal_history.iter().enumerate().chain(o.post_game.iter().map(|p| (p.stage - 1, &p.marginals)));
        for (step, marginals) in points {
            for (id, v) in marginals {
                trace.push(TraceRow { step, entity_kind: EntityKind::Stream, entity_id: name(id), value: *v });
            }
        }
    }
}

enum PropositionData {
    Beliefs(BeliefState),
    Games(Vec<GameOutcome>),
}

fn all_pass<T>(name: &str, items: &[T], ok: impl Fn(&T) -> bool) -> Check {
    let bad = items.iter().filter(|x| !ok(x)).count();
    Check::new(name, bad == 0, format!("{} of {} cases pass", items.len() - bad, items.len()))
}

fn proposition(
    scenario: &Scenario,
    number: u8,
    count: Option<usize>,
    steps: usize,
    trace: &mut Vec<TraceRow>,
    checks: &mut Vec<Check>,
    summary: &mut Summary,
) -> Result<Option<PropositionData>> {
    let tol = scenario.tolerances;
    let seed = scenario.seed;
    let mode = scenario.mode;
    Ok(match number {
        1 => {
            let cases = props::convergence_suite(seed, count.unwrap_or(50), steps, mode, tol.convergence)?;
            for c in &cases {
                let id = format!("case{}/h1", c.index);
                trace.push(TraceRow { step: steps, entity_kind: EntityKind::Hypothesis, entity_id: id.clone(), value: c.final_h1 });
                trace.push(TraceRow { step: steps, entity_kind: EntityKind::Stream, entity_id: format!("case{}/T", c.index), value: c.final_marginal });
                summary.convergence_steps.insert(id, c.converged_at);
            }
            checks.push(all_pass("P(h1) reaches 1 - eps", &cases, |c| c.final_h1 >= 1.0 - tol.convergence));
            checks.push(all_pass("P(T) within tolerance of the h1 limit", &cases, |c| (c.final_marginal - c.limit).abs() <= tol.limit));
            checks.push(all_pass("P(h1) is nondecreasing", &cases, |c| c.nondecreasing));
            None
        }
        2 | 3 => {
            let state = props::trust_run(steps, mode)?;
            belief_rows(&state, trace);
            let (t, u) = (state.marginal_of("T").unwrap_or(0.0), state.marginal_of("U").unwrap_or(1.0));
            if number == 2 {
                checks.push(Check::new("P(T) >= 1 - 1e-3", t >= 1.0 - tol.limit, fmt12(t)));
                checks.push(Check::new("P(U) <= 1e-3", u <= tol.limit, fmt12(u)));
            } else {
                let b = props::rival_proposition_marginal(steps, mode)?;
                trace.push(TraceRow { step: state.step, entity_kind: EntityKind::Literal, entity_id: "b".into(), value: b });
                checks.push(Check::new("P(b) <= 1e-6", b <= tol.convergence, fmt12(b)));
            }
            summary.final_probs = state.hypothesis_probs.clone();
            summary.final_marginals = state.stream_marginals.clone();
            summary.convergence_steps = convergence(&state, tol.convergence);
            Some(PropositionData::Beliefs(state))
        }
        4 => {
            let probe = props::rival_probe();
            let blind = props::probe_after(&probe, steps, 50)?;
            let control = props::probe_after(&LearnabilityProbe { evidence: Literal::pos("a"), ..probe.clone() }, steps, 50)?;
            for (i, p) in blind.posterior_trace.iter().enumerate() {
                trace.push(TraceRow { step: i, entity_kind: EntityKind::Hypothesis, entity_id: probe.target_hypothesis.clone(), value: *p });
            }
            let constant = blind.loss_trace.windows(2).all(|w| w[0].to_bits() == w[1].to_bits());
            checks.push(Check::new("rival evidence is not learnable", blind.verdict == Learnability::NotLearnable, format!("{:?}", blind.verdict)));
            checks.push(Check::new("loss trace is constant", constant, format!("{} points", blind.loss_trace.len())));
            checks.push(Check::new("trusted evidence is learnable", control.verdict == Learnability::Learnable, format!("{:?}", control.verdict)));
            None
        }
        5..=7 => {
            let cases = props::completeness_suite(seed, count.unwrap_or(50), steps)?;
            for c in &cases {
                trace.push(TraceRow { step: steps, entity_kind: EntityKind::Stream, entity_id: format!("case{}/T", c.index), value: c.final_t });
                trace.push(TraceRow { step: steps, entity_kind: EntityKind::Stream, entity_id: format!("case{}/U", c.index), value: c.final_rival });
            }
            checks.push(all_pass("generated stream is argumentatively complete", &cases, |c| c.complete));
            if number == 5 {
                checks.push(all_pass("witness closure is exact", &cases, |c| c.closure_exact));
                checks.push(all_pass("witness is potentially trustworthy", &cases, |c| c.witness_trustworthy));
            }
            if number >= 6 {
                checks.push(all_pass("P(T) >= .999", &cases, |c| c.final_t >= 0.999));
                checks.push(all_pass("P(U) <= 1e-3", &cases, |c| c.final_rival <= 1e-3));
            }
            if number == 7 {
                checks.push(all_pass("rival-only evidence is not learnable", &cases, |c| !c.rival_evidence_learnable));
            }
            None
        }
        _ => {
            let mut config = props::section6_game(true)?;
            config.horizon = steps;
            let suite = props::game_suite(&config, count.unwrap_or(20), seed)?;
            match number {
                8 => {
                    let gaps = suite.knowledge_first.iter().map(|o| props::pure_run_gap(o, &config)).collect::<Result<Vec<_>>>()?;
                    let worst = gaps.iter().copied().fold(0.0, f64::max);
                    checks.push(Check::new("unaccepted games match a pure T run", worst <= 1e-9, format!("max gap {}", fmt12(worst))));
                    let floor = suite.discount.iter().map(|o| props::post_game_floor(o, "U")).fold(f64::INFINITY, f64::min);
                    let half = config.acceptance_mass / 2.0;
                    checks.push(Check::new("accepted games keep P(U) >= mass/2", floor >= half, format!("min {}", fmt12(floor))));
                }
                9 => checks.push(all_pass("knowledge-first learner never accepts", &suite.knowledge_first, |o| o.status == Status::HorizonExhausted)),
                _ => {
                    checks.push(all_pass("discounting learner accepts by round 2", &suite.discount, |o| matches!(o.status, Status::Accepted(r) if r <= 2)));
                    let expected = BTreeMap::from([("T".to_string(), 0.6), ("U".to_string(), 0.4)]);
                    checks.push(Check::new("marginals stay at (.6, .4) before acceptance", suite.discount_stationary(&expected), String::new()));
                }
            }
            let outcomes = if number == 9 { suite.knowledge_first } else { suite.discount };
            game_rows(&outcomes, trace);
            summary.game_outcome = Some(game_summary(&outcomes, &config));
            Some(PropositionData::Games(outcomes))
        }
    })
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("step,entity_kind,entity_id,value\n");
    for r in trace {
        let _ = writeln!(out, "{},{},{},{}", r.step, r.entity_kind.as_str(), r.entity_id, fmt12(r.value));
    }
    out
}

pub fn report(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", summary.scenario);
    let _ = writeln!(out, "kind: {}  seed: {}  mode: {:?}  steps: {}", summary.kind, summary.seed, summary.mode, summary.steps);
    if !summary.final_marginals.is_empty() {
        let _ = writeln!(out, "\nfinal marginals");
        for (k, v) in &summary.final_marginals {
            let _ = writeln!(out, "  {k:<12} {}", fmt12(*v));
        }
    }
    if !summary.final_probs.is_empty() {
        let _ = writeln!(out, "\nfinal probabilities");
        for (k, v) in &summary.final_probs {
            let _ = writeln!(out, "  {k:<12} {}", fmt12(*v));
        }
    }
    if let Some(g) = &summary.game_outcome {
        let _ = writeln!(out, "\ngame: {} variants, {} accepted, {} ran out the horizon", g.variants.len(), g.accepted, g.exhausted);
        for v in g.variants.iter().take(5) {
            let _ = writeln!(out, "  v{}: {:?} after {} rounds ({})", v.variant, v.status, v.rounds, v.verdict);
        }
    }
    if !summary.assertions.is_empty() {
        let _ = writeln!(out, "\nchecks");
        for c in &summary.assertions {
            let _ = writeln!(out, "  [{}] {}  {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
        }
    }
    for n in &summary.notes {
        let _ = writeln!(out, "\nnote: {n}");
    }
    let _ = writeln!(out, "\nresult: {}", if summary.passed { "pass" } else { "FAIL" });
    out
}

/// Writes `trace.csv`, `summary.json` and `report.txt` into `dir`.
pub fn write_artifacts(output: &RunOutput, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trace.csv"), trace_csv(&output.trace))?;
    let json = serde_json::to_string_pretty(&output.summary).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("summary.json"), json + "\n")?;
    std::fs::write(dir.join("report.txt"), report(&output.summary))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweeps.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub axes: Vec<Axis>,
}

/// `parameter` is `prior:<hypothesis>` or `constant:<hypothesis>:<stream>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn points(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|a| a.values.len()).product()
        }
    }

    /// Grid point `index` in row-major order, last axis fastest.
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (i, axis) in self.axes.iter().enumerate().rev() {
            out[i] = axis.values[index % axis.values.len()];
            index /= axis.values.len();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub converged: bool,
    pub convergence_step: Option<usize>,
    pub final_target: f64,
    pub final_marginal: f64,
    pub flag: String,
}

fn set_prior(priors: &mut BTreeMap<String, f64>, id: &str, value: f64) -> Result<()> {
    if !priors.contains_key(id) {
        return Err(Error::InvalidScenario(format!("sweep parameter names unknown prior `{id}`")));
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidScenario(format!("prior {value} for `{id}` is outside [0, 1]")));
    }
    let rest: f64 = priors.iter().filter(|(k, _)| *k != id).map(|(_, v)| v).sum();
    let others = priors.len() - 1;
    for (k, v) in priors.iter_mut() {
        if k == id {
            *v = value;
        } else if rest > 0.0 {
            *v *= (1.0 - value) / rest;
        } else {
            *v = (1.0 - value) / others as f64;
        }
    }
    Ok(())
}

/// The template with one grid point's parameters applied.
pub fn instantiate(template: &Scenario, grid: &Grid, values: &[f64]) -> Result<Scenario> {
    let mut s = template.clone();
    for (axis, &v) in grid.axes.iter().zip(values) {
        let parts: Vec<&str> = axis.parameter.split(':').collect();
        match parts.as_slice() {
            ["prior", id] => set_prior(&mut s.priors, id, v)?,
            ["constant", h, stream] => {
                let hyp = s
                    .hypotheses
                    .iter_mut()
                    .find(|x| x.id == *h)
                    .ok_or_else(|| Error::InvalidScenario(format!("sweep parameter names unknown hypothesis `{h}`")))?;
                hyp.schedules.insert(stream.to_string(), LikelihoodSchedule::constant(v));
            }
            _ => return Err(Error::InvalidScenario(format!("unsupported sweep parameter `{}`", axis.parameter))),
        }
    }
    s.validate()?;
    Ok(s)
}

pub fn sweep(template: &Scenario, grid: &Grid, cap: usize) -> Result<Vec<SweepRow>> {
    let Experiment::Sweep { observe, target } = &template.experiment else {
        return Err(Error::InvalidScenario("sweep templates need a `sweep` experiment".into()));
    };
    let n = grid.points();
    if n > cap {
        return Err(Error::InvalidScenario(format!("grid has {n} points, more than the cap of {cap}")));
    }
    let points: Vec<(Vec<f64>, Scenario)> =
        (0..n).map(|i| grid.point(i)).map(|v| instantiate(template, grid, &v).map(|s| (v, s))).collect::<Result<_>>()?;
    let eps = template.tolerances.convergence;
    points
        .into_par_iter()
        .enumerate()
        .map(|(index, (values, s))| {
            let state = trajectory(&s, observe, &[], s.steps())?;
            let convergence_step = state.history.iter().find(|x| x.hypothesis_probs.get(target).is_some_and(|p| *p >= 1.0 - eps)).map(|x| x.step);
            let converged = convergence_step.is_some();
            let flag = if s.priors.get(target) == Some(&0.0) {
                "zero prior: convergence precondition violated".to_string()
            } else if !converged {
                "not converged".to_string()
            } else {
                String::new()
            };
            Ok(SweepRow {
                index,
                values,
                converged,
                convergence_step,
                final_target: state.prob(target),
                final_marginal: state.marginal_of(observe).unwrap_or(f64::NAN),
                flag,
            })
        })
        .collect()
}

pub fn sweep_csv(template: &Scenario, grid: &Grid, rows: &[SweepRow]) -> String {
    let (observe, target) = match &template.experiment {
        Experiment::Sweep { observe, target } => (observe.as_str(), target.as_str()),
        _ => ("", ""),
    };
    let mut out = String::from("index");
    for a in &grid.axes {
        out.push(',');
        out.push_str(&a.parameter);
    }
    let _ = writeln!(out, ",converged,convergence_step,final_{target},final_marginal_{observe},flag");
    for r in rows {
        let _ = write!(out, "{}", r.index);
        for v in &r.values {
            let _ = write!(out, ",{}", fmt12(*v));
        }
        let step = r.convergence_step.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, ",{},{},{},{},{}", r.converged, step, fmt12(r.final_target), fmt12(r.final_marginal), r.flag);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(0.56), "0.56");
        assert_eq!(fmt12(5.0 / 7.0), "0.714285714286");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(123456.7890123456), "123456.789012");
        assert_eq!(fmt12(3.7414515929867775e-14), "3.74145159299e-14");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(-0.25), "-0.25");
    }

    #[test]
    fn grid_points_are_row_major() {
        let g = Grid {
            axes: vec![
                Axis { parameter: "a".into(), values: vec![1.0, 2.0] },
                Axis { parameter: "b".into(), values: vec![10.0, 20.0, 30.0] },
            ],
        };
        assert_eq!(g.points(), 6);
        assert_eq!(g.point(0), vec![1.0, 10.0]);
        assert_eq!(g.point(4), vec![2.0, 20.0]);
        assert_eq!(Grid { axes: vec![] }.points(), 0);
    }

    #[test]
    fn prior_setting_renormalizes() {
        let mut p = BTreeMap::from([("a".to_string(), 0.5), ("b".to_string(), 0.3), ("c".to_string(), 0.2)]);
        set_prior(&mut p, "a", 0.0).unwrap();
        assert!((p["b"] - 0.6).abs() < 1e-12 && (p["c"] - 0.4).abs() < 1e-12);
        let mut q = BTreeMap::from([("a".to_string(), 1.0), ("b".to_string(), 0.0)]);
        set_prior(&mut q, "a", 0.25).unwrap();
        assert_eq!(q["b"], 0.75);
    }
}
