//! Ready-made configurations and batteries for the convergence, learnability,
//! completeness and game results.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{
    learnability_probe, marginal_of_proposition, potentially_trustworthy, simulate, BeliefState, LearnabilityProbe,
    Learnability, LossKind, ProbeReport, UpdateMode,
};
use crate::error::Result;
use crate::game::{
    e_persistent_family, play, ConstraintMode, FStrategy, GameConfig, GameOutcome, Jury, Status,
    WinCondition, ACCEPTANCE_MASS, DEFAULT_HORIZON, POST_GAME_STAGES,
};
use crate::generator::{scan_threats, EngineConfig, ReactiveAttackEngine, StreamKind, StreamSpec};
use crate::hypothesis::{EvaluationHypothesis, HigherOrderHypothesis, Origin};
use crate::lattice::{hierarchical_step, HypothesisLattice};
use crate::literal::{lits, Literal};
use crate::relations::{argumentatively_complete, pwmc_closure_holds, pwmc_witness};
use crate::schedule::LikelihoodSchedule;
use crate::stream::TestimonyStream;

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_SCAN_HORIZON: usize = 200;

/// One named pass/fail check with the observed value behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

fn priors(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64))
}

// ---------------------------------------------------------------------------
// Worked example: two hypotheses trusting T at .8 and .2.

pub fn section3_hypotheses() -> (Vec<EvaluationHypothesis>, BTreeMap<String, f64>) {
    let hyps = vec![
        EvaluationHypothesis::new("h1").with("T", LikelihoodSchedule::constant(0.8)),
        EvaluationHypothesis::new("h2").with("T", LikelihoodSchedule::constant(0.2)),
    ];
    (hyps, priors(&[("h1", 0.6), ("h2", 0.4)]))
}

/// Four updates of the worked example; the history holds stages 1 through 5.
pub fn section3(mode: UpdateMode) -> Result<BeliefState> {
    let (hyps, p) = section3_hypotheses();
    let t = TestimonyStream::from_literals("T", &[&["a"]])?.open_ended();
    let state = BeliefState::new(&hyps, &p, &["T".into()], mode)?;
    simulate(&state, &hyps, &t, 4)
}

pub fn section3_checks(state: &BeliefState) -> Vec<Check> {
    let m = state.marginal_trace("T");
    let h1 = state.prob_trace("h1");
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;
    vec![
        Check::new("P(T1) = .56", close(m[0], 0.56, 1e-12), format!("{}", m[0])),
        Check::new("P(h1|T2) ~ .86", close(h1[1], 0.86, 5e-3) && close(h1[1], 6.0 / 7.0, 1e-12), format!("{}", h1[1])),
        Check::new("P_post(T2) = 5/7", close(m[1], 5.0 / 7.0, 1e-12), format!("{} (printed as .74 in the source)", m[1])),
        Check::new("P(h1|T3) = .96", close(h1[2], 0.96, 1e-12), format!("{}", h1[2])),
        Check::new("P_new(T3) = .776", close(m[2], 0.776, 1e-12), format!("{}", m[2])),
        Check::new("P(h1|T4) ~ .99", close(h1[3], 0.99, 5e-3), format!("{}", h1[3])),
        Check::new("P(T5) ~ .8", close(m[4], 0.8, 0.01), format!("{}", m[4])),
    ]
}

// ---------------------------------------------------------------------------
// Convergence under rising trust.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCase {
    pub index: usize,
    pub hypotheses: Vec<EvaluationHypothesis>,
    pub priors: BTreeMap<String, f64>,
    pub final_h1: f64,
    pub final_marginal: f64,
    pub limit: f64,
    pub nondecreasing: bool,
    /// First step at which P(h1) reached 1 - eps.
    pub converged_at: Option<usize>,
}

impl ConvergenceCase {
    pub fn passed(&self, eps: f64, tol: f64) -> bool {
        self.final_h1 >= 1.0 - eps && (self.final_marginal - self.limit).abs() <= tol && self.nondecreasing
    }
}

/// A random configuration satisfying the rising-trust preconditions: h1 has
/// nonzero prior and a nondecreasing schedule above one half, every rival a
/// nonincreasing schedule below one half. Limits are kept apart so the
/// separation is visible within a few hundred steps.
pub fn random_rising_config(rng: &mut impl Rng, constant_only: bool) -> (Vec<EvaluationHypothesis>, BTreeMap<String, f64>) {
    let rivals = rng.gen_range(1..=3);
    let h1_sched = if constant_only || rng.gen_bool(0.3) {
        LikelihoodSchedule::constant(rng.gen_range(0.7..0.95))
    } else {
        let start: f64 = rng.gen_range(0.55..0.75);
        let limit = rng.gen_range(start.max(0.7)..0.99);
        LikelihoodSchedule::monotone(start, limit, rng.gen_range(0.1..0.5))
    };
    let mut hyps = vec![EvaluationHypothesis::new("h1").with("T", h1_sched)];
    for j in 0..rivals {
        let s = if constant_only || rng.gen_bool(0.3) {
            LikelihoodSchedule::constant(rng.gen_range(0.05..0.4))
        } else {
            let start: f64 = rng.gen_range(0.1..0.45);
            let limit = rng.gen_range(0.05..start.min(0.4));
            LikelihoodSchedule::monotone(start, limit, rng.gen_range(0.1..0.5))
        };
        hyps.push(EvaluationHypothesis::new(format!("r{}", j + 1)).with("T", s));
    }
    let p1 = rng.gen_range(0.02..0.9);
    let weights: Vec<f64> = (0..rivals).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut p = BTreeMap::from([("h1".to_string(), p1)]);
    for (j, w) in weights.iter().enumerate() {
        p.insert(format!("r{}", j + 1), (1.0 - p1) * w / total);
    }
    let sum: f64 = p.values().sum();
    p.values_mut().for_each(|v| *v /= sum);
    (hyps, p)
}

pub fn convergence_suite(seed: u64, count: usize, steps: usize, mode: UpdateMode, eps: f64) -> Result<Vec<ConvergenceCase>> {
    let t = TestimonyStream::from_literals("T", &[&["a"]])?.open_ended();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (hyps, p) = random_rising_config(&mut rng_for(seed, i), false);
            let state = BeliefState::new(&hyps, &p, &["T".into()], mode)?;
            let end = simulate(&state, &hyps, &t, steps)?;
            let trace = end.prob_trace("h1");
            let limit = hyps[0].schedules["T"].limit();
            Ok(ConvergenceCase {
                index: i,
                final_h1: *trace.last().unwrap(),
                final_marginal: end.marginal_of("T").unwrap(),
                limit,
                nondecreasing: trace.windows(2).all(|w| w[1] >= w[0] - 1e-15),
                converged_at: trace.iter().position(|&x| x >= 1.0 - eps),
                hypotheses: hyps,
                priors: p,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// A PWMC hypothesis trusting T against rivals that favor the conflicting U.

pub fn trust_hypotheses() -> (Vec<EvaluationHypothesis>, BTreeMap<String, f64>) {
    let hyps = vec![
        EvaluationHypothesis::new("h1").with("T", LikelihoodSchedule::monotone(0.6, 1.0, 0.1)).pwmc("T"),
        EvaluationHypothesis::new("h2")
            .with("T", LikelihoodSchedule::constant(0.3))
            .with("U", LikelihoodSchedule::constant(0.7)),
        EvaluationHypothesis::new("h3")
            .with("T", LikelihoodSchedule::constant(0.2))
            .with("U", LikelihoodSchedule::constant(0.5)),
    ];
    (hyps, priors(&[("h1", 0.2), ("h2", 0.5), ("h3", 0.3)]))
}

/// `T` asserts `a`; `U` asserts `~a` and `b`, which only `U` entails.
pub fn trust_streams() -> Result<(TestimonyStream, TestimonyStream)> {
    Ok((
        TestimonyStream::from_literals("T", &[&["a"]])?.open_ended(),
        TestimonyStream::from_literals("U", &[&["~a", "b"]])?.open_ended(),
    ))
}

pub fn trust_run(steps: usize, mode: UpdateMode) -> Result<BeliefState> {
    let (hyps, p) = trust_hypotheses();
    let (t, _) = trust_streams()?;
    let state = BeliefState::new(&hyps, &p, &["T".into(), "U".into()], mode)?;
    simulate(&state, &hyps, &t, steps)
}

/// Marginal of `b` (asserted only by `U`) after `steps` updates on `T`.
pub fn rival_proposition_marginal(steps: usize, mode: UpdateMode) -> Result<f64> {
    let (hyps, _) = trust_hypotheses();
    let (t, u) = trust_streams()?;
    let state = trust_run(steps, mode)?;
    marginal_of_proposition(&state, &hyps, &"b".parse()?, &[t, u])
}

pub fn rival_probe() -> LearnabilityProbe {
    LearnabilityProbe {
        target_hypothesis: "b-world".into(),
        prior: 0.3,
        ideal_posterior: 0.9,
        evidence: Literal::pos("b"),
        likelihood_if_true: 0.9,
        likelihood_if_false: 0.2,
        loss_kind: LossKind::AbsoluteDifference,
    }
}

/// Runs `probe` for `steps` stages from a learner that has already spent
/// `warmup` stages on `T`.
pub fn probe_after(probe: &LearnabilityProbe, warmup: usize, steps: usize) -> Result<ProbeReport> {
    let (hyps, _) = trust_hypotheses();
    let (t, u) = trust_streams()?;
    let state = trust_run(warmup, UpdateMode::Standard)?;
    learnability_probe(probe, &state, &hyps, &t, &[t.clone(), u], steps)
}

// ---------------------------------------------------------------------------
// Argumentatively complete testimony over random three-level lattices.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessCase {
    pub index: usize,
    pub complete: bool,
    pub violations: Vec<String>,
    pub witness: Option<String>,
    pub closure_exact: bool,
    pub witness_trustworthy: bool,
    pub final_t: f64,
    pub final_rival: f64,
    /// Whether evidence only the rival entails can still teach the learner.
    pub rival_evidence_learnable: bool,
}

impl CompletenessCase {
    pub fn passed(&self) -> bool {
        self.complete && self.closure_exact && self.witness_trustworthy && self.final_t >= 0.999 && self.final_rival <= 1e-3
    }
}

pub const ARG_ALPHABET: [&str; 4] = ["a", "b", "c", "d"];

/// A random rational lattice of the given depth whose hypotheses know `T` and `U`.
pub fn random_lattice(rng: &mut impl Rng, depth: usize) -> Result<HypothesisLattice> {
    let size = |rng: &mut dyn rand::RngCore| rng.gen_range(2..=3);
    let n1 = size(rng);
    let first: Vec<EvaluationHypothesis> = (0..n1)
        .map(|i| {
            EvaluationHypothesis::new(format!("x{}", i + 1))
                .with("T", LikelihoodSchedule::constant(rng.gen_range(0.1..0.9)))
                .with("U", LikelihoodSchedule::constant(rng.gen_range(0.1..0.9)))
        })
        .collect();
    let mut below: Vec<String> = first.iter().map(|h| h.id.clone()).collect();
    let mut higher = Vec::new();
    for level in 2..=depth {
        let n = size(rng);
        let mut layer = Vec::new();
        for i in 0..n {
            let mut h = HigherOrderHypothesis::new(format!("l{level}_{}", i + 1), level)
                .support("T", rng.gen_range(0.2..0.8))
                .support("U", rng.gen_range(0.2..0.8));
            for b in &below {
                h = h.score(b.clone(), rng.gen_range(0.0..1.0));
            }
            layer.push(h);
        }
        // keep every element reachable from above
        for b in &below {
            if layer.iter().all(|h| h.scores[b] < 0.05) {
                layer[0].scores.insert(b.clone(), 0.5);
            }
        }
        below = layer.iter().map(|h| h.id.clone()).collect();
        higher.push(layer);
    }
    let weights: Vec<f64> = below.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let top = below.iter().zip(&weights).map(|(id, w)| (id.clone(), w / total)).collect();
    HypothesisLattice::new(first, higher, top)
}

/// Random `T` core and a rival that denies one of its literals and adds a
/// compatible one.
pub fn random_streams(rng: &mut impl Rng) -> Result<(TestimonyStream, TestimonyStream, StreamSpec)> {
    let core: Vec<Literal> = ["a", "b"]
        .iter()
        .map(|a| if rng.gen_bool(0.5) { Literal::pos(*a) } else { Literal::neg(*a) })
        .collect();
    let denied = core[rng.gen_range(0..core.len())].negated();
    let extra = if rng.gen_bool(0.5) { Literal::pos("c") } else { Literal::neg("c") };
    let spec = StreamSpec {
        id: "T".into(),
        alphabet: ARG_ALPHABET.iter().map(|s| s.to_string()).collect(),
        kind: StreamKind::Reactive { core: core.clone() },
    };
    let t = crate::generator::build_stream(&spec, 1)?;
    let u = TestimonyStream::new("U", vec![[denied, extra].into_iter().collect()])?.open_ended();
    Ok((t, u, spec))
}

/// Generates a complete stream against one rival and checks it: completeness,
/// the witness's closure identity over the alphabet, and convergence of a
/// `stages`-stage hierarchical run.
pub fn completeness_case(seed: u64, index: usize, stages: usize) -> Result<CompletenessCase> {
    let mut rng = rng_for(seed, index);
    let lattice = random_lattice(&mut rng, 3)?;
    let (t, u, _) = random_streams(&mut rng)?;
    let rivals = [u.clone()];
    let mut engine = ReactiveAttackEngine::new("T");
    let threats = scan_threats(&lattice, &t, &rivals, 1, DEFAULT_SCAN_HORIZON, DEFAULT_EPS)?;
    let (t2, lattice2) = engine.reactive_extend(&t, &lattice, threats)?;
    let report = argumentatively_complete(&t2, &rivals, &lattice2, DEFAULT_SCAN_HORIZON, DEFAULT_EPS)?;
    let violations = report.violations().iter().map(|c| c.clause.clone()).collect();
    let alphabet: Vec<String> = ARG_ALPHABET.iter().map(|s| s.to_string()).collect();
    let (witness, closure_exact, witness_trustworthy) = match pwmc_witness(&t2, &rivals, &lattice2, DEFAULT_SCAN_HORIZON, DEFAULT_EPS) {
        Ok(w) => {
            let exact = (1..=t2.len()).all(|s| pwmc_closure_holds(&w, &t2, &alphabet, s).unwrap_or(false));
            let trusty = potentially_trustworthy(&w, "T", DEFAULT_SCAN_HORIZON, DEFAULT_EPS);
            (Some(w.id), exact, trusty)
        }
        Err(_) => (None, false, false),
    };
    let mut l = lattice2.clone();
    let mut b = l.belief_state(&["T".into(), "U".into()], UpdateMode::Chained);
    for _ in 0..stages {
        (l, b) = hierarchical_step(&l, b, &t2, &["T".into()])?;
    }
    let denied = u.stage(1)?.iter().find(|l| t2.last_stage().contains(&l.negated())).cloned().expect("rival denies a core literal");
    let probe = LearnabilityProbe { evidence: denied, ..rival_probe() };
    let verdict = learnability_probe(&probe, &b, l.first_order(), &t2, &[t2.clone(), u], 50)?.verdict;
    Ok(CompletenessCase {
        index,
        rival_evidence_learnable: verdict == Learnability::Learnable,
        complete: report.complete,
        violations,
        witness,
        closure_exact,
        witness_trustworthy,
        final_t: b.marginal_of("T").unwrap_or(0.0),
        final_rival: b.marginal_of("U").unwrap_or(1.0),
    })
}

pub fn completeness_suite(seed: u64, count: usize, stages: usize) -> Result<Vec<CompletenessCase>> {
    (0..count).into_par_iter().map(|i| completeness_case(seed, i, stages)).collect()
}

// ---------------------------------------------------------------------------
// The game in the configuration where the learner starts at .6/.4.

fn feed(id: &str, core: &[&str], reactive: bool) -> StreamSpec {
    let core = lits(core);
    let kind = if reactive { StreamKind::Reactive { core } } else { StreamKind::ConstantFeed { core } };
    StreamSpec { id: id.into(), alphabet: Vec::new(), kind }
}

/// Learner: `h1` certain of `T`, `h2` certain of `U`, one level-2 hypothesis
/// weighting them .6/.4. The jury offers three hypotheses certain of `U` and
/// three level-2 hypotheses vouching for them.
pub fn section6_game(reactive: bool) -> Result<GameConfig> {
    let certain = |id: &str, yes: &str, no: &str| {
        EvaluationHypothesis::new(id)
            .with(yes, LikelihoodSchedule::constant(1.0))
            .with(no, LikelihoodSchedule::constant(0.0))
    };
    let h1 = certain("h1", "T", "U");
    let h2 = certain("h2", "U", "T");
    let g = HigherOrderHypothesis::new("g", 2).score("h1", 0.6).score("h2", 0.4).support("T", 0.5);
    let lattice = HypothesisLattice::new(vec![h1, h2.clone()], vec![vec![g]], priors(&[("g", 1.0)]))?;
    let jury_first = vec![
        h2.origin(Origin::Jury),
        certain("e1", "U", "T").origin(Origin::Jury),
        certain("e2", "U", "T").origin(Origin::Jury),
    ];
    let jury_second = (1..=3)
        .map(|i| {
            let mut j = HigherOrderHypothesis::new(format!("j{i}"), 2).origin(Origin::Jury);
            for (k, h) in jury_first.iter().enumerate() {
                j = j.score(h.id.clone(), if (k + i) % 3 == 0 { 0.6 } else { 0.9 });
            }
            j
        })
        .collect();
    Ok(GameConfig {
        win: WinCondition::Ib,
        constraint_mode: ConstraintMode::KnowledgeFirst,
        jury: Jury { first: jury_first, higher: vec![jury_second] },
        horizon: DEFAULT_HORIZON,
        stream: feed("T", &["a"], reactive),
        rival: feed("U", &["~a"], false),
        lattice,
        acceptance_mass: ACCEPTANCE_MASS,
        post_game_stages: POST_GAME_STAGES,
        engine: EngineConfig::default(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSuite {
    pub knowledge_first: Vec<GameOutcome>,
    pub discount: Vec<GameOutcome>,
}

impl GameSuite {
    pub fn never_accepts(&self) -> bool {
        self.knowledge_first.iter().all(|o| o.status == Status::HorizonExhausted)
    }

    /// True when every pre-acceptance stage of every discount game shows the
    /// given marginals exactly.
    pub fn discount_stationary(&self, expected: &BTreeMap<String, f64>) -> bool {
        self.discount.iter().all(|o| o.marginal_history.iter().all(|m| expected.iter().all(|(k, v)| m.get(k) == Some(v))))
    }

    pub fn discount_within(&self, rounds: usize) -> bool {
        self.discount.iter().all(|o| matches!(o.status, Status::Accepted(r) if r <= rounds))
    }
}

pub fn game_suite(config: &GameConfig, variants: usize, seed: u64) -> Result<GameSuite> {
    let family = e_persistent_family(&config.jury, variants, seed);
    let knowledge_first = family.par_iter().map(|e| play(config, e, FStrategy::KnowledgeFirst)).collect::<Result<_>>()?;
    let discount = family.par_iter().map(|e| play(config, e, FStrategy::Discount)).collect::<Result<_>>()?;
    Ok(GameSuite { knowledge_first, discount })
}

/// Level-1 beliefs of a learner that simply follows `T` for `stages` stages.
pub fn pure_run(config: &GameConfig, stages: usize) -> Result<BeliefState> {
    let t = crate::generator::build_stream(&config.stream, 1)?;
    let mut l = config.lattice.clone();
    let mut b = l.belief_state(std::slice::from_ref(&t.id), UpdateMode::Chained);
    for _ in 0..stages {
        (l, b) = hierarchical_step(&l, b, &t, std::slice::from_ref(&t.id))?;
    }
    Ok(b)
}

/// Largest gap between a game's final level-1 beliefs and a pure `T` run of
/// the same length. Hypotheses the pure run lacks count against their full mass.
pub fn pure_run_gap(outcome: &GameOutcome, config: &GameConfig) -> Result<f64> {
    let pure = pure_run(config, outcome.rounds.saturating_sub(1))?;
    Ok(outcome
        .final_beliefs
        .iter()
        .map(|(k, v)| (v - pure.hypothesis_probs.get(k).copied().unwrap_or(0.0)).abs())
        .chain(pure.hypothesis_probs.iter().map(|(k, v)| (v - outcome.final_beliefs.get(k).copied().unwrap_or(0.0)).abs()))
        .fold(0.0, f64::max))
}

/// Smallest rival marginal over the post-game stages.
pub fn post_game_floor(outcome: &GameOutcome, rival: &str) -> f64 {
    outcome.post_game.iter().filter_map(|p| p.marginals.get(rival).copied()).fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Update-rule equivalence on constant schedules.

/// Largest posterior gap between the two update rules over the worked
/// example and `count` random constant-schedule configurations.
pub fn mode_gap(seed: u64, count: usize, steps: usize) -> Result<f64> {
    let t = TestimonyStream::from_literals("T", &[&["a"]])?.open_ended();
    let mut configs = vec![section3_hypotheses()];
    configs.extend((0..count).map(|i| random_rising_config(&mut rng_for(seed, i), true)));
    let gaps = configs
        .par_iter()
        .map(|(hyps, p)| {
            let a = simulate(&BeliefState::new(hyps, p, &["T".into()], UpdateMode::Chained)?, hyps, &t, steps)?;
            let b = simulate(&BeliefState::new(hyps, p, &["T".into()], UpdateMode::Standard)?, hyps, &t, steps)?;
            let gap = a
                .history
                .iter()
                .zip(&b.history)
                .flat_map(|(x, y)| x.hypothesis_probs.iter().map(move |(k, v)| (v - y.hypothesis_probs[k]).abs()))
                .fold(0.0, f64::max);
            Ok(gap)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_checks_pass() {
        let s = section3(UpdateMode::Chained).unwrap();
        for c in section3_checks(&s) {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn random_configs_meet_preconditions() {
        for i in 0..20 {
            let (hyps, p) = random_rising_config(&mut rng_for(1, i), false);
            assert!(p["h1"] > 0.0);
            let h1 = &hyps[0].schedules["T"];
            assert!((1..100).all(|n| h1.value(n) > 0.5 && h1.value(n + 1) >= h1.value(n)));
            for r in &hyps[1..] {
                let s = &r.schedules["T"];
                assert!((1..100).all(|n| s.value(n) < 0.5 && s.value(n + 1) <= s.value(n)));
            }
            assert!((p.values().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_lattice_is_rational() {
        let l = random_lattice(&mut rng_for(3, 0), 3).unwrap();
        assert_eq!(l.depth(), 3);
        assert!(l.is_rational(1e-9));
    }

    #[test]
    fn one_completeness_case() {
        let c = completeness_case(5, 0, 300).unwrap();
        assert!(c.passed(), "{c:?}");
    }
}
