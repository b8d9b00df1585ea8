//! The two-player learning game between a proposer `E` and a learner `F`
//! whose trusted stream `T` answers every proposal one stage later.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{potentially_trustworthy, BeliefState, UpdateMode};
use crate::error::{Error, Result};
use crate::generator::{build_stream, EngineConfig, Observation, ReactiveAttackEngine, StreamSpec};
use crate::hypothesis::{EvaluationHypothesis, HigherOrderHypothesis, Origin};
use crate::lattice::{hierarchical_step, HypothesisLattice};
use crate::relations::{is_positive, nullifies, HypothesisSequence, POSITIVE_THRESHOLD};
use crate::stream::{streams_conflict, TestimonyStream};

/// Mass an accepted hypothesis enters the learner's lattice with.
pub const ACCEPTANCE_MASS: f64 = 0.1;
pub const DEFAULT_HORIZON: usize = 1000;
pub const POST_GAME_STAGES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    E,
    F,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "move", content = "with")]
pub enum Move {
    ProposeHypothesis(EvaluationHypothesis),
    Accept,
    NullifyWithLevel2(HigherOrderHypothesis),
    NullifySequence(HypothesisSequence),
    ExtendPositiveSequence(HypothesisSequence),
    Pass,
}

impl Move {
    pub fn is_nullification(&self) -> bool {
        matches!(self, Move::NullifyWithLevel2(_) | Move::NullifySequence(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Move::ProposeHypothesis(_) => "m1",
            Move::Accept => "accept",
            Move::NullifyWithLevel2(_) => "m3",
            Move::NullifySequence(_) => "m4",
            Move::ExtendPositiveSequence(_) => "m5",
            Move::Pass => "pass",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinCondition {
    #[default]
    #[serde(alias = "IB")]
    Ib,
    Persuasion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// No acceptance while any nullifier is known.
    #[default]
    KnowledgeFirst,
    /// Nullifiers minted by the trusted stream are ignored.
    Discount,
}

/// The finite set of hypotheses the proposer may draw from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jury {
    pub first: Vec<EvaluationHypothesis>,
    /// `higher[0]` is level 2.
    #[serde(default)]
    pub higher: Vec<Vec<HigherOrderHypothesis>>,
}

impl Jury {
    pub fn level_ids(&self, level: usize) -> Vec<String> {
        if level == 1 {
            self.first.iter().map(|h| h.id.clone()).collect()
        } else {
            self.higher.get(level - 2).map(|l| l.iter().map(|h| h.id.clone()).collect()).unwrap_or_default()
        }
    }

    fn higher_at(&self, level: usize) -> &[HigherOrderHypothesis] {
        self.higher.get(level - 2).map(|l| l.as_slice()).unwrap_or(&[])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(default)]
    pub win: WinCondition,
    #[serde(default)]
    pub constraint_mode: ConstraintMode,
    pub jury: Jury,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// The learner's trusted stream.
    pub stream: StreamSpec,
    /// The conflicting stream the proposer argues for.
    pub rival: StreamSpec,
    pub lattice: HypothesisLattice,
    #[serde(default = "default_mass")]
    pub acceptance_mass: f64,
    #[serde(default = "default_post")]
    pub post_game_stages: usize,
    #[serde(default)]
    pub engine: EngineConfig,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_mass() -> f64 {
    ACCEPTANCE_MASS
}

fn default_post() -> usize {
    POST_GAME_STAGES
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lattice.depth() < 2 {
            return Err(Error::InvalidScenario("the learner's lattice needs at least two levels".into()));
        }
        if self.jury.higher.len() + 1 > self.lattice.depth() {
            return Err(Error::InvalidScenario("jury is deeper than the learner's lattice".into()));
        }
        let t = build_stream(&self.stream, 1)?;
        let r = build_stream(&self.rival, 1)?;
        if !streams_conflict(&t, &r, 1)? {
            return Err(Error::InvalidScenario(format!("`{}` and `{}` do not conflict", t.id, r.id)));
        }
        for h in &self.jury.first {
            if !potentially_trustworthy(h, &r.id, 200, 1e-6) {
                return Err(Error::InvalidScenario(format!("jury hypothesis `{}` does not advance learning of `{}`", h.id, r.id)));
            }
        }
        if !(0.0..1.0).contains(&self.acceptance_mass) {
            return Err(Error::InvalidScenario("acceptance mass must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "round")]
pub enum Status {
    Running,
    Accepted(usize),
    HorizonExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub round: usize,
    pub player: Player,
    #[serde(flatten)]
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub round: usize,
    pub turn: Player,
    pub transcript: Vec<TranscriptEntry>,
    /// The learner's lattice and beliefs.
    pub lattice: HypothesisLattice,
    pub beliefs: BeliefState,
    pub status: Status,
    pub stream: TestimonyStream,
    pub rival: TestimonyStream,
    /// Arguments the trusted stream has put forward, when it is reactive.
    pub pool: Option<HypothesisLattice>,
    pub engine: Option<ReactiveAttackEngine>,
    /// Proposal awaiting the learner's reply.
    pub live: Option<HypothesisSequence>,
    /// Last proposal the learner nullified.
    pub contested: Option<HypothesisSequence>,
    pub proposed: BTreeSet<Vec<String>>,
    pub attended: Vec<String>,
}

impl GameState {
    pub fn new(config: &GameConfig) -> Result<Self> {
        config.validate()?;
        let stream = build_stream(&config.stream, 1)?;
        let rival = build_stream(&config.rival, 1)?;
        let (pool, engine) = if config.stream.is_reactive() {
            let engine = ReactiveAttackEngine::with_config(stream.id.clone(), config.engine.clone());
            (Some(config.lattice.clone()), Some(engine))
        } else {
            (None, None)
        };
        let beliefs = config.lattice.belief_state(&[stream.id.clone(), rival.id.clone()], UpdateMode::Chained);
        Ok(GameState {
            round: 1,
            turn: Player::E,
            transcript: Vec::new(),
            lattice: config.lattice.clone(),
            beliefs,
            status: Status::Running,
            attended: vec![stream.id.clone()],
            stream,
            rival,
            pool,
            engine,
            live: None,
            contested: None,
            proposed: BTreeSet::new(),
        })
    }

    /// Moves to the next stage: the trusted stream answers what it saw, then
    /// the learner updates.
    pub fn advance_stage(&mut self) -> Result<()> {
        if let (Some(engine), Some(pool)) = (self.engine.as_mut(), self.pool.as_ref()) {
            let (stream, pool) = engine.reactive_extend(&self.stream, pool, Vec::new())?;
            self.stream = stream;
            self.pool = Some(pool);
        }
        let beliefs = std::mem::take(&mut self.beliefs);
        let (lattice, beliefs) = hierarchical_step(&self.lattice, beliefs, &self.stream, &self.attended)?;
        self.lattice = lattice;
        self.beliefs = beliefs;
        self.round += 1;
        Ok(())
    }

    fn is_discounted(&self, h: &HigherOrderHypothesis, config: &GameConfig) -> bool {
        config.constraint_mode == ConstraintMode::Discount && h.origin.is_stream(&self.stream.id)
    }

    /// Level-`level` hypotheses the learner can cite that score `target` 0.
    fn nullifiers_at(&self, config: &GameConfig, level: usize, target: &str) -> Vec<HigherOrderHypothesis> {
        let mut seen = BTreeSet::new();
        let own = self.lattice.level(level).iter();
        let pooled = self.pool.iter().flat_map(|p| p.level(level).iter());
        own.chain(pooled)
            .filter(|h| !self.is_discounted(h, config) && h.score_of(target) == Some(0.0))
            .filter(|h| seen.insert(h.id.clone()))
            .cloned()
            .collect()
    }

    /// A canonical sequence nullifying `seq`, if the learner has one.
    fn nullifying_sequence(&self, config: &GameConfig, seq: &HypothesisSequence) -> Option<HypothesisSequence> {
        let reach = seq.len().min(self.lattice.depth() - 1);
        let mut higher = Vec::with_capacity(reach);
        for k in 1..=reach {
            higher.push(self.nullifiers_at(config, k + 1, seq.id_at(k)).into_iter().next()?);
        }
        let first = self
            .lattice
            .first_order()
            .iter()
            .find(|h| higher[0].score_of(&h.id).is_some_and(|s| s > 0.0))
            .unwrap_or(&self.lattice.first_order()[0])
            .clone();
        let out = HypothesisSequence::new(first, higher);
        nullifies(&out, seq).then_some(out)
    }

    fn is_rival_positive(&self, h: &EvaluationHypothesis) -> bool {
        h.likelihood(&self.rival.id, self.round).is_some_and(|p| p > POSITIVE_THRESHOLD)
    }

    fn adopt(&mut self, seq: &HypothesisSequence) -> Result<()> {
        for h in &seq.higher {
            if self.lattice.contains(&h.id) {
                continue;
            }
            let mut h = h.clone();
            for id in self.lattice.ids(h.level - 1) {
                h.scores.entry(id).or_insert(0.0);
            }
            self.lattice.insert_higher(h, |_| 0.0, 0.0)?;
        }
        Ok(())
    }

    fn accept(&mut self, seq: &HypothesisSequence, config: &GameConfig) -> Result<()> {
        if self.lattice.prior(&seq.first.id).unwrap_or(0.0) > 0.0 {
            return Ok(());
        }
        let depth = self.lattice.depth();
        let mass = config.acceptance_mass;
        if !self.lattice.contains(&seq.first.id) {
            self.lattice.insert_first(seq.first.clone().origin(Origin::Accepted), |_| 0.0, 0.0)?;
        }
        let mut below = seq.first.id.clone();
        for level in 2..=depth {
            let mut h = match seq.higher.get(level - 2) {
                Some(h) => h.clone().origin(Origin::Accepted),
                None => HigherOrderHypothesis::new(format!("accept:{}:{level}", seq.top_id()), level)
                    .score(below.clone(), 1.0)
                    .support(self.rival.id.clone(), 0.9)
                    .support(self.stream.id.clone(), 0.1)
                    .origin(Origin::Accepted),
            };
            below = h.id.clone();
            if self.lattice.contains(&h.id) {
                continue;
            }
            for id in self.lattice.ids(level - 1) {
                h.scores.entry(id).or_insert(0.0);
            }
            let top_mass = if level == depth { mass } else { 0.0 };
            self.lattice.insert_higher(h, |_| 0.0, top_mass)?;
        }
        self.attended = vec![self.stream.id.clone(), self.rival.id.clone()];
        Ok(())
    }

    /// Applies a move in place.
    pub fn apply(&mut self, mv: Move, config: &GameConfig) -> Result<()> {
        if !legal_moves(self, config).contains(&mv) {
            return Err(Error::IllegalMove(format!("{} by {:?} in round {}", mv.label(), self.turn, self.round)));
        }
        match &mv {
            Move::ProposeHypothesis(h) => self.propose(HypothesisSequence::single(h.clone())),
            Move::ExtendPositiveSequence(seq) => self.propose(seq.clone()),
            Move::NullifyWithLevel2(h) => {
                let seq = HypothesisSequence::new(self.lattice.first_order()[0].clone(), vec![h.clone()]);
                self.adopt(&seq)?;
                self.contested = self.live.take();
            }
            Move::NullifySequence(seq) => {
                self.adopt(seq)?;
                self.contested = self.live.take();
            }
            Move::Accept => {
                let seq = self.live.take().expect("accept is only legal against a proposal");
                self.accept(&seq, config)?;
                self.status = Status::Accepted(self.round);
            }
            Move::Pass => {}
        }
        self.transcript.push(TranscriptEntry { round: self.round, player: self.turn, mv });
        self.turn = match self.turn {
            Player::E => Player::F,
            Player::F => Player::E,
        };
        Ok(())
    }

    fn propose(&mut self, seq: HypothesisSequence) {
        self.proposed.insert(seq.ids());
        if let Some(engine) = self.engine.as_mut() {
            engine.observe(self.round, Observation::Sequence { from: self.rival.id.clone(), sequence: seq.clone() });
        }
        self.live = Some(seq);
    }
}

fn extensions(state: &GameState, config: &GameConfig, base: &HypothesisSequence) -> Vec<HypothesisSequence> {
    let depth = state.lattice.depth();
    let m = base.len();
    let mut out = Vec::new();
    if m < depth {
        for j in config.jury.higher_at(m + 1) {
            out.push(base.extended(j.clone()));
        }
    } else if m >= 2 {
        let mut trimmed = base.clone();
        let top = trimmed.higher.pop().expect("length at least 2");
        for j in config.jury.higher_at(m) {
            if j.id != top.id {
                out.push(trimmed.extended(j.clone()));
            }
        }
    }
    out.retain(|s| is_positive(s, POSITIVE_THRESHOLD) && !state.proposed.contains(&s.ids()));
    out
}

/// The exact set of moves available to the player on turn.
pub fn legal_moves(state: &GameState, config: &GameConfig) -> Vec<Move> {
    if state.status != Status::Running {
        return Vec::new();
    }
    let mut out = Vec::new();
    match state.turn {
        Player::E => {
            for h in &config.jury.first {
                if state.is_rival_positive(h) && !state.proposed.contains(&vec![h.id.clone()]) {
                    out.push(Move::ProposeHypothesis(h.clone()));
                }
            }
            if let Some(base) = &state.contested {
                out.extend(extensions(state, config, base).into_iter().map(Move::ExtendPositiveSequence));
            }
            // The proposer may always decline to move.
            out.push(Move::Pass);
        }
        Player::F => {
            if let Some(seq) = &state.live {
                if seq.len() == 1 {
                    for h in state.nullifiers_at(config, 2, seq.id_at(1)) {
                        out.push(Move::NullifyWithLevel2(h));
                    }
                } else if let Some(n) = state.nullifying_sequence(config, seq) {
                    out.push(Move::NullifySequence(n));
                }
                if out.is_empty() {
                    out.push(Move::Accept);
                }
            }
        }
    }
    if out.is_empty() {
        out.push(Move::Pass);
    }
    out
}

/// Functional form of [`GameState::apply`].
pub fn apply_move(state: &GameState, mv: Move, config: &GameConfig) -> Result<GameState> {
    let mut next = state.clone();
    next.apply(mv, config)?;
    Ok(next)
}

/// Order in which a proposer draws jury members, level by level.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JuryOrdering {
    pub levels: Vec<Vec<String>>,
}

impl JuryOrdering {
    pub fn natural(jury: &Jury) -> Self {
        let depth = jury.higher.len() + 1;
        JuryOrdering { levels: (1..=depth).map(|l| jury.level_ids(l)).collect() }
    }

    fn rank(&self, level: usize, id: &str) -> usize {
        self.levels.get(level - 1).and_then(|l| l.iter().position(|x| x == id)).unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EStrategy {
    /// Proposes, then escalates after every nullification.
    Persistent { ordering: JuryOrdering },
    /// Never proposes.
    Silent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FStrategy {
    KnowledgeFirst,
    Discount,
}

impl FStrategy {
    pub fn mode(self) -> ConstraintMode {
        match self {
            FStrategy::KnowledgeFirst => ConstraintMode::KnowledgeFirst,
            FStrategy::Discount => ConstraintMode::Discount,
        }
    }

    /// Accepts when allowed, otherwise cites the first nullifier.
    pub fn choose(self, legal: &[Move]) -> Move {
        if legal.contains(&Move::Accept) {
            return Move::Accept;
        }
        legal.iter().find(|m| m.is_nullification()).cloned().unwrap_or(Move::Pass)
    }
}

impl EStrategy {
    pub fn choose(&self, legal: &[Move]) -> Move {
        let EStrategy::Persistent { ordering } = self else {
            return Move::Pass;
        };
        let extension = legal
            .iter()
            .filter_map(|m| match m {
                Move::ExtendPositiveSequence(s) => Some((ordering.rank(s.len(), s.top_id()), m)),
                _ => None,
            })
            .min_by_key(|(r, _)| *r);
        if let Some((_, m)) = extension {
            return m.clone();
        }
        legal
            .iter()
            .filter_map(|m| match m {
                Move::ProposeHypothesis(h) => Some((ordering.rank(1, &h.id), m)),
                _ => None,
            })
            .min_by_key(|(r, _)| *r)
            .map(|(_, m)| m.clone())
            .unwrap_or(Move::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltinStrategies {
    pub e_persistent: EStrategy,
    pub f_knowledge_first: FStrategy,
    pub f_discount: FStrategy,
}

pub fn builtin_strategies(jury: &Jury) -> BuiltinStrategies {
    BuiltinStrategies {
        e_persistent: EStrategy::Persistent { ordering: JuryOrdering::natural(jury) },
        f_knowledge_first: FStrategy::KnowledgeFirst,
        f_discount: FStrategy::Discount,
    }
}

/// Persistent proposers over `count` distinct jury orderings (the natural one
/// first), shuffled deterministically from `seed`.
pub fn e_persistent_family(jury: &Jury, count: usize, seed: u64) -> Vec<EStrategy> {
    let natural = JuryOrdering::natural(jury);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = vec![natural.clone()];
    let mut attempts = 0;
    while seen.len() < count && attempts < count * 100 {
        attempts += 1;
        let mut o = natural.clone();
        for level in o.levels.iter_mut() {
            level.shuffle(&mut rng);
        }
        if !seen.contains(&o) {
            seen.push(o);
        }
    }
    seen.into_iter().map(|ordering| EStrategy::Persistent { ordering }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostGamePoint {
    pub stage: usize,
    pub marginals: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub status: Status,
    pub rounds: usize,
    pub transcript: Vec<TranscriptEntry>,
    pub post_game: Vec<PostGamePoint>,
    pub final_beliefs: BTreeMap<String, f64>,
    pub final_marginals: BTreeMap<String, f64>,
    /// Stream marginals at every stage of the game proper.
    pub marginal_history: Vec<BTreeMap<String, f64>>,
    /// Stage at which the trusted stream answered each proposal.
    pub answers: Vec<(usize, usize)>,
}

impl GameOutcome {
    pub fn accepted(&self) -> bool {
        matches!(self.status, Status::Accepted(_))
    }
}

/// Plays to acceptance or the horizon, then follows the learner for the
/// configured number of post-game stages.
pub fn play(config: &GameConfig, e: &EStrategy, f: FStrategy) -> Result<GameOutcome> {
    let mut config = config.clone();
    config.constraint_mode = f.mode();
    let mut state = GameState::new(&config)?;
    while state.round <= config.horizon {
        let legal = legal_moves(&state, &config);
        let mv = match state.turn {
            Player::E => e.choose(&legal),
            Player::F => f.choose(&legal),
        };
        state.apply(mv, &config)?;
        if state.status != Status::Running || state.round == config.horizon {
            break;
        }
        state.advance_stage()?;
    }
    if state.status == Status::Running {
        state.status = Status::HorizonExhausted;
    }
    let rounds = state.round;
    let final_beliefs = state.beliefs.hypothesis_probs.clone();
    let final_marginals = state.beliefs.stream_marginals.clone();
    let marginal_history = state.beliefs.history.iter().map(|s| s.stream_marginals.clone()).collect();
    let mut post_game = Vec::with_capacity(config.post_game_stages);
    let (mut lattice, mut beliefs) = (state.lattice.clone(), state.beliefs.clone());
    for _ in 0..config.post_game_stages {
        (lattice, beliefs) = hierarchical_step(&lattice, beliefs, &state.stream, &state.attended)?;
        post_game.push(PostGamePoint { stage: beliefs.stage(), marginals: beliefs.stream_marginals.clone() });
    }
    let answers = state.engine.map(|e| e.log.iter().map(|a| (a.observed_at, a.answered_at)).collect()).unwrap_or_default();
    Ok(GameOutcome { status: state.status, rounds, transcript: state.transcript, post_game, final_beliefs, final_marginals, marginal_history, answers })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinReport {
    pub condition: WinCondition,
    pub e_wins: bool,
    pub verdict: String,
}

pub fn win_eval(outcome: &GameOutcome, config: &GameConfig) -> WinReport {
    let accepted = outcome.accepted();
    let verdict = match (config.win, accepted) {
        (WinCondition::Persuasion, true) => "E wins".to_string(),
        (WinCondition::Persuasion, false) => "F holds out".to_string(),
        (WinCondition::Ib, true) => "not interpretively blind".to_string(),
        (WinCondition::Ib, false) => "IB (bounded-horizon evidence)".to_string(),
    };
    WinReport { condition: config.win, e_wins: accepted, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::StreamKind;
    use crate::literal::lits;
    use crate::schedule::LikelihoodSchedule as S;

    fn feed(id: &str, core: &[&str], reactive: bool) -> StreamSpec {
        let core = lits(core);
        let kind = if reactive { StreamKind::Reactive { core } } else { StreamKind::ConstantFeed { core } };
        StreamSpec { id: id.into(), alphabet: vec![], kind }
    }

    /// Two first-order hypotheses, each certain of one stream, under a single
    /// level-2 hypothesis weighting them .6/.4.
    fn config(reactive: bool) -> GameConfig {
        let h1 = EvaluationHypothesis::new("h1").with("T", S::constant(1.0)).with("U", S::constant(0.0));
        let h2 = EvaluationHypothesis::new("h2").with("T", S::constant(0.0)).with("U", S::constant(1.0));
        let g = HigherOrderHypothesis::new("g", 2).score("h1", 0.6).score("h2", 0.4).support("T", 0.5);
        let lattice = HypothesisLattice::new(vec![h1, h2.clone()], vec![vec![g]], BTreeMap::from([("g".to_string(), 1.0)])).unwrap();
        let e1 = EvaluationHypothesis::new("e1").with("U", S::constant(1.0)).with("T", S::constant(0.0)).origin(Origin::Jury);
        let j2 = HigherOrderHypothesis::new("j2", 2).score("h2", 0.9).score("e1", 0.9).origin(Origin::Jury);
        let j3 = HigherOrderHypothesis::new("j3", 2).score("h2", 0.8).score("e1", 0.7).origin(Origin::Jury);
        GameConfig {
            win: WinCondition::Ib,
            constraint_mode: ConstraintMode::KnowledgeFirst,
            jury: Jury { first: vec![h2.origin(Origin::Jury), e1], higher: vec![vec![j2, j3]] },
            horizon: 1000,
            stream: feed("T", &["a"], reactive),
            rival: feed("U", &["~a"], false),
            lattice,
            acceptance_mass: ACCEPTANCE_MASS,
            post_game_stages: POST_GAME_STAGES,
            engine: EngineConfig::default(),
        }
    }

    #[test]
    fn opening_moves_are_rival_positive_proposals() {
        let cfg = config(true);
        let st = GameState::new(&cfg).unwrap();
        let legal = legal_moves(&st, &cfg);
        assert_eq!(legal.len(), 3);
        assert_eq!(legal.iter().filter(|m| matches!(m, Move::ProposeHypothesis(_))).count(), 2);
        assert_eq!(legal.last(), Some(&Move::Pass));
    }

    #[test]
    fn knowledge_first_must_nullify() {
        let cfg = config(true);
        let mut st = GameState::new(&cfg).unwrap();
        let e1 = cfg.jury.first[1].clone();
        st.apply(Move::ProposeHypothesis(e1), &cfg).unwrap();
        st.advance_stage().unwrap();
        let legal = legal_moves(&st, &cfg);
        assert!(!legal.contains(&Move::Accept));
        assert!(legal.iter().any(|m| matches!(m, Move::NullifyWithLevel2(h) if h.score_of("e1") == Some(0.0))));
    }

    #[test]
    fn discount_must_accept() {
        let mut cfg = config(true);
        cfg.constraint_mode = ConstraintMode::Discount;
        let mut st = GameState::new(&cfg).unwrap();
        st.apply(Move::ProposeHypothesis(cfg.jury.first[1].clone()), &cfg).unwrap();
        st.advance_stage().unwrap();
        assert_eq!(legal_moves(&st, &cfg), vec![Move::Accept]);
    }

    #[test]
    fn illegal_move_rejected() {
        let cfg = config(true);
        let st = GameState::new(&cfg).unwrap();
        assert!(matches!(apply_move(&st, Move::Accept, &cfg), Err(Error::IllegalMove(_))));
    }

    #[test]
    fn nullification_leaves_beliefs_alone() {
        let cfg = config(true);
        let mut st = GameState::new(&cfg).unwrap();
        st.apply(Move::ProposeHypothesis(cfg.jury.first[1].clone()), &cfg).unwrap();
        st.advance_stage().unwrap();
        let mv = legal_moves(&st, &cfg).into_iter().next().unwrap();
        st.apply(mv, &cfg).unwrap();
        assert_eq!(st.lattice.prior("e1"), None);
        assert!((st.beliefs.prob("h1") - 0.6).abs() < 1e-15);
        assert!(st.lattice.is_rational(1e-9));
    }

    #[test]
    fn persistent_vs_knowledge_first_exhausts() {
        let cfg = config(true);
        let e = builtin_strategies(&cfg.jury).e_persistent;
        let out = play(&cfg, &e, FStrategy::KnowledgeFirst).unwrap();
        assert_eq!(out.status, Status::HorizonExhausted);
        assert_eq!(out.rounds, 1000);
        for (seen, answered) in &out.answers {
            assert_eq!(answered, &(seen + 1));
        }
        assert!(out.transcript.iter().any(|t| t.mv.label() == "m4"));
        assert_eq!(win_eval(&out, &cfg).verdict, "IB (bounded-horizon evidence)");
    }

    #[test]
    fn persistent_vs_discount_accepts_in_round_two() {
        let cfg = config(true);
        let e = builtin_strategies(&cfg.jury).e_persistent;
        let out = play(&cfg, &e, FStrategy::Discount).unwrap();
        assert_eq!(out.status, Status::Accepted(2));
        for p in &out.post_game {
            assert_eq!(p.marginals["T"], 0.6);
            assert_eq!(p.marginals["U"], 0.4);
        }
        let mut persuasion = cfg.clone();
        persuasion.win = WinCondition::Persuasion;
        assert!(win_eval(&out, &persuasion).e_wins);
    }

    #[test]
    fn silent_proposer_exhausts() {
        let cfg = config(true);
        let out = play(&cfg, &EStrategy::Silent, FStrategy::Discount).unwrap();
        assert_eq!(out.status, Status::HorizonExhausted);
        assert!(out.transcript.iter().all(|t| t.mv == Move::Pass));
    }

    #[test]
    fn quiet_stream_lets_knowledge_first_accept() {
        let cfg = config(false);
        let mut e_first = cfg.jury.clone();
        e_first.first.reverse();
        let e = EStrategy::Persistent { ordering: JuryOrdering::natural(&e_first) };
        let out = play(&cfg, &e, FStrategy::KnowledgeFirst).unwrap();
        assert_eq!(out.status, Status::Accepted(2));
        let last = out.post_game.last().unwrap();
        assert!(last.marginals["U"] >= ACCEPTANCE_MASS / 2.0);
    }

    #[test]
    fn family_orderings_are_distinct() {
        let cfg = config(true);
        let fam = e_persistent_family(&cfg.jury, 4, 7);
        assert_eq!(fam.len(), 4);
        for (i, a) in fam.iter().enumerate() {
            for b in &fam[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
