//! Testimony generators: fixed feeds and the reactive engine that keeps a
//! stream argumentatively complete by answering each threat one stage late.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{EvaluationHypothesis, HigherOrderHypothesis, Origin};
use crate::lattice::HypothesisLattice;
use crate::literal::Literal;
use crate::relations::{chains, disagrees, supports, undercuts, HypothesisSequence};
use crate::schedule::LikelihoodSchedule;
use crate::stream::{literal_set_consistent, LiteralSet, TestimonyStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StreamKind {
    /// Cumulative stages given in full.
    Explicit { stages: Vec<Vec<Literal>> },
    /// The same content re-asserted at every stage.
    ConstantFeed { core: Vec<Literal> },
    /// Starts from `core` and grows as the engine answers threats.
    Reactive { core: Vec<Literal> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphabet: Vec<String>,
    #[serde(flatten)]
    pub kind: StreamKind,
}

impl StreamSpec {
    pub fn is_reactive(&self) -> bool {
        matches!(self.kind, StreamKind::Reactive { .. })
    }

    fn check_alphabet<'a>(&self, lits: impl IntoIterator<Item = &'a Literal>) -> Result<()> {
        if self.alphabet.is_empty() {
            return Ok(());
        }
        for l in lits {
            if !self.alphabet.contains(&l.atom) {
                return Err(Error::InconsistentSpec(format!("{}: atom `{}` not in alphabet", self.id, l.atom)));
            }
        }
        Ok(())
    }
}

fn core_set(id: &str, core: &[Literal]) -> Result<LiteralSet> {
    let set: LiteralSet = core.iter().cloned().collect();
    if !literal_set_consistent(&set) {
        return Err(Error::InconsistentSpec(format!("{id}: core asserts both signs of an atom")));
    }
    Ok(set)
}

/// Builds the stream described by `spec`. Feeds get `length` stages and are
/// open-ended; explicit streams keep exactly their declared stages.
pub fn build_stream(spec: &StreamSpec, length: usize) -> Result<TestimonyStream> {
    if length == 0 {
        return Err(Error::InconsistentSpec(format!("{}: length must be at least 1", spec.id)));
    }
    match &spec.kind {
        StreamKind::Explicit { stages } => {
            spec.check_alphabet(stages.iter().flatten())?;
            let sets: Vec<LiteralSet> = stages.iter().map(|s| s.iter().cloned().collect()).collect();
            if let Some(bad) = sets.iter().position(|s| !literal_set_consistent(s)) {
                return Err(Error::InconsistentSpec(format!("{}: stage {} is inconsistent", spec.id, bad + 1)));
            }
            TestimonyStream::new(spec.id.clone(), sets)
        }
        StreamKind::ConstantFeed { core } | StreamKind::Reactive { core } => {
            spec.check_alphabet(core)?;
            let set = core_set(&spec.id, core)?;
            Ok(TestimonyStream::new(spec.id.clone(), vec![set; length])?.open_ended())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Testimony support minted hypotheses receive from the owner stream.
    pub nullifier_support: f64,
    /// Likelihood schedule of the owner's self-supporting hypothesis.
    pub self_schedule: LikelihoodSchedule,
    /// Prior mass a minted top-level hypothesis enters with.
    pub entry_mass: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            nullifier_support: 0.9,
            self_schedule: LikelihoodSchedule::monotone(0.6, 1.0, 0.1),
            entry_mass: 0.1,
        }
    }
}

/// Something a rival put forward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Observation {
    Literal { from: String, literal: Literal },
    Sequence { from: String, sequence: HypothesisSequence },
}

impl Observation {
    pub fn describe(&self) -> String {
        match self {
            Observation::Literal { from, literal } => format!("{from}: {literal}"),
            Observation::Sequence { from, sequence } => format!("{from}: {:?}", sequence.ids()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pending {
    pub observed_at: usize,
    pub observation: Observation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Absorbed(Literal),
    Nullified(Vec<String>),
    AlreadyAnswered,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub observed_at: usize,
    pub answered_at: usize,
    pub observation: String,
    pub response: Response,
}

/// Reactive generator state for one owner stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactiveAttackEngine {
    pub owner: String,
    pub config: EngineConfig,
    pub pending: Vec<Pending>,
    pub log: Vec<Answer>,
    minted: usize,
}

impl ReactiveAttackEngine {
    pub fn new(owner: impl Into<String>) -> Self {
        Self::with_config(owner, EngineConfig::default())
    }

    pub fn with_config(owner: impl Into<String>, config: EngineConfig) -> Self {
        ReactiveAttackEngine { owner: owner.into(), config, pending: Vec::new(), log: Vec::new(), minted: 0 }
    }

    pub fn self_id(&self, level: usize) -> String {
        format!("{}:self:{level}", self.owner)
    }

    /// Queues an observation made at `stage`.
    pub fn observe(&mut self, stage: usize, observation: Observation) {
        self.pending.push(Pending { observed_at: stage, observation });
    }

    fn owned(&self, origin: &Origin) -> bool {
        origin.is_stream(&self.owner)
    }

    /// Partisan scores over a level: 1 for the owner's hypotheses, 0 otherwise.
    fn partisan_scores(&self, lattice: &HypothesisLattice, level: usize) -> Vec<(String, f64)> {
        if level == 1 {
            lattice.first_order().iter().map(|h| (h.id.clone(), if self.owned(&h.origin) { 1.0 } else { 0.0 })).collect()
        } else {
            lattice.level(level).iter().map(|h| (h.id.clone(), if self.owned(&h.origin) { 1.0 } else { 0.0 })).collect()
        }
    }

    fn parent_score(&self) -> impl Fn(&HigherOrderHypothesis) -> f64 + '_ {
        move |p| if self.owned(&p.origin) { 1.0 } else { 0.0 }
    }

    fn mint_higher(&self, lattice: &mut HypothesisLattice, id: String, level: usize, zeros: &[String]) -> Result<()> {
        let mut h = HigherOrderHypothesis::new(id, level)
            .support(self.owner.clone(), self.config.nullifier_support)
            .origin(Origin::Stream(self.owner.clone()));
        for (k, v) in self.partisan_scores(lattice, level - 1) {
            h = h.score(k, v);
        }
        for z in zeros {
            h = h.score(z.clone(), 0.0);
        }
        lattice.insert_higher(h, self.parent_score(), self.config.entry_mass)
    }

    /// Mints the owner's self-supporting chain if it is not there yet.
    pub fn ensure_self_chain(&self, lattice: &mut HypothesisLattice) -> Result<()> {
        let first = self.self_id(1);
        if !lattice.contains(&first) {
            let h = EvaluationHypothesis::new(first)
                .with(self.owner.clone(), self.config.self_schedule.clone())
                .pwmc(self.owner.clone())
                .origin(Origin::Stream(self.owner.clone()));
            lattice.insert_first(h, self.parent_score(), self.config.entry_mass)?;
        }
        for level in 2..=lattice.depth() {
            let id = self.self_id(level);
            if !lattice.contains(&id) {
                self.mint_higher(lattice, id, level, &[])?;
            }
        }
        Ok(())
    }

    /// Mints one nullifier per level the sequence reaches below the top,
    /// each scoring the sequence's element 0.
    fn nullify(&mut self, lattice: &mut HypothesisLattice, seq: &HypothesisSequence, stage: usize) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let reach = seq.len().min(lattice.depth() - 1);
        self.minted += 1;
        for k in 1..=reach {
            let target = seq.id_at(k).to_string();
            let owned = if k == 1 { self.owned(&seq.first.origin) } else { self.owned(&seq.higher[k - 2].origin) };
            if owned {
                continue;
            }
            let id = format!("{}:null:{}:{}:{}", self.owner, stage, self.minted, k + 1);
            self.mint_higher(lattice, id.clone(), k + 1, &[target])?;
            out.push(id);
        }
        Ok(out)
    }

    /// Extends `stream` by one stage. New observations are stamped with the
    /// current last stage and every pending item is answered in the new stage,
    /// so nothing is ever answered in the stage it was seen.
    pub fn reactive_extend(
        &mut self,
        stream: &TestimonyStream,
        lattice: &HypothesisLattice,
        observations: Vec<Observation>,
    ) -> Result<(TestimonyStream, HypothesisLattice)> {
        if stream.id != self.owner {
            return Err(Error::InvalidScenario(format!("engine for `{}` cannot extend `{}`", self.owner, stream.id)));
        }
        let current = stream.len();
        let next = current + 1;
        for o in observations {
            self.observe(current, o);
        }
        let mut lattice = lattice.clone();
        self.ensure_self_chain(&mut lattice)?;
        let mut absorbed = BTreeSet::new();
        let due: Vec<Pending> = std::mem::take(&mut self.pending);
        let (due, later): (Vec<_>, Vec<_>) = due.into_iter().partition(|p| p.observed_at < next);
        self.pending = later;
        for p in due {
            let response = match &p.observation {
                Observation::Literal { literal, .. } => {
                    let here = stream.stage(current)?;
                    let settled = disagrees(literal, stream, current)? || here.contains(literal);
                    if settled || absorbed.iter().any(|a: &Literal| a.clashes_with(literal)) {
                        Response::AlreadyAnswered
                    } else {
                        absorbed.insert(literal.clone());
                        Response::Absorbed(literal.clone())
                    }
                }
                Observation::Sequence { sequence, .. } => {
                    if lattice.depth() < 2 {
                        Response::AlreadyAnswered
                    } else {
                        Response::Nullified(self.nullify(&mut lattice, sequence, next)?)
                    }
                }
            };
            self.log.push(Answer {
                observed_at: p.observed_at,
                answered_at: next,
                observation: p.observation.describe(),
                response,
            });
        }
        let mut out = stream.clone();
        out.push_stage(absorbed);
        Ok((out, lattice))
    }
}

/// Threats a stream faces in a lattice: every literal of the rivals' stage
/// and every sequence below the top that supports a rival or undercuts the
/// stream.
pub fn scan_threats(
    lattice: &HypothesisLattice,
    stream: &TestimonyStream,
    rivals: &[TestimonyStream],
    stage: usize,
    horizon: usize,
    eps: f64,
) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    for rival in rivals {
        let lits = if rival.has_stage(stage) { rival.stage(stage)? } else { rival.last_stage() };
        for l in lits {
            out.push(Observation::Literal { from: rival.id.clone(), literal: l.clone() });
        }
    }
    for seq in chains(lattice, lattice.depth().saturating_sub(1))? {
        if seq.first.origin.is_stream(&stream.id) {
            continue;
        }
        let backs_rival = rivals.iter().find(|r| supports(&seq, &r.id, lattice, horizon, eps).supports());
        let threat = if let Some(r) = backs_rival {
            Some(r.id.clone())
        } else if seq.len() >= 2 && undercuts(&seq, stream, lattice, stage) {
            Some(format!("undercut of {}", stream.id))
        } else {
            None
        };
        if let Some(from) = threat {
            out.push(Observation::Sequence { from, sequence: seq });
        }
    }
    Ok(out)
}
