//! First-order testimony updating.
//!
//! A [`BeliefState`] at step `n` holds the hypothesis probabilities after
//! conditioning on stage `n + 1` of the stream being attended to (step 0 is the
//! prior) together with the marginal of every tracked stream at that stage.
//! The chained rule divides by the stored marginal of the previous stage, so
//! with stage-constant likelihoods it coincides with ordinary Bayes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::EvaluationHypothesis;
use crate::literal::Literal;
use crate::schedule::LikelihoodSchedule;
use crate::stream::TestimonyStream;

/// Marginals at or below this are treated as zero evidence.
pub const ZERO_EVIDENCE: f64 = 1e-12;
pub const NORMALIZATION_TOL: f64 = 1e-9;
const DRIFT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Denominator is the stored marginal of the previous stage.
    #[default]
    #[serde(alias = "chained_paper")]
    Chained,
    /// Denominator is the normalizer of the current stage.
    #[serde(alias = "standard_bayes")]
    Standard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub hypothesis_probs: BTreeMap<String, f64>,
    pub stream_marginals: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub hypothesis_probs: BTreeMap<String, f64>,
    pub stream_marginals: BTreeMap<String, f64>,
    pub step: usize,
    pub mode: UpdateMode,
    pub history: Vec<Snapshot>,
}

impl BeliefState {
    /// Initial state over `hypotheses`, tracking the marginals of `streams`.
    pub fn new(
        hypotheses: &[EvaluationHypothesis],
        priors: &BTreeMap<String, f64>,
        streams: &[String],
        mode: UpdateMode,
    ) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for h in hypotheses {
            let p = *priors.get(&h.id).ok_or_else(|| Error::Unknown {
                kind: "prior for hypothesis",
                id: h.id.clone(),
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidScenario(format!("prior {p} of `{}` outside [0, 1]", h.id)));
            }
            probs.insert(h.id.clone(), p);
        }
        if let Some(extra) = priors.keys().find(|k| !probs.contains_key(*k)) {
            return Err(Error::Unknown { kind: "hypothesis", id: extra.clone() });
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(sum));
        }
        Ok(Self::from_probs(probs, hypotheses, streams, mode))
    }

    /// Builds a state without the normalization check; used by the hierarchy,
    /// which produces its own normalized level-1 distribution.
    pub(crate) fn from_probs(
        probs: BTreeMap<String, f64>,
        hypotheses: &[EvaluationHypothesis],
        streams: &[String],
        mode: UpdateMode,
    ) -> Self {
        let marginals = stream_marginals(&probs, hypotheses, streams, 1);
        let snap = Snapshot { step: 0, hypothesis_probs: probs.clone(), stream_marginals: marginals.clone() };
        BeliefState { hypothesis_probs: probs, stream_marginals: marginals, step: 0, mode, history: vec![snap] }
    }

    /// Stage index the current probabilities are conditioned on.
    pub fn stage(&self) -> usize {
        self.step + 1
    }

    pub fn prob(&self, id: &str) -> f64 {
        self.hypothesis_probs.get(id).copied().unwrap_or(0.0)
    }

    pub fn marginal_of(&self, stream: &str) -> Option<f64> {
        self.stream_marginals.get(stream).copied()
    }

    pub fn tracked_streams(&self) -> Vec<String> {
        self.stream_marginals.keys().cloned().collect()
    }

    pub(crate) fn advance(&mut self, probs: BTreeMap<String, f64>, marginals: BTreeMap<String, f64>) {
        self.step += 1;
        self.hypothesis_probs = probs;
        self.stream_marginals = marginals;
        self.history.push(Snapshot {
            step: self.step,
            hypothesis_probs: self.hypothesis_probs.clone(),
            stream_marginals: self.stream_marginals.clone(),
        });
    }

    pub fn marginal_trace(&self, stream: &str) -> Vec<f64> {
        self.history.iter().filter_map(|s| s.stream_marginals.get(stream).copied()).collect()
    }

    pub fn prob_trace(&self, id: &str) -> Vec<f64> {
        self.history.iter().map(|s| s.hypothesis_probs.get(id).copied().unwrap_or(0.0)).collect()
    }
}

/// Weighted sum without validation; hypotheses that do not pronounce contribute 0.
pub(crate) fn weighted_likelihood(
    probs: &BTreeMap<String, f64>,
    hypotheses: &[EvaluationHypothesis],
    stream: &str,
    stage: usize,
) -> f64 {
    hypotheses
        .iter()
        .map(|h| h.likelihood(stream, stage).unwrap_or(0.0) * probs.get(&h.id).copied().unwrap_or(0.0))
        .sum::<f64>()
}

pub(crate) fn stream_marginals(
    probs: &BTreeMap<String, f64>,
    hypotheses: &[EvaluationHypothesis],
    streams: &[String],
    stage: usize,
) -> BTreeMap<String, f64> {
    streams
        .iter()
        .map(|s| (s.clone(), clamp_drift(weighted_likelihood(probs, hypotheses, s, stage))))
        .collect()
}

fn clamp_drift(x: f64) -> f64 {
    if x < 0.0 && x > -DRIFT {
        0.0
    } else if x > 1.0 && x < 1.0 + DRIFT {
        1.0
    } else {
        x
    }
}

/// Marginal probability of evidence: sum of likelihood times belief.
pub fn marginal(beliefs: &BTreeMap<String, f64>, likelihoods: &BTreeMap<String, f64>) -> Result<f64> {
    if beliefs.len() != likelihoods.len() || beliefs.keys().any(|k| !likelihoods.contains_key(k)) {
        return Err(Error::KeyMismatch);
    }
    if beliefs.values().chain(likelihoods.values()).any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidScenario("probability outside [0, 1]".into()));
    }
    let sum: f64 = beliefs.values().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(sum));
    }
    let m: f64 = beliefs.iter().map(|(k, p)| p * likelihoods[k]).sum();
    Ok(clamp_drift(m))
}

fn check_pronounces(hypotheses: &[EvaluationHypothesis], stream: &str) -> Result<()> {
    match hypotheses.iter().find(|h| h.likelihood(stream, 1).is_none()) {
        Some(h) => Err(Error::MissingSchedule { hypothesis: h.id.clone(), stream: stream.to_string() }),
        None => Ok(()),
    }
}

/// One stage of updating on `stream`.
pub fn chained_update(
    state: &BeliefState,
    hypotheses: &[EvaluationHypothesis],
    stream: &TestimonyStream,
) -> Result<BeliefState> {
    check_pronounces(hypotheses, &stream.id)?;
    let next = state.stage() + 1;
    stream.stage(next)?;
    let denominator = match state.mode {
        UpdateMode::Chained => state
            .marginal_of(&stream.id)
            .unwrap_or_else(|| weighted_likelihood(&state.hypothesis_probs, hypotheses, &stream.id, state.stage())),
        UpdateMode::Standard => weighted_likelihood(&state.hypothesis_probs, hypotheses, &stream.id, next),
    };
    if denominator <= ZERO_EVIDENCE {
        return Err(Error::ZeroEvidence { stream: stream.id.clone(), marginal: denominator });
    }
    let probs: BTreeMap<String, f64> = hypotheses
        .iter()
        .map(|h| {
            let lik = h.likelihood(&stream.id, next).unwrap_or(0.0);
            (h.id.clone(), lik * state.prob(&h.id) / denominator)
        })
        .collect();
    let marginals = stream_marginals(&probs, hypotheses, &state.tracked_streams(), next);
    let mut out = state.clone();
    out.advance(probs, marginals);
    Ok(out)
}

/// Applies [`chained_update`] `steps` times; the result's history is the trace.
pub fn simulate(
    state: &BeliefState,
    hypotheses: &[EvaluationHypothesis],
    stream: &TestimonyStream,
    steps: usize,
) -> Result<BeliefState> {
    let mut current = state.clone();
    for _ in 0..steps {
        current = chained_update(&current, hypotheses, stream)?;
    }
    Ok(current)
}

/// P(phi | h) = 1 - P(T_stage | h) for evidence T never entails.
pub fn pwmc_extend(
    h: &EvaluationHypothesis,
    stream: &TestimonyStream,
    phi: &Literal,
    stage: usize,
) -> Result<f64> {
    if stream.stage(stage)?.contains(phi) {
        return Err(Error::NotApplicable(phi.to_string()));
    }
    let p = h.likelihood(&stream.id, stage).ok_or_else(|| Error::MissingSchedule {
        hypothesis: h.id.clone(),
        stream: stream.id.clone(),
    })?;
    Ok(1.0 - p)
}

/// Finite-horizon test of potential trustworthiness: the likelihood stays above
/// one half, is within `eps` of 1 at the horizon, and the schedule converges to 1.
pub fn potentially_trustworthy(h: &EvaluationHypothesis, stream: &str, horizon: usize, eps: f64) -> bool {
    match h.schedule_for(stream) {
        Some(s) => schedule_trustworthy(&s, horizon, eps),
        None => false,
    }
}

pub fn schedule_trustworthy(s: &LikelihoodSchedule, horizon: usize, eps: f64) -> bool {
    horizon >= 1
        && (1..=horizon).all(|n| s.value(n) > 0.5)
        && s.value(horizon) >= 1.0 - eps
        && s.converges_to_one()
}

/// P(phi | h): the likelihood of the first stream that entails `phi` and on
/// which `h` has a schedule, otherwise the PWMC closure when `h` is PWMC for a
/// stream that does not entail `phi`.
pub fn proposition_likelihood(
    h: &EvaluationHypothesis,
    phi: &Literal,
    streams: &[TestimonyStream],
    stage: usize,
) -> Result<Option<f64>> {
    for s in streams {
        if s.stage(stage)?.contains(phi) {
            if let Some(sched) = h.schedules.get(&s.id) {
                return Ok(Some(sched.value(stage)));
            }
        }
    }
    if let Some(base) = &h.pwmc_for {
        if let Some(s) = streams.iter().find(|s| &s.id == base) {
            if !s.stage(stage)?.contains(phi) {
                return pwmc_extend(h, s, phi, stage).map(Some);
            }
        }
    }
    Ok(None)
}

/// Marginal of a proposition over the hypotheses that pronounce on it.
pub fn marginal_of_proposition(
    state: &BeliefState,
    hypotheses: &[EvaluationHypothesis],
    phi: &Literal,
    streams: &[TestimonyStream],
) -> Result<f64> {
    let stage = state.stage();
    let mut any = false;
    let mut total = 0.0;
    for h in hypotheses {
        if let Some(lik) = proposition_likelihood(h, phi, streams, stage)? {
            any = true;
            total += lik * state.prob(&h.id);
        }
    }
    if !any {
        return Err(Error::Unpronounced(phi.to_string()));
    }
    Ok(clamp_drift(total))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    AbsoluteDifference,
    SquaredDifference,
}

pub fn loss(estimate: f64, ideal: f64, kind: LossKind) -> f64 {
    let d = estimate - ideal;
    match kind {
        LossKind::AbsoluteDifference => d.abs(),
        LossKind::SquaredDifference => d * d,
    }
}

/// An object-level hypothesis the learner might come to believe, and the
/// evidence that would confirm it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnabilityProbe {
    pub target_hypothesis: String,
    pub prior: f64,
    pub ideal_posterior: f64,
    pub evidence: Literal,
    /// P(evidence | target).
    pub likelihood_if_true: f64,
    /// P(evidence | not target).
    pub likelihood_if_false: f64,
    #[serde(default)]
    pub loss_kind: LossKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learnability {
    Learnable,
    NotLearnable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: Learnability,
    /// Initial loss was already zero, so it could not decrease.
    pub degenerate: bool,
    pub loss_trace: Vec<f64>,
    pub posterior_trace: Vec<f64>,
    pub evidence_marginals: Vec<f64>,
}

/// Runs `steps` further stages on `update_stream`, presenting the probe's
/// evidence at each one.
///
/// The learner weighs the evidence by its own marginal credence in it: with
/// credence `m` the target moves to `m * P(h | e) + (1 - m) * P(h)`. At or below
/// [`ZERO_EVIDENCE`] the update is skipped outright and the posterior stays
/// exactly where it was.
pub fn learnability_probe(
    probe: &LearnabilityProbe,
    state: &BeliefState,
    hypotheses: &[EvaluationHypothesis],
    update_stream: &TestimonyStream,
    streams: &[TestimonyStream],
    steps: usize,
) -> Result<ProbeReport> {
    for p in [probe.prior, probe.ideal_posterior, probe.likelihood_if_true, probe.likelihood_if_false] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidScenario(format!("probe probability {p} outside [0, 1]")));
        }
    }
    let mut current = state.clone();
    let mut posterior = probe.prior;
    let mut loss_trace = vec![loss(posterior, probe.ideal_posterior, probe.loss_kind)];
    let mut posterior_trace = vec![posterior];
    let mut evidence_marginals = Vec::with_capacity(steps);
    for _ in 0..steps {
        current = chained_update(&current, hypotheses, update_stream)?;
        let m = marginal_of_proposition(&current, hypotheses, &probe.evidence, streams)?;
        evidence_marginals.push(m);
        if m > ZERO_EVIDENCE {
            let num = probe.likelihood_if_true * posterior;
            let den = num + probe.likelihood_if_false * (1.0 - posterior);
            if den > 0.0 {
                let bayes = num / den;
                posterior = m * bayes + (1.0 - m) * posterior;
            }
        }
        posterior_trace.push(posterior);
        loss_trace.push(loss(posterior, probe.ideal_posterior, probe.loss_kind));
    }
    let initial = loss_trace[0];
    let last = *loss_trace.last().unwrap();
    let verdict = if last < initial { Learnability::Learnable } else { Learnability::NotLearnable };
    Ok(ProbeReport { verdict, degenerate: initial == 0.0, loss_trace, posterior_trace, evidence_marginals })
}
