//! Relations between hypothesis sequences and testimony: positivity,
//! nullification, support, undercutting, attack and argumentative completeness.

use serde::{Deserialize, Serialize};

use crate::belief::schedule_trustworthy;
use crate::error::{Error, Result};
use crate::hypothesis::{EvaluationHypothesis, HigherOrderHypothesis};
use crate::lattice::HypothesisLattice;
use crate::literal::Literal;
use crate::schedule::eventually_nondecreasing;
use crate::stream::TestimonyStream;

/// Default threshold for "clearly positive" scores.
pub const POSITIVE_THRESHOLD: f64 = 0.5;
/// Upper bound on sequences enumerated by the lattice checkers.
pub const MAX_CHAINS: usize = 200_000;
/// Slack on the undercut inequality so that `1 - .9` still counts as `.1`.
pub const UNDERCUT_SLACK: f64 = 1e-12;

/// One hypothesis per level, `[h1, h2, ..., hm]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSequence {
    pub first: EvaluationHypothesis,
    #[serde(default)]
    pub higher: Vec<HigherOrderHypothesis>,
}

impl HypothesisSequence {
    pub fn single(first: EvaluationHypothesis) -> Self {
        HypothesisSequence { first, higher: Vec::new() }
    }

    pub fn new(first: EvaluationHypothesis, higher: Vec<HigherOrderHypothesis>) -> Self {
        HypothesisSequence { first, higher }
    }

    pub fn len(&self) -> usize {
        1 + self.higher.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Id of the element at `level` (1-based).
    pub fn id_at(&self, level: usize) -> &str {
        if level == 1 {
            &self.first.id
        } else {
            &self.higher[level - 2].id
        }
    }

    pub fn top_id(&self) -> &str {
        self.id_at(self.len())
    }

    pub fn ids(&self) -> Vec<String> {
        (1..=self.len()).map(|l| self.id_at(l).to_string()).collect()
    }

    pub fn extended(&self, h: HigherOrderHypothesis) -> Self {
        let mut out = self.clone();
        out.higher.push(h);
        out
    }

    /// Score the element at `level + 1` gives the element at `level`.
    fn link(&self, level: usize) -> Option<f64> {
        self.higher.get(level - 1).and_then(|h| h.score_of(self.id_at(level)))
    }
}

/// Every adjacent pair scores above `threshold`.
pub fn is_positive(seq: &HypothesisSequence, threshold: f64) -> bool {
    (1..seq.len()).all(|m| seq.link(m).is_some_and(|s| s > threshold))
}

/// `nullifier`'s element at level m+1 assigns 0 to `target`'s element at level
/// m, for every m where both exist.
pub fn nullifies(nullifier: &HypothesisSequence, target: &HypothesisSequence) -> bool {
    let span = (nullifier.len() - 1).min(target.len());
    span >= 1 && (1..=span).all(|m| nullifier.higher[m - 1].score_of(target.id_at(m)) == Some(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Neither,
    Supports,
    PotentiallyTrustworthy,
}

impl Support {
    pub fn supports(self) -> bool {
        self != Support::Neither
    }
}

/// Whether `seq` supports `stream` relative to `lattice`: every element has
/// nonzero prior and the first element's likelihood for the stream is
/// eventually nondecreasing (potentially trustworthy when it also converges to 1).
pub fn supports(seq: &HypothesisSequence, stream: &str, lattice: &HypothesisLattice, horizon: usize, eps: f64) -> Support {
    if seq.ids().iter().any(|id| lattice.prior(id).unwrap_or(0.0) <= 0.0) {
        return Support::Neither;
    }
    supports_ignoring_priors(seq, stream, horizon, eps)
}

fn supports_ignoring_priors(seq: &HypothesisSequence, stream: &str, horizon: usize, eps: f64) -> Support {
    let Some(schedule) = seq.first.schedule_for(stream) else {
        return Support::Neither;
    };
    if !eventually_nondecreasing(&schedule, horizon) {
        return Support::Neither;
    }
    if schedule_trustworthy(&schedule, horizon, eps) {
        Support::PotentiallyTrustworthy
    } else {
        Support::Supports
    }
}

/// Support a first-order hypothesis receives from the sequence's higher
/// elements, with the lattice restricted to those elements.
pub fn sequence_support(seq: &HypothesisSequence, h1: &str, lattice: &HypothesisLattice) -> Option<f64> {
    let parent = seq.higher.first()?;
    let mut ids = lattice.ids(1);
    if !ids.iter().any(|i| i == &seq.first.id) {
        ids.push(seq.first.id.clone());
    }
    let total: f64 = ids.iter().map(|i| parent.score_of(i).unwrap_or(0.0)).sum();
    if total <= 0.0 {
        return Some(0.0);
    }
    Some(parent.score_of(h1).unwrap_or(0.0) / total)
}

/// Every first-order hypothesis trusting the stream (likelihood above one half)
/// gets at most `1 - P(T|h)` from the sequence.
pub fn undercuts(seq: &HypothesisSequence, stream: &TestimonyStream, lattice: &HypothesisLattice, stage: usize) -> bool {
    if seq.len() < 2 {
        return false;
    }
    lattice.first_order().iter().all(|h| match h.likelihood(&stream.id, stage) {
        Some(p) if p > 0.5 => sequence_support(seq, &h.id, lattice).unwrap_or(0.0) <= 1.0 - p + UNDERCUT_SLACK,
        _ => true,
    })
}

/// Syntactic disagreement: the stage entails the negation of `phi`.
pub fn disagrees(phi: &Literal, stream: &TestimonyStream, stage: usize) -> Result<bool> {
    Ok(stream.stage(stage)?.contains(&phi.negated()))
}

/// Coherent sequences of the lattice up to `max_len`: each element scores the
/// one below it above zero.
pub fn chains(lattice: &HypothesisLattice, max_len: usize) -> Result<Vec<HypothesisSequence>> {
    let mut out = Vec::new();
    let mut frontier: Vec<HypothesisSequence> =
        lattice.first_order().iter().cloned().map(HypothesisSequence::single).collect();
    let mut len = 1;
    while !frontier.is_empty() && len <= max_len {
        out.extend(frontier.iter().cloned());
        if out.len() > MAX_CHAINS {
            return Err(Error::InvalidLattice(format!("more than {MAX_CHAINS} sequences")));
        }
        if len == max_len || len == lattice.depth() {
            break;
        }
        let parents = lattice.level(len + 1);
        let mut next = Vec::new();
        for seq in &frontier {
            for p in parents {
                if p.score_of(seq.top_id()).is_some_and(|s| s > 0.0) {
                    next.push(seq.extended(p.clone()));
                }
            }
        }
        frontier = next;
        len += 1;
    }
    Ok(out)
}

/// Level-(m+1) hypotheses supported by `by` that assign 0 to `target`.
pub fn nullifiers_of<'a>(
    target: &str,
    level: usize,
    lattice: &'a HypothesisLattice,
    by: &str,
) -> impl Iterator<Item = &'a HigherOrderHypothesis> + 'a {
    let parents: &[HigherOrderHypothesis] = if level < lattice.depth() { lattice.level(level + 1) } else { &[] };
    let target = target.to_string();
    let by = by.to_string();
    parents
        .iter()
        .filter(move |h| h.support_for(&by) > 0.5 && h.score_of(&target) == Some(0.0))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub holds: bool,
    /// Sequence satisfying clause (i).
    pub witness: Option<Vec<String>>,
    /// For clause (ii): each rival-supporting sequence and a nullifier of it.
    pub nullified: Vec<(Vec<String>, String)>,
    /// A rival-supporting sequence with no nullifier, if any.
    pub unanswered: Option<Vec<String>>,
}

/// Whether `stream` attacks `rival` within `lattice` at `stage`.
///
/// Clause (i) looks for a potentially trustworthy sequence for `stream` whose
/// first element is consistent across the two streams and which undercuts the
/// rival. Clause (ii) requires every rival-supporting sequence shorter than
/// the lattice depth to be nullified by a hypothesis the stream supports.
pub fn attacks(
    stream: &TestimonyStream,
    rival: &TestimonyStream,
    lattice: &HypothesisLattice,
    stage: usize,
    horizon: usize,
    eps: f64,
) -> Result<AttackReport> {
    let all = chains(lattice, lattice.depth())?;
    let mut report = AttackReport::default();
    for seq in all.iter().filter(|s| s.len() >= 2) {
        if supports(seq, &stream.id, lattice, horizon, eps) != Support::PotentiallyTrustworthy {
            continue;
        }
        let (Some(p), Some(q)) = (seq.first.likelihood(&stream.id, stage), seq.first.likelihood(&rival.id, stage)) else {
            continue;
        };
        if (q - (1.0 - p)).abs() <= 1e-12 && undercuts(seq, rival, lattice, stage) {
            report.witness = Some(seq.ids());
            break;
        }
    }
    for seq in all.iter().filter(|s| s.len() < lattice.depth()) {
        if !supports(seq, &rival.id, lattice, horizon, eps).supports() {
            continue;
        }
        match nullifiers_of(seq.top_id(), seq.len(), lattice, &stream.id).next() {
            Some(n) => report.nullified.push((seq.ids(), n.id.clone())),
            None => {
                report.unanswered = Some(seq.ids());
                break;
            }
        }
    }
    report.holds = report.witness.is_some() && report.unanswered.is_none();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseVerdict {
    pub clause: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub stream: String,
    pub stage: usize,
    pub complete: bool,
    pub clauses: Vec<ClauseVerdict>,
}

impl CompletenessReport {
    pub fn violations(&self) -> Vec<&ClauseVerdict> {
        self.clauses.iter().filter(|c| !c.holds).collect()
    }
}

fn verdict(clause: &str, counterexample: Option<String>) -> ClauseVerdict {
    ClauseVerdict { clause: clause.to_string(), holds: counterexample.is_none(), counterexample }
}

/// Checks the four completeness clauses at the stream's last stage.
///
/// (i) every rival asserting something that disagrees with the stream is
/// attacked; (ii) compatible rival evidence not yet entailed at stage i is
/// entailed at i+1; (iii) every sequence undercutting the stream is nullified
/// by a hypothesis the stream supports; (iv) some full-depth sequence has a
/// first element making the stream potentially trustworthy.
pub fn argumentatively_complete(
    stream: &TestimonyStream,
    rivals: &[TestimonyStream],
    lattice: &HypothesisLattice,
    horizon: usize,
    eps: f64,
) -> Result<CompletenessReport> {
    let n = stream.len();
    let depth = lattice.depth();
    let all = chains(lattice, depth)?;

    let mut c1 = None;
    'rivals: for rival in rivals {
        let rstage = if rival.has_stage(n) { rival.stage(n)? } else { rival.last_stage() };
        for phi in rstage {
            if disagrees(phi, stream, n)? {
                let report = attacks(stream, rival, lattice, n, horizon, eps)?;
                if !report.holds {
                    let why = match report.unanswered {
                        Some(seq) => format!("{} asserts {phi}; sequence {seq:?} is not nullified", rival.id),
                        None => format!("{} asserts {phi}; no undercutting trustworthy sequence", rival.id),
                    };
                    c1 = Some(why);
                    break 'rivals;
                }
                break;
            }
        }
    }

    let mut c2 = None;
    'absorb: for rival in rivals {
        for i in 1..n {
            if !rival.has_stage(i) {
                break;
            }
            for phi in rival.stage(i)? {
                let here = stream.stage(i)?;
                if !here.contains(phi) && !disagrees(phi, stream, i)? && !stream.stage(i + 1)?.contains(phi) {
                    c2 = Some(format!("{phi} from {} at stage {i} not absorbed at stage {}", rival.id, i + 1));
                    break 'absorb;
                }
            }
        }
    }

    let mut c3 = None;
    for seq in all.iter().filter(|s| s.len() >= 2 && s.len() < depth) {
        if undercuts(seq, stream, lattice, n) && nullifiers_of(seq.top_id(), seq.len(), lattice, &stream.id).next().is_none() {
            c3 = Some(format!("undercutting sequence {:?} is not nullified", seq.ids()));
            break;
        }
    }

    let has_self = all
        .iter()
        .filter(|s| s.len() == depth)
        .any(|s| schedule_trustworthy_for(&s.first, &stream.id, horizon, eps));
    let c4 = (!has_self).then(|| format!("no depth-{depth} sequence makes {} potentially trustworthy", stream.id));

    let clauses = vec![
        verdict("attack", c1),
        verdict("absorb", c2),
        verdict("nullify_undercutters", c3),
        verdict("self_support", c4),
    ];
    Ok(CompletenessReport {
        stream: stream.id.clone(),
        stage: n,
        complete: clauses.iter().all(|c| c.holds),
        clauses,
    })
}

fn schedule_trustworthy_for(h: &EvaluationHypothesis, stream: &str, horizon: usize, eps: f64) -> bool {
    h.schedule_for(stream).is_some_and(|s| schedule_trustworthy(&s, horizon, eps))
}

/// The first element of a self-supporting sequence, made PWMC for the stream.
pub fn pwmc_witness(
    stream: &TestimonyStream,
    rivals: &[TestimonyStream],
    lattice: &HypothesisLattice,
    horizon: usize,
    eps: f64,
) -> Result<EvaluationHypothesis> {
    let report = argumentatively_complete(stream, rivals, lattice, horizon, eps)?;
    if !report.complete {
        let reason = report
            .violations()
            .iter()
            .map(|c| format!("{}: {}", c.clause, c.counterexample.clone().unwrap_or_default()))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::NotArgComplete { stream: stream.id.clone(), reason });
    }
    let seq = chains(lattice, lattice.depth())?
        .into_iter()
        .filter(|s| s.len() == lattice.depth())
        .find(|s| schedule_trustworthy_for(&s.first, &stream.id, horizon, eps))
        .expect("clause (iv) holds");
    let mut h = seq.first;
    h.pwmc_for = Some(stream.id.clone());
    Ok(h)
}

/// PWMC closure over every literal of `alphabet` the stream does not entail:
/// `P(phi | h) + P(T_stage | h) == 1` exactly.
pub fn pwmc_closure_holds(h: &EvaluationHypothesis, stream: &TestimonyStream, alphabet: &[String], stage: usize) -> Result<bool> {
    let p = h.likelihood(&stream.id, stage).ok_or_else(|| Error::MissingSchedule {
        hypothesis: h.id.clone(),
        stream: stream.id.clone(),
    })?;
    for atom in alphabet {
        for phi in [Literal::pos(atom.clone()), Literal::neg(atom.clone())] {
            if stream.stage(stage)?.contains(&phi) {
                continue;
            }
            let q = crate::belief::pwmc_extend(h, stream, &phi, stage)?;
            if q + p != 1.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::LikelihoodSchedule as S;
    use std::collections::BTreeMap;

    fn map(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
        items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn h1(id: &str) -> EvaluationHypothesis {
        EvaluationHypothesis::new(id).with("T", S::constant(0.9))
    }

    #[test]
    fn positivity() {
        let seq = HypothesisSequence::new(
            h1("a"),
            vec![HigherOrderHypothesis::new("b", 2).score("a", 0.9), HigherOrderHypothesis::new("c", 3).score("b", 0.9)],
        );
        assert!(is_positive(&seq, 0.5));
        let zero = HypothesisSequence::new(h1("a"), vec![HigherOrderHypothesis::new("b", 2).score("a", 0.0)]);
        assert!(!is_positive(&zero, 0.5));
        assert!(is_positive(&HypothesisSequence::single(h1("a")), 0.5));
    }

    #[test]
    fn nullification() {
        let target = HypothesisSequence::new(h1("x"), vec![HigherOrderHypothesis::new("y", 2).score("x", 1.0)]);
        let null = HypothesisSequence::new(
            h1("n1"),
            vec![
                HigherOrderHypothesis::new("n2", 2).score("x", 0.0),
                HigherOrderHypothesis::new("n3", 3).score("y", 0.0),
            ],
        );
        assert!(nullifies(&null, &target));
        let weak = HypothesisSequence::new(
            h1("n1"),
            vec![
                HigherOrderHypothesis::new("n2", 2).score("x", 0.0),
                HigherOrderHypothesis::new("n3", 3).score("y", 0.1),
            ],
        );
        assert!(!nullifies(&weak, &target));
    }

    #[test]
    fn mutual_nullification() {
        let a = HypothesisSequence::new(h1("a1"), vec![HigherOrderHypothesis::new("a2", 2).score("b1", 0.0)]);
        let b = HypothesisSequence::new(h1("b1"), vec![HigherOrderHypothesis::new("b2", 2).score("a1", 0.0)]);
        assert!(nullifies(&a, &b));
        assert!(nullifies(&b, &a));
    }

    fn support_lattice(first_sched: S, prior_zero: bool) -> (HypothesisLattice, HypothesisSequence) {
        let first = vec![
            EvaluationHypothesis::new("a").with("T", first_sched),
            EvaluationHypothesis::new("b").with("T", S::constant(0.2)),
        ];
        let g = HigherOrderHypothesis::new("g", 2).score("a", if prior_zero { 0.0 } else { 0.5 }).score("b", 0.5);
        let l = HypothesisLattice::new(first, vec![vec![g.clone()]], map(&[("g", 1.0)])).unwrap();
        let seq = HypothesisSequence::new(l.first_order()[0].clone(), vec![g]);
        (l, seq)
    }

    #[test]
    fn support_classification() {
        let (l, s) = support_lattice(S::monotone(0.6, 1.0, 0.1), false);
        assert_eq!(supports(&s, "T", &l, 200, 1e-6), Support::PotentiallyTrustworthy);
        let (l, s) = support_lattice(S::constant(0.8), false);
        assert_eq!(supports(&s, "T", &l, 200, 1e-6), Support::Supports);
        let (l, s) = support_lattice(S::monotone(0.6, 1.0, 0.1), true);
        assert_eq!(supports(&s, "T", &l, 200, 1e-6), Support::Neither);
    }

    fn undercut_case(score_a: f64) -> bool {
        // a trusts T at .9; the sequence's level-2 element gives a `score_a`
        // out of a total mass of 1.
        let first = vec![
            EvaluationHypothesis::new("a").with("T", S::constant(0.9)),
            EvaluationHypothesis::new("b").with("T", S::constant(0.1)),
        ];
        let g = HigherOrderHypothesis::new("g", 2).score("a", score_a).score("b", 1.0 - score_a);
        let l = HypothesisLattice::new(first, vec![vec![g.clone()]], map(&[("g", 1.0)])).unwrap();
        let t = TestimonyStream::from_literals("T", &[&["p"]]).unwrap();
        let seq = HypothesisSequence::new(l.first_order()[1].clone(), vec![g]);
        undercuts(&seq, &t, &l, 1)
    }

    #[test]
    fn undercut_boundaries() {
        assert!(!undercut_case(0.15));
        assert!(undercut_case(0.1));
    }

    #[test]
    fn undercut_vacuous() {
        let first = vec![EvaluationHypothesis::new("a").with("T", S::constant(0.3))];
        let g = HigherOrderHypothesis::new("g", 2).score("a", 1.0);
        let l = HypothesisLattice::new(first, vec![vec![g.clone()]], map(&[("g", 1.0)])).unwrap();
        let t = TestimonyStream::from_literals("T", &[&["p"]]).unwrap();
        assert!(undercuts(&HypothesisSequence::new(l.first_order()[0].clone(), vec![g]), &t, &l, 1));
    }

    #[test]
    fn disagreement() {
        let t = TestimonyStream::from_literals("T", &[&["a", "~b"]]).unwrap();
        assert!(disagrees(&"~a".parse().unwrap(), &t, 1).unwrap());
        assert!(!disagrees(&"c".parse().unwrap(), &t, 1).unwrap());
        assert!(disagrees(&"b".parse().unwrap(), &t, 1).unwrap());
        assert!(disagrees(&"b".parse().unwrap(), &t, 2).is_err());
    }

    #[test]
    fn chain_enumeration_skips_zero_links() {
        let first = vec![h1("a"), h1("b")];
        let g = HigherOrderHypothesis::new("g", 2).score("a", 1.0).score("b", 0.0);
        let l = HypothesisLattice::new(first, vec![vec![g]], map(&[("g", 1.0)])).unwrap();
        let all = chains(&l, 2).unwrap();
        let ids: Vec<Vec<String>> = all.iter().map(|s| s.ids()).collect();
        assert_eq!(ids, vec![vec!["a".to_string()], vec!["b".to_string()], vec!["a".to_string(), "g".to_string()]]);
    }

    #[test]
    fn no_trustworthy_sequence_means_no_attack() {
        let first = vec![
            EvaluationHypothesis::new("a").with("T", S::constant(0.8)).pwmc("T"),
            EvaluationHypothesis::new("b").with("U", S::constant(0.9)),
        ];
        let g = HigherOrderHypothesis::new("g", 2).score("a", 1.0).score("b", 0.0).support("T", 0.9);
        let l = HypothesisLattice::new(first, vec![vec![g]], map(&[("g", 1.0)])).unwrap();
        let t = TestimonyStream::from_literals("T", &[&["p"]]).unwrap();
        let u = TestimonyStream::from_literals("U", &[&["~p"]]).unwrap();
        let r = attacks(&t, &u, &l, 1, 200, 1e-6).unwrap();
        assert!(!r.holds);
        assert!(r.witness.is_none());
    }
}
