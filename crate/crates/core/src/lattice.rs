//! Hierarchies of evaluation hypotheses.
//!
//! Level 1 holds [`EvaluationHypothesis`] values; each level above scores the
//! one below it. Only the top level carries free priors: every lower level is
//! recomputed as the λ-normalized expectation of the scores its parents assign.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::belief::{stream_marginals, BeliefState, UpdateMode, NORMALIZATION_TOL, ZERO_EVIDENCE};
use crate::error::{Error, Result};
use crate::hypothesis::{EvaluationHypothesis, HigherOrderHypothesis};
use crate::stream::TestimonyStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisLattice {
    first: Vec<EvaluationHypothesis>,
    /// `higher[0]` is level 2.
    higher: Vec<Vec<HigherOrderHypothesis>>,
    /// `priors[0]` is level 1.
    priors: Vec<BTreeMap<String, f64>>,
}

impl HypothesisLattice {
    /// Builds a lattice from its levels and top-level priors, then normalizes
    /// the lower levels.
    pub fn new(
        first: Vec<EvaluationHypothesis>,
        higher: Vec<Vec<HigherOrderHypothesis>>,
        top_priors: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let depth = higher.len() + 1;
        let mut priors = vec![BTreeMap::new(); depth];
        priors[depth - 1] = top_priors;
        let lattice = Self::from_parts(first, higher, priors)?;
        lattice.rationality_normalize()
    }

    /// A depth-1 lattice: plain first-order hypotheses with priors.
    pub fn flat(first: Vec<EvaluationHypothesis>, priors: BTreeMap<String, f64>) -> Result<Self> {
        Self::new(first, Vec::new(), priors)
    }

    /// Builds a lattice with explicit priors at every level, without enforcing
    /// rationality. Missing lower-level priors read as 0.
    pub fn from_parts(
        first: Vec<EvaluationHypothesis>,
        higher: Vec<Vec<HigherOrderHypothesis>>,
        mut priors: Vec<BTreeMap<String, f64>>,
    ) -> Result<Self> {
        let depth = higher.len() + 1;
        if priors.len() != depth {
            return Err(Error::InvalidLattice(format!("{} prior maps for depth {depth}", priors.len())));
        }
        if first.is_empty() || higher.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidLattice("every level must be nonempty".into()));
        }
        let mut seen = BTreeSet::new();
        for id in first.iter().map(|h| &h.id).chain(higher.iter().flatten().map(|h| &h.id)) {
            if !seen.insert(id.clone()) {
                return Err(Error::Duplicate(id.clone()));
            }
        }
        for h in &first {
            for s in h.schedules.values() {
                s.validate().map_err(|e| Error::InvalidLattice(format!("`{}`: {e}", h.id)))?;
            }
        }
        for (i, level) in higher.iter().enumerate() {
            let below: Vec<&str> = if i == 0 {
                first.iter().map(|h| h.id.as_str()).collect()
            } else {
                higher[i - 1].iter().map(|h| h.id.as_str()).collect()
            };
            for h in level {
                if h.level != i + 2 {
                    return Err(Error::InvalidLattice(format!("`{}` declares level {} but sits at {}", h.id, h.level, i + 2)));
                }
                if let Some(missing) = below.iter().find(|b| !h.scores.contains_key(**b)) {
                    return Err(Error::InvalidLattice(format!("`{}` has no score for `{missing}`", h.id)));
                }
                if h.scores.values().chain(h.testimony_support.values()).any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidLattice(format!("`{}` has a value outside [0, 1]", h.id)));
                }
            }
        }
        for (m, level_priors) in priors.iter_mut().enumerate() {
            let ids: Vec<String> = if m == 0 {
                first.iter().map(|h| h.id.clone()).collect()
            } else {
                higher[m - 1].iter().map(|h| h.id.clone()).collect()
            };
            if let Some(extra) = level_priors.keys().find(|k| !ids.contains(k)) {
                return Err(Error::Unknown { kind: "hypothesis", id: extra.clone() });
            }
            for id in ids {
                level_priors.entry(id).or_insert(0.0);
            }
            if level_priors.values().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidLattice(format!("prior outside [0, 1] at level {}", m + 1)));
            }
        }
        let top: f64 = priors[depth - 1].values().sum();
        if (top - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(top));
        }
        Ok(HypothesisLattice { first, higher, priors })
    }

    pub fn depth(&self) -> usize {
        self.higher.len() + 1
    }

    pub fn first_order(&self) -> &[EvaluationHypothesis] {
        &self.first
    }

    /// Hypotheses at `level` (2-based indexing into the higher levels).
    pub fn level(&self, level: usize) -> &[HigherOrderHypothesis] {
        &self.higher[level - 2]
    }

    pub fn ids(&self, level: usize) -> Vec<String> {
        if level == 1 {
            self.first.iter().map(|h| h.id.clone()).collect()
        } else {
            self.higher[level - 2].iter().map(|h| h.id.clone()).collect()
        }
    }

    pub fn priors(&self, level: usize) -> &BTreeMap<String, f64> {
        &self.priors[level - 1]
    }

    pub fn prior(&self, id: &str) -> Option<f64> {
        self.priors.iter().find_map(|p| p.get(id).copied())
    }

    pub fn level_of(&self, id: &str) -> Option<usize> {
        self.priors.iter().position(|p| p.contains_key(id)).map(|i| i + 1)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.level_of(id).is_some()
    }

    pub fn first_by_id(&self, id: &str) -> Option<&EvaluationHypothesis> {
        self.first.iter().find(|h| h.id == id)
    }

    pub fn higher_by_id(&self, id: &str) -> Option<&HigherOrderHypothesis> {
        self.higher.iter().flatten().find(|h| h.id == id)
    }

    pub fn len(&self) -> usize {
        self.first.len() + self.higher.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Recomputes every level below the top from the level above it.
    pub fn rationality_normalize(&self) -> Result<Self> {
        let depth = self.depth();
        let top: f64 = self.priors[depth - 1].values().sum();
        if (top - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(top));
        }
        let mut out = self.clone();
        for m in (1..depth).rev() {
            let parents = &out.higher[m - 1];
            let parent_priors = &out.priors[m];
            let mut raw = BTreeMap::new();
            for id in out.ids(m) {
                let mass: f64 = parents
                    .iter()
                    .map(|p| parent_priors[&p.id] * p.score_of(&id).unwrap_or(0.0))
                    .sum();
                raw.insert(id, mass);
            }
            let total: f64 = raw.values().sum();
            if total <= 0.0 {
                return Err(Error::DegenerateLattice { level: m });
            }
            out.priors[m - 1] = raw.into_iter().map(|(k, v)| (k, v / total)).collect();
        }
        Ok(out)
    }

    /// Whether every level satisfies the rationality condition within `tol`.
    pub fn is_rational(&self, tol: f64) -> bool {
        match self.rationality_normalize() {
            Ok(n) => n.priors.iter().zip(&self.priors).all(|(a, b)| {
                a.iter().all(|(k, v)| (v - b.get(k).copied().unwrap_or(f64::NAN)).abs() <= tol)
            }),
            Err(_) => false,
        }
    }

    fn rescale_top_for_entry(&mut self, id: &str, mass: f64) {
        let top = self.depth() - 1;
        for (k, v) in self.priors[top].iter_mut() {
            if k != id {
                *v *= 1.0 - mass;
            }
        }
        self.priors[top].insert(id.to_string(), mass);
    }

    /// Adds a first-order hypothesis. Each level-2 hypothesis scores it with
    /// `parent_score`; at depth 1 it enters with prior `top_mass` and the rest
    /// of the level is scaled by `1 - top_mass`.
    pub fn insert_first(
        &mut self,
        h: EvaluationHypothesis,
        parent_score: impl Fn(&HigherOrderHypothesis) -> f64,
        top_mass: f64,
    ) -> Result<()> {
        if self.contains(&h.id) {
            return Err(Error::Duplicate(h.id));
        }
        let id = h.id.clone();
        self.first.push(h);
        self.priors[0].insert(id.clone(), 0.0);
        if self.depth() == 1 {
            self.rescale_top_for_entry(&id, top_mass);
        } else {
            for p in self.higher[0].iter_mut() {
                let s = parent_score(p);
                p.scores.insert(id.clone(), s);
            }
        }
        *self = self.rationality_normalize()?;
        Ok(())
    }

    /// Adds a hypothesis at `h.level`. It must already score every hypothesis
    /// on the level below.
    pub fn insert_higher(
        &mut self,
        h: HigherOrderHypothesis,
        parent_score: impl Fn(&HigherOrderHypothesis) -> f64,
        top_mass: f64,
    ) -> Result<()> {
        let level = h.level;
        if level < 2 || level > self.depth() {
            return Err(Error::InvalidLattice(format!("level {level} outside lattice of depth {}", self.depth())));
        }
        if self.contains(&h.id) {
            return Err(Error::Duplicate(h.id));
        }
        if let Some(missing) = self.ids(level - 1).into_iter().find(|b| !h.scores.contains_key(b)) {
            return Err(Error::InvalidLattice(format!("`{}` has no score for `{missing}`", h.id)));
        }
        let id = h.id.clone();
        self.higher[level - 2].push(h);
        self.priors[level - 1].insert(id.clone(), 0.0);
        if level == self.depth() {
            self.rescale_top_for_entry(&id, top_mass);
        } else {
            for p in self.higher[level - 1].iter_mut() {
                let s = parent_score(p);
                p.scores.insert(id.clone(), s);
            }
        }
        *self = self.rationality_normalize()?;
        Ok(())
    }

    /// Initial belief state over the first-order level.
    pub fn belief_state(&self, streams: &[String], mode: UpdateMode) -> BeliefState {
        BeliefState::from_probs(self.priors[0].clone(), &self.first, streams, mode)
    }
}

/// One stage of hierarchical updating.
///
/// The top level is conditioned on the testimony-support channel of the
/// attended streams (the likelihood of a hypothesis is the sum of its support
/// over `attended`), then every lower level is recomputed top-down. At depth 1
/// this is exactly [`crate::belief::chained_update`] on the single attended stream.
pub fn hierarchical_update(
    lattice: &HypothesisLattice,
    state: &BeliefState,
    stream: &TestimonyStream,
    attended: &[String],
) -> Result<(HypothesisLattice, BeliefState)> {
    hierarchical_step(lattice, state.clone(), stream, attended)
}

/// [`hierarchical_update`] taking the state by value, which saves copying its
/// history in long runs.
pub fn hierarchical_step(
    lattice: &HypothesisLattice,
    mut state: BeliefState,
    stream: &TestimonyStream,
    attended: &[String],
) -> Result<(HypothesisLattice, BeliefState)> {
    if lattice.depth() == 1 {
        if attended.len() > 1 {
            return Err(Error::InvalidScenario("a depth-1 lattice attends to one stream".into()));
        }
        let next = crate::belief::chained_update(&state, &lattice.first, stream)?;
        let mut out = lattice.clone();
        out.priors[0] = next.hypothesis_probs.clone();
        return Ok((out, next));
    }
    let next_stage = state.stage() + 1;
    stream.stage(next_stage)?;
    let top = lattice.depth();
    let hyps = lattice.level(top);
    let weights: Vec<f64> = hyps
        .iter()
        .map(|h| {
            let lik: f64 = attended.iter().map(|s| h.support_for(s)).sum();
            lik * lattice.priors[top - 1][&h.id]
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= ZERO_EVIDENCE {
        return Err(Error::ZeroEvidence { stream: stream.id.clone(), marginal: total });
    }
    let mut out = lattice.clone();
    out.priors[top - 1] = hyps.iter().zip(&weights).map(|(h, w)| (h.id.clone(), w / total)).collect();
    let out = out.rationality_normalize()?;
    let marginals = stream_marginals(&out.priors[0], &out.first, &state.tracked_streams(), next_stage);
    state.advance(out.priors[0].clone(), marginals);
    Ok((out, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::chained_update;
    use crate::schedule::LikelihoodSchedule as S;

    fn map(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
        items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn two_first() -> Vec<EvaluationHypothesis> {
        vec![
            EvaluationHypothesis::new("a").with("T", S::constant(1.0)),
            EvaluationHypothesis::new("b").with("T", S::constant(0.0)).with("U", S::constant(1.0)),
        ]
    }

    #[test]
    fn single_parent_forces_priors() {
        let g = HigherOrderHypothesis::new("g", 2).score("a", 0.7).score("b", 0.3);
        let l = HypothesisLattice::new(two_first(), vec![vec![g]], map(&[("g", 1.0)])).unwrap();
        assert!((l.priors(1)["a"] - 0.7).abs() < 1e-15);
        assert!((l.priors(1)["b"] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn weighted_parents() {
        let g1 = HigherOrderHypothesis::new("g1", 2).score("a", 1.0).score("b", 0.0);
        let g2 = HigherOrderHypothesis::new("g2", 2).score("a", 0.2).score("b", 0.8);
        let l = HypothesisLattice::new(two_first(), vec![vec![g1, g2]], map(&[("g1", 0.5), ("g2", 0.5)])).unwrap();
        assert!((l.priors(1)["a"] - 0.6).abs() < 1e-15);
        assert!((l.priors(1)["b"] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn lambda_rescales() {
        let g = HigherOrderHypothesis::new("g", 2).score("a", 0.3).score("b", 0.3);
        let l = HypothesisLattice::new(two_first(), vec![vec![g]], map(&[("g", 1.0)])).unwrap();
        assert!((l.priors(1)["a"] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_is_degenerate() {
        let g = HigherOrderHypothesis::new("g", 2).score("a", 0.0).score("b", 0.0);
        let err = HypothesisLattice::new(two_first(), vec![vec![g]], map(&[("g", 1.0)])).unwrap_err();
        assert_eq!(err, Error::DegenerateLattice { level: 1 });
    }

    #[test]
    fn missing_score_rejected() {
        let g = HigherOrderHypothesis::new("g", 2).score("a", 1.0);
        assert!(matches!(
            HypothesisLattice::new(two_first(), vec![vec![g]], map(&[("g", 1.0)])),
            Err(Error::InvalidLattice(_))
        ));
    }

    #[test]
    fn stationary_under_neutral_top() {
        let first = vec![
            EvaluationHypothesis::new("h1").with("T", S::constant(1.0)).with("U", S::constant(0.0)),
            EvaluationHypothesis::new("h2").with("T", S::constant(0.0)).with("U", S::constant(1.0)),
        ];
        let g = HigherOrderHypothesis::new("g", 2).score("h1", 0.6).score("h2", 0.4);
        let mut l = HypothesisLattice::new(first, vec![vec![g]], map(&[("g", 1.0)])).unwrap();
        let t = TestimonyStream::from_literals("T", &[&["a"]]).unwrap().open_ended();
        let mut st = l.belief_state(&["T".into(), "U".into()], UpdateMode::Chained);
        for _ in 0..20 {
            let (nl, ns) = hierarchical_update(&l, &st, &t, &["T".into()]).unwrap();
            l = nl;
            st = ns;
            assert_eq!(st.marginal_of("T"), Some(0.6));
            assert_eq!(st.marginal_of("U"), Some(0.4));
        }
    }

    #[test]
    fn depth_one_matches_chained() {
        let first = vec![
            EvaluationHypothesis::new("h1").with("T", S::monotone(0.6, 0.9, 0.2)),
            EvaluationHypothesis::new("h2").with("T", S::constant(0.3)),
        ];
        let l = HypothesisLattice::flat(first.clone(), map(&[("h1", 0.3), ("h2", 0.7)])).unwrap();
        let t = TestimonyStream::from_literals("T", &[&["a"]]).unwrap().open_ended();
        let st = l.belief_state(&["T".into()], UpdateMode::Chained);
        let (_, via_lattice) = hierarchical_update(&l, &st, &t, &["T".into()]).unwrap();
        let direct = chained_update(&st, &first, &t).unwrap();
        assert_eq!(via_lattice, direct);
    }

    #[test]
    fn insertion_keeps_rationality() {
        let g = HigherOrderHypothesis::new("g", 2).score("a", 0.7).score("b", 0.3);
        let mut l = HypothesisLattice::new(two_first(), vec![vec![g]], map(&[("g", 1.0)])).unwrap();
        let k = HigherOrderHypothesis::new("k", 2).score("a", 0.0).score("b", 1.0);
        l.insert_higher(k, |_| 0.0, 0.1).unwrap();
        assert!((l.priors(2)["k"] - 0.1).abs() < 1e-15);
        assert!((l.priors(2)["g"] - 0.9).abs() < 1e-15);
        assert!(l.is_rational(1e-12));
        l.insert_first(EvaluationHypothesis::new("c").with("T", S::constant(0.5)), |p| if p.id == "k" { 1.0 } else { 0.0 }, 0.0)
            .unwrap();
        assert!(l.prior("c").unwrap() > 0.0);
        assert!(l.is_rational(1e-12));
    }
}
