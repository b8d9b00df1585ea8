use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::schedule::LikelihoodSchedule;

/// Where a hypothesis came from. Minted hypotheses carry the stream that
/// produced them, which is what the discount constraint filters on.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum Origin {
    #[default]
    Declared,
    Stream(String),
    Jury,
    Accepted,
}

impl Origin {
    pub fn is_stream(&self, stream: &str) -> bool {
        matches!(self, Origin::Stream(s) if s == stream)
    }
}

/// A first-order evaluation hypothesis: one likelihood schedule per stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationHypothesis {
    pub id: String,
    pub schedules: BTreeMap<String, LikelihoodSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pwmc_for: Option<String>,
    #[serde(default)]
    pub origin: Origin,
}

impl EvaluationHypothesis {
    pub fn new(id: impl Into<String>) -> Self {
        EvaluationHypothesis {
            id: id.into(),
            schedules: BTreeMap::new(),
            pwmc_for: None,
            origin: Origin::Declared,
        }
    }

    pub fn with(mut self, stream: impl Into<String>, schedule: LikelihoodSchedule) -> Self {
        self.schedules.insert(stream.into(), schedule);
        self
    }

    pub fn pwmc(mut self, stream: impl Into<String>) -> Self {
        self.pwmc_for = Some(stream.into());
        self
    }

    pub fn origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    /// Likelihood of stream `stream` at stage `n`.
    ///
    /// A declared schedule wins. Otherwise a PWMC hypothesis for another stream
    /// assigns the complement of that stream's likelihood; anything else does
    /// not pronounce on the stream.
    pub fn likelihood(&self, stream: &str, n: usize) -> Option<f64> {
        if let Some(s) = self.schedules.get(stream) {
            return Some(s.value(n));
        }
        match &self.pwmc_for {
            Some(base) if base != stream => self.schedules.get(base).map(|s| 1.0 - s.value(n)),
            _ => None,
        }
    }

    /// The effective schedule for a stream, including the PWMC complement.
    pub fn schedule_for(&self, stream: &str) -> Option<LikelihoodSchedule> {
        if let Some(s) = self.schedules.get(stream) {
            return Some(s.clone());
        }
        match &self.pwmc_for {
            Some(base) if base != stream => {
                self.schedules.get(base).map(|s| LikelihoodSchedule::complement(s.clone()))
            }
            _ => None,
        }
    }
}

/// A level-m (m >= 2) hypothesis scoring level m-1 hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderHypothesis {
    pub id: String,
    pub level: usize,
    /// Scores for level-1-below hypotheses. May also hold scores for hypotheses
    /// outside the lattice, e.g. a rival proposal this hypothesis nullifies.
    pub scores: BTreeMap<String, f64>,
    /// P(h | T) per stream; absent streams read as 0.5.
    #[serde(default)]
    pub testimony_support: BTreeMap<String, f64>,
    #[serde(default)]
    pub origin: Origin,
}

pub const NEUTRAL_SUPPORT: f64 = 0.5;

impl HigherOrderHypothesis {
    pub fn new(id: impl Into<String>, level: usize) -> Self {
        HigherOrderHypothesis {
            id: id.into(),
            level,
            scores: BTreeMap::new(),
            testimony_support: BTreeMap::new(),
            origin: Origin::Declared,
        }
    }

    pub fn score(mut self, target: impl Into<String>, value: f64) -> Self {
        self.scores.insert(target.into(), value);
        self
    }

    pub fn support(mut self, stream: impl Into<String>, value: f64) -> Self {
        self.testimony_support.insert(stream.into(), value);
        self
    }

    pub fn origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn score_of(&self, target: &str) -> Option<f64> {
        self.scores.get(target).copied()
    }

    pub fn support_for(&self, stream: &str) -> f64 {
        self.testimony_support.get(stream).copied().unwrap_or(NEUTRAL_SUPPORT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pwmc_complements_other_streams() {
        let h = EvaluationHypothesis::new("h")
            .with("T", LikelihoodSchedule::constant(0.8))
            .pwmc("T");
        assert_eq!(h.likelihood("T", 3), Some(0.8));
        assert!((h.likelihood("U", 3).unwrap() - 0.2).abs() < 1e-15);
        let plain = EvaluationHypothesis::new("g").with("T", LikelihoodSchedule::constant(0.8));
        assert_eq!(plain.likelihood("U", 1), None);
    }

    #[test]
    fn missing_support_is_neutral() {
        let h = HigherOrderHypothesis::new("k", 2).support("T", 0.9);
        assert_eq!(h.support_for("T"), 0.9);
        assert_eq!(h.support_for("U"), NEUTRAL_SUPPORT);
    }
}
