//! Scenario files: a JSON description of one experiment and the checks it
//! must pass.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::belief::UpdateMode;
use crate::error::{Error, Result};
use crate::game::{ConstraintMode, EStrategy, FStrategy, GameConfig, Jury, JuryOrdering, WinCondition, ACCEPTANCE_MASS, POST_GAME_STAGES};
use crate::generator::{EngineConfig, StreamSpec};
use crate::hypothesis::{EvaluationHypothesis, HigherOrderHypothesis};
use crate::lattice::HypothesisLattice;

pub const DEFAULT_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: UpdateMode,
    /// Number of update steps, or rounds for games. Each experiment has its own default.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub streams: Vec<StreamSpec>,
    #[serde(default)]
    pub hypotheses: Vec<EvaluationHypothesis>,
    /// Levels 2 and up, lowest first. Empty means a flat belief state.
    #[serde(default)]
    pub higher: Vec<Vec<HigherOrderHypothesis>>,
    /// Priors of the top level.
    #[serde(default)]
    pub priors: BTreeMap<String, f64>,
    pub experiment: Experiment,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
    /// Free-form remarks copied into the run summary.
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Default tolerance for `eq` assertions.
    pub default: f64,
    /// A hypothesis has converged once its probability reaches 1 - convergence.
    pub convergence: f64,
    /// Allowed distance between a marginal and its schedule limit.
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { default: 1e-9, convergence: 1e-6, limit: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Update on one stream and record the trajectory.
    Reproduce {
        observe: String,
        /// Streams whose marginals are tracked; defaults to every declared stream.
        #[serde(default)]
        track: Vec<String>,
    },
    /// One of the built-in proposition batteries.
    Proposition {
        number: u8,
        #[serde(default)]
        count: Option<usize>,
    },
    Game(GameSpec),
    /// A template for `sweep`; running it directly runs the base point.
    Sweep {
        observe: String,
        target: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub trusted: String,
    pub rival: String,
    #[serde(default = "default_win")]
    pub win: WinCondition,
    pub jury: Jury,
    #[serde(default = "default_mass")]
    pub acceptance_mass: f64,
    #[serde(default = "default_post_game")]
    pub post_game_stages: usize,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub e: EChoice,
    pub f: ConstraintMode,
}

fn default_win() -> WinCondition {
    WinCondition::Ib
}

fn default_mass() -> f64 {
    ACCEPTANCE_MASS
}

fn default_post_game() -> usize {
    POST_GAME_STAGES
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum EChoice {
    /// Proposes jury hypotheses in jury order.
    #[default]
    Persistent,
    /// `count` persistent proposers with seeded jury orderings.
    Family { count: usize },
    Silent,
}

impl GameSpec {
    pub fn f_strategy(&self) -> FStrategy {
        match self.f {
            ConstraintMode::KnowledgeFirst => FStrategy::KnowledgeFirst,
            ConstraintMode::Discount => FStrategy::Discount,
        }
    }

    pub fn e_strategies(&self, seed: u64) -> Vec<EStrategy> {
        match &self.e {
            EChoice::Persistent => vec![EStrategy::Persistent { ordering: JuryOrdering::natural(&self.jury) }],
            EChoice::Family { count } => crate::game::e_persistent_family(&self.jury, *count, seed),
            EChoice::Silent => vec![EStrategy::Silent],
        }
    }
}

/// A numeric check on the result of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub quantity: Quantity,
    /// 1-based stage; absent means the final value.
    #[serde(default)]
    pub stage: Option<usize>,
    pub op: Op,
    pub value: f64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Marginal(String),
    Probability(String),
    /// 1 when the game ended in acceptance, else 0.
    Accepted,
    Rounds,
    /// Smallest post-game marginal of a stream.
    PostGameFloor(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Eq,
    Ge,
    Le,
}

impl Assertion {
    pub fn holds(&self, observed: f64, default_tol: f64) -> bool {
        let tol = self.tol.unwrap_or(default_tol);
        match self.op {
            Op::Eq => (observed - self.value).abs() <= tol,
            Op::Ge => observed >= self.value - tol,
            Op::Le => observed <= self.value + tol,
        }
    }

    pub fn describe(&self) -> String {
        let q = match &self.quantity {
            Quantity::Marginal(s) => format!("P({s})"),
            Quantity::Probability(h) => format!("P({h})"),
            Quantity::Accepted => "accepted".into(),
            Quantity::Rounds => "rounds".into(),
            Quantity::PostGameFloor(s) => format!("min post-game P({s})"),
        };
        let at = self.stage.map(|s| format!(" at stage {s}")).unwrap_or_default();
        let op = match self.op {
            Op::Eq => "=",
            Op::Ge => ">=",
            Op::Le => "<=",
        };
        format!("{q}{at} {op} {}", self.value)
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn steps(&self) -> usize {
        self.horizon.unwrap_or(match &self.experiment {
            Experiment::Game(_) => crate::game::DEFAULT_HORIZON,
            Experiment::Proposition { number: 1 | 3, .. } => 200,
            Experiment::Proposition { number: 2 | 4..=7, .. } => 300,
            Experiment::Proposition { .. } => crate::game::DEFAULT_HORIZON,
            _ => DEFAULT_STEPS,
        })
    }

    pub fn stream(&self, id: &str) -> Option<&StreamSpec> {
        self.streams.iter().find(|s| s.id == id)
    }

    pub fn stream_ids(&self) -> Vec<String> {
        self.streams.iter().map(|s| s.id.clone()).collect()
    }

    /// The hypothesis lattice the scenario declares, flat if it has no higher levels.
    pub fn lattice(&self) -> Result<HypothesisLattice> {
        let mut higher = self.higher.clone();
        for (i, level) in higher.iter_mut().enumerate() {
            for h in level.iter_mut() {
                h.level = i + 2;
            }
        }
        HypothesisLattice::new(self.hypotheses.clone(), higher, self.priors.clone())
    }

    pub fn game_config(&self) -> Result<GameConfig> {
        let Experiment::Game(g) = &self.experiment else {
            return Err(Error::InvalidScenario("not a game scenario".into()));
        };
        let lookup = |id: &str| self.stream(id).cloned().ok_or_else(|| Error::InvalidScenario(format!("unknown stream `{id}`")));
        Ok(GameConfig {
            win: g.win,
            constraint_mode: g.f,
            jury: g.jury.clone(),
            horizon: self.steps(),
            stream: lookup(&g.trusted)?,
            rival: lookup(&g.rival)?,
            lattice: self.lattice()?,
            acceptance_mass: g.acceptance_mass,
            post_game_stages: g.post_game_stages,
            engine: g.engine.clone(),
        })
    }

    /// Every problem with the scenario, empty if it is runnable.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.trim().is_empty() {
            out.push("name is empty".to_string());
        }
        if self.horizon == Some(0) {
            out.push("horizon must be positive".to_string());
        }
        let t = &self.tolerances;
        for (k, v) in [("default", t.default), ("convergence", t.convergence), ("limit", t.limit)] {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("tolerance `{k}` must be a nonnegative number"));
            }
        }
        let mut ids = BTreeSet::new();
        for s in &self.streams {
            if !ids.insert(s.id.clone()) {
                out.push(format!("duplicate stream `{}`", s.id));
            }
            let mut spec = s.clone();
            if spec.alphabet.is_empty() {
                spec.alphabet = self.alphabet.clone();
            }
            if let Err(e) = crate::generator::build_stream(&spec, 1) {
                out.push(format!("stream `{}`: {e}", s.id));
            }
        }
        let known_stream = |id: &str, out: &mut Vec<String>| {
            if !ids.contains(id) {
                out.push(format!("unknown stream `{id}`"));
            }
        };
        let needs_lattice = !matches!(self.experiment, Experiment::Proposition { .. });
        if needs_lattice {
            if self.hypotheses.is_empty() {
                out.push("no hypotheses declared".to_string());
            }
            for h in &self.hypotheses {
                for (stream, sched) in &h.schedules {
                    if !ids.contains(stream) {
                        out.push(format!("hypothesis `{}` has a schedule for unknown stream `{stream}`", h.id));
                    }
                    if let Err(e) = sched.validate() {
                        out.push(format!("hypothesis `{}`: {e}", h.id));
                    }
                }
            }
            if let Err(e) = self.lattice() {
                out.push(e.to_string());
            }
            let sum: f64 = self.priors.values().sum();
            if self.priors.values().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
                out.push(format!("priors must lie in [0, 1] and sum to 1 (sum = {sum})"));
            }
        }
        match &self.experiment {
            Experiment::Reproduce { observe, track } => {
                known_stream(observe, &mut out);
                track.iter().for_each(|s| known_stream(s, &mut out));
            }
            Experiment::Sweep { observe, target } => {
                known_stream(observe, &mut out);
                if !self.hypotheses.iter().any(|h| &h.id == target) {
                    out.push(format!("sweep target `{target}` is not a first-order hypothesis"));
                }
            }
            Experiment::Proposition { number, count } => {
                if !(1..=10).contains(number) {
                    out.push(format!("no proposition battery numbered {number}"));
                }
                if *count == Some(0) {
                    out.push("count must be positive".to_string());
                }
            }
            Experiment::Game(g) => {
                known_stream(&g.trusted, &mut out);
                known_stream(&g.rival, &mut out);
                if let EChoice::Family { count: 0 } = g.e {
                    out.push("strategy family is empty".to_string());
                }
                if out.is_empty() {
                    if let Err(e) = self.game_config().and_then(|c| c.validate()) {
                        out.push(e.to_string());
                    }
                }
            }
        }
        for a in &self.assertions {
            if a.stage == Some(0) {
                out.push(format!("assertion `{}`: stages start at 1", a.describe()));
            }
            if let Quantity::Marginal(s) | Quantity::PostGameFloor(s) = &a.quantity {
                if !ids.contains(s) {
                    out.push(format!("assertion `{}`: unknown stream `{s}`", a.describe()));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(d.join("; ")))
        }
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, horizon: Option<usize>, seed: Option<u64>, mode: Option<UpdateMode>) -> Self {
        if horizon.is_some() {
            self.horizon = horizon;
        }
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(m) = mode {
            self.mode = m;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "two",
        "streams": [{"id": "T", "kind": "constant_feed", "core": ["a"]}],
        "hypotheses": [
            {"id": "h1", "schedules": {"T": {"constant": 0.8}}},
            {"id": "h2", "schedules": {"T": {"constant": 0.2}}}
        ],
        "priors": {"h1": 0.6, "h2": 0.4},
        "experiment": {"kind": "reproduce", "observe": "T"}
    }"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.steps(), DEFAULT_STEPS);
        assert_eq!(s.mode, UpdateMode::Chained);
        assert_eq!(s.lattice().unwrap().depth(), 1);
    }

    #[test]
    fn diagnostics_collect_every_problem() {
        let mut s: Scenario = serde_json::from_str(MINIMAL).unwrap();
        s.priors.insert("h1".into(), 0.9);
        s.experiment = Experiment::Reproduce { observe: "X".into(), track: vec![] };
        let d = s.diagnostics();
        assert!(d.iter().any(|m| m.contains("sum to 1")), "{d:?}");
        assert!(d.iter().any(|m| m.contains("unknown stream `X`")), "{d:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"name\"", "\"nmae\": 1, \"name\"");
        assert!(matches!(Scenario::from_json(&text), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn assertion_ops() {
        let a = Assertion { quantity: Quantity::Rounds, stage: None, op: Op::Ge, value: 10.0, tol: Some(0.0), note: None };
        assert!(a.holds(10.0, 1e-9));
        assert!(!a.holds(9.5, 1e-9));
    }
}
