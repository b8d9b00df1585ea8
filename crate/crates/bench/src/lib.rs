//! Benchmark fixtures.

use std::collections::BTreeMap;

use testimony_core::belief::{BeliefState, UpdateMode};
use testimony_core::hypothesis::EvaluationHypothesis;
use testimony_core::schedule::LikelihoodSchedule;
use testimony_core::stream::TestimonyStream;

pub fn feed() -> TestimonyStream {
    TestimonyStream::from_literals("T", &[&["a"]]).expect("valid literals").open_ended()
}

/// `n` hypotheses with evenly spread constant likelihoods and uniform priors.
pub fn wide(n: usize, mode: UpdateMode) -> (Vec<EvaluationHypothesis>, BeliefState) {
    let hyps: Vec<EvaluationHypothesis> = (0..n)
        .map(|i| EvaluationHypothesis::new(format!("h{i}")).with("T", LikelihoodSchedule::constant((i + 1) as f64 / (n + 1) as f64)))
        .collect();
    let priors: BTreeMap<String, f64> = hyps.iter().map(|h| (h.id.clone(), 1.0 / n as f64)).collect();
    let state = BeliefState::new(&hyps, &priors, &["T".into()], mode).expect("normalized priors");
    (hyps, state)
}
