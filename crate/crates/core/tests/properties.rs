use std::collections::BTreeMap;

use proptest::prelude::*;
use testimony_core::belief::{chained_update, pwmc_extend, simulate, BeliefState, UpdateMode};
use testimony_core::generator::{build_stream, scan_threats, ReactiveAttackEngine, StreamKind, StreamSpec};
use testimony_core::hypothesis::EvaluationHypothesis;
use testimony_core::lattice::{hierarchical_step, hierarchical_update, HypothesisLattice};
use testimony_core::literal::Literal;
use testimony_core::propositions as props;
use testimony_core::schedule::LikelihoodSchedule;
use testimony_core::stream::TestimonyStream;

fn feed() -> TestimonyStream {
    TestimonyStream::from_literals("T", &[&["a"]]).unwrap().open_ended()
}

fn schedule() -> impl Strategy<Value = LikelihoodSchedule> {
    prop_oneof![
        (0.01..0.99f64).prop_map(LikelihoodSchedule::constant),
        (0.01..0.99f64, 0.01..0.99f64, 0.05..1.0f64).prop_map(|(s, l, r)| LikelihoodSchedule::monotone(s, l, r)),
    ]
}

fn config(constant: bool) -> impl Strategy<Value = (Vec<EvaluationHypothesis>, BTreeMap<String, f64>)> {
    let sched = if constant { (0.01..0.99f64).prop_map(LikelihoodSchedule::constant).boxed() } else { schedule().boxed() };
    prop::collection::vec((sched, 0.0..1.0f64), 2..5).prop_filter_map("some prior mass", |items| {
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        if total <= 1e-6 {
            return None;
        }
        let hyps = items.iter().enumerate().map(|(i, (s, _))| EvaluationHypothesis::new(format!("h{i}")).with("T", s.clone())).collect();
        let priors = items.iter().enumerate().map(|(i, (_, w))| (format!("h{i}"), w / total)).collect();
        Some((hyps, priors))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_updates_stay_normalized((hyps, priors) in config(false), steps in 1usize..60) {
        let state = BeliefState::new(&hyps, &priors, &["T".into()], UpdateMode::Standard).unwrap();
        let end = simulate(&state, &hyps, &feed(), steps).unwrap();
        for snap in &end.history {
            let sum: f64 = snap.hypothesis_probs.values().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "sum {sum} at step {}", snap.step);
        }
    }

    #[test]
    fn modes_agree_on_constant_schedules((hyps, priors) in config(true), steps in 1usize..60) {
        let run = |mode| {
            let s = BeliefState::new(&hyps, &priors, &["T".into()], mode).unwrap();
            simulate(&s, &hyps, &feed(), steps).unwrap()
        };
        let (a, b) = (run(UpdateMode::Chained), run(UpdateMode::Standard));
        for (x, y) in a.history.iter().zip(&b.history) {
            for (k, v) in &x.hypothesis_probs {
                prop_assert!((v - y.hypothesis_probs[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_priors_stay_zero((hyps, mut priors) in config(false), steps in 1usize..40) {
        priors.insert("h0".into(), 0.0);
        let rest: f64 = priors.values().sum();
        if rest <= 1e-9 {
            return Ok(());
        }
        priors.values_mut().for_each(|v| *v /= rest);
        for mode in [UpdateMode::Chained, UpdateMode::Standard] {
            let s = BeliefState::new(&hyps, &priors, &["T".into()], mode).unwrap();
            let end = simulate(&s, &hyps, &feed(), steps).unwrap();
            prop_assert!(end.prob_trace("h0").iter().all(|p| *p == 0.0));
        }
    }

    #[test]
    fn pwmc_closure_is_exact(sched in schedule(), stage in 1usize..200) {
        let h = EvaluationHypothesis::new("h").with("T", sched.clone()).pwmc("T");
        let t = TestimonyStream::from_literals("T", &[&["a", "b"]]).unwrap().open_ended();
        for phi in ["~a", "c", "~c", "d"] {
            let ext = pwmc_extend(&h, &t, &phi.parse::<Literal>().unwrap(), stage).unwrap();
            prop_assert_eq!(ext + sched.value(stage), 1.0);
        }
    }

    #[test]
    fn depth_one_hierarchy_is_chained_updating((hyps, priors) in config(true), steps in 1usize..30) {
        let lattice = HypothesisLattice::flat(hyps.clone(), priors.clone()).unwrap();
        let mut l = lattice.clone();
        let mut h = l.belief_state(&["T".into()], UpdateMode::Chained);
        let mut c = BeliefState::new(&hyps, &priors, &["T".into()], UpdateMode::Chained).unwrap();
        for _ in 0..steps {
            (l, h) = hierarchical_update(&l, &h, &feed(), &["T".into()]).unwrap();
            c = chained_update(&c, &hyps, &feed()).unwrap();
        }
        prop_assert_eq!(h.hypothesis_probs, c.hypothesis_probs);
    }

    #[test]
    fn random_lattices_normalize_to_rational(seed in any::<u64>(), depth in 2usize..5) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let l = props::random_lattice(&mut rng, depth).unwrap();
        prop_assert!(l.rationality_normalize().unwrap().is_rational(1e-9));
    }
}

/// A generated complete stream and its lattice after threats are answered.
fn generated(seed: u64) -> (TestimonyStream, HypothesisLattice, TestimonyStream) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let lattice = props::random_lattice(&mut rng, 3).unwrap();
    let (t, u, _) = props::random_streams(&mut rng).unwrap();
    let threats = scan_threats(&lattice, &t, std::slice::from_ref(&u), 1, 200, 1e-6).unwrap();
    let (t2, l2) = ReactiveAttackEngine::new("T").reactive_extend(&t, &lattice, threats).unwrap();
    (t2, l2, u)
}

fn hierarchical_trace(lattice: &HypothesisLattice, t: &TestimonyStream, stages: usize) -> Vec<BTreeMap<String, f64>> {
    let mut l = lattice.clone();
    let mut b = l.belief_state(&["T".into(), "U".into()], UpdateMode::Chained);
    for _ in 0..stages {
        (l, b) = hierarchical_step(&l, b, t, &["T".into()]).unwrap();
    }
    b.history.iter().map(|s| s.hypothesis_probs.clone()).collect()
}

#[test]
fn explicit_round_trip_reproduces_traces() {
    for seed in 0..5 {
        let (t, lattice, _) = generated(seed);
        let stages = 120;
        let long = t.materialize(stages + 1).unwrap();
        let spec = StreamSpec {
            id: "T".into(),
            alphabet: Vec::new(),
            kind: StreamKind::Explicit { stages: long.stages().iter().map(|s| s.iter().cloned().collect()).collect() },
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: StreamSpec = serde_json::from_str(&json).unwrap();
        let rebuilt = build_stream(&back, stages + 1).unwrap();
        assert_eq!(rebuilt.stages(), long.stages());
        assert_eq!(hierarchical_trace(&lattice, &t, stages), hierarchical_trace(&lattice, &rebuilt, stages));
    }
}

#[test]
fn trusted_self_chain_gains_mass() {
    // a potentially trustworthy supporter of T is eventually nondecreasing
    let horizon = 200;
    for seed in 0..10 {
        let (t, lattice, _) = generated(seed);
        let trace = hierarchical_trace(&lattice, &t, horizon);
        let series: Vec<f64> = trace.iter().map(|m| m["T:self:1"]).collect();
        let from = (0..=horizon / 2).find(|&k| series[k..].windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(from.is_some(), "seed {seed}: not eventually nondecreasing");
    }
}
