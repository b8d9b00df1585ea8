use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::literal::Literal;

pub type LiteralSet = BTreeSet<Literal>;

/// A staged, cumulative body of testimony. Stages are indexed from 1.
///
/// An open-ended stream repeats its last stage forever, which is how constant
/// feeds are extended past their materialized length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestimonyStream {
    pub id: String,
    stages: Vec<LiteralSet>,
    #[serde(default)]
    open_ended: bool,
}

impl TestimonyStream {
    /// Builds a stream, rejecting empty or non-cumulative stage lists.
    pub fn new(id: impl Into<String>, stages: Vec<LiteralSet>) -> Result<Self> {
        let id = id.into();
        if stages.is_empty() {
            return Err(Error::EmptyStream(id));
        }
        for (i, pair) in stages.windows(2).enumerate() {
            if !pair[0].is_subset(&pair[1]) {
                return Err(Error::NonCumulative { stream: id, stage: i + 2 });
            }
        }
        Ok(TestimonyStream { id, stages, open_ended: false })
    }

    pub fn from_literals(id: impl Into<String>, stages: &[&[&str]]) -> Result<Self> {
        let mut sets = Vec::with_capacity(stages.len());
        for stage in stages {
            let mut set = LiteralSet::new();
            for s in stage.iter() {
                set.insert(s.parse()?);
            }
            sets.push(set);
        }
        Self::new(id, sets)
    }

    pub fn open_ended(mut self) -> Self {
        self.open_ended = true;
        self
    }

    pub fn is_open_ended(&self) -> bool {
        self.open_ended
    }

    /// Number of materialized stages.
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn has_stage(&self, stage: usize) -> bool {
        stage >= 1 && (stage <= self.stages.len() || self.open_ended)
    }

    pub fn stage(&self, stage: usize) -> Result<&LiteralSet> {
        if !self.has_stage(stage) {
            return Err(Error::StageOutOfRange {
                stream: self.id.clone(),
                stage,
                len: self.stages.len(),
            });
        }
        Ok(&self.stages[stage.min(self.stages.len()) - 1])
    }

    pub fn last_stage(&self) -> &LiteralSet {
        self.stages.last().expect("streams are never empty")
    }

    pub fn stages(&self) -> &[LiteralSet] {
        &self.stages
    }

    /// Appends a stage; the new stage always contains the previous one.
    pub fn push_stage(&mut self, extra: impl IntoIterator<Item = Literal>) {
        let mut next = self.last_stage().clone();
        next.extend(extra);
        self.stages.push(next);
    }

    /// Explicit form: the same stream with the open-ended flag dropped and
    /// `len` stages materialized.
    pub fn materialize(&self, len: usize) -> Result<TestimonyStream> {
        let stages = (1..=len).map(|i| self.stage(i).cloned()).collect::<Result<Vec<_>>>()?;
        TestimonyStream::new(self.id.clone(), stages)
    }
}

fn set_consistent(set: &LiteralSet) -> bool {
    set.iter().filter(|l| l.positive).all(|l| !set.contains(&l.negated()))
}

/// True iff no stage contains both signs of an atom.
pub fn stream_consistent(stream: &TestimonyStream) -> Result<bool> {
    if stream.is_empty() {
        return Err(Error::EmptyStream(stream.id.clone()));
    }
    Ok(stream.stages.iter().all(set_consistent))
}

pub fn literal_set_consistent(set: &LiteralSet) -> bool {
    set_consistent(set)
}

/// True iff the union of the two streams at `stage` clashes on some atom.
pub fn streams_conflict(a: &TestimonyStream, b: &TestimonyStream, stage: usize) -> Result<bool> {
    let sa = a.stage(stage)?;
    let sb = b.stage(stage)?;
    let union: LiteralSet = sa.union(sb).cloned().collect();
    Ok(!set_consistent(&union))
}

/// Entailment is literal membership in the cumulative stage.
pub fn entails(stream: &TestimonyStream, phi: &Literal, stage: usize) -> Result<bool> {
    Ok(stream.stage(stage)?.contains(phi))
}

/// Whether any stage up to `stage` entails `phi`.
pub fn entailed_by_some_stage(stream: &TestimonyStream, phi: &Literal, stage: usize) -> Result<bool> {
    // cumulative: stage `stage` contains every earlier one
    entails(stream, phi, stage)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(id: &str, stages: &[&[&str]]) -> TestimonyStream {
        TestimonyStream::from_literals(id, stages).unwrap()
    }

    #[test]
    fn consistency() {
        assert!(stream_consistent(&s("T", &[&["a"], &["a", "b"]])).unwrap());
        assert!(!stream_consistent(&s("T", &[&["a", "~a"]])).unwrap());
        assert!(stream_consistent(&s("T", &[&["a"], &["a", "~b"], &["a", "~b", "c"]])).unwrap());
    }

    #[test]
    fn empty_stream_rejected() {
        assert_eq!(TestimonyStream::new("T", vec![]), Err(Error::EmptyStream("T".into())));
    }

    #[test]
    fn non_cumulative_rejected() {
        let err = TestimonyStream::from_literals("T", &[&["a"], &["b"]]).unwrap_err();
        assert!(matches!(err, Error::NonCumulative { stage: 2, .. }));
    }

    #[test]
    fn conflicts() {
        assert!(streams_conflict(&s("T", &[&["a"]]), &s("U", &[&["~a"]]), 1).unwrap());
        assert!(!streams_conflict(&s("T", &[&["a"]]), &s("U", &[&["b"]]), 1).unwrap());
        assert!(streams_conflict(&s("T", &[&["a", "b", "~c"]]), &s("U", &[&["b", "c"]]), 1).unwrap());
        assert!(matches!(
            streams_conflict(&s("T", &[&["a"]]), &s("U", &[&["b"]]), 2),
            Err(Error::StageOutOfRange { stage: 2, .. })
        ));
    }

    #[test]
    fn entailment_is_membership() {
        let t = s("T", &[&["a"], &["a", "b"], &["a", "b", "c"]]);
        let b: Literal = "b".parse().unwrap();
        assert!(entails(&t, &b, 2).unwrap());
        assert!(!entails(&t, &"c".parse().unwrap(), 2).unwrap());
        assert!(entails(&t, &b, 3).unwrap());
        assert!(!entails(&t, &b, 1).unwrap());
        assert!(entails(&t, &b, 4).is_err());
    }

    #[test]
    fn open_ended_repeats_last_stage() {
        let t = s("T", &[&["a"], &["a", "b"]]).open_ended();
        assert_eq!(t.stage(50).unwrap(), t.stage(2).unwrap());
        assert_eq!(t.materialize(4).unwrap().len(), 4);
    }
}
