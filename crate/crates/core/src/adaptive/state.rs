use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::dataset::ResponseRecord;
use crate::error::{Error, Result};

/// Number of reveal steps in a standard episode.
pub const DEFAULT_BUDGET: usize = 10;

/// One answer granted to the model by [`SelectionState::reveal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Revealed {
    pub question_id: u64,
    pub answer_value: u8,
    pub is_correct: bool,
}

/// Read-only truth for (student, question) pairs.
pub trait AnswerSource {
    /// `(answer_value, is_correct)`, or `None` if the pair has no answer.
    fn answer(&self, user_id: u64, question_id: u64) -> Option<(u8, bool)>;
}

/// Answer source backed by a table of response records.
#[derive(Debug, Clone, Default)]
pub struct RecordEnvironment {
    answers: HashMap<(u64, u64), (u8, bool)>,
}

impl RecordEnvironment {
    /// Errors on a repeated (student, question) pair.
    pub fn new(records: &[ResponseRecord]) -> Result<Self> {
        let mut answers = HashMap::with_capacity(records.len());
        for r in records {
            if answers.insert(r.pair(), (r.answer_value, r.is_correct)).is_some() {
                return Err(Error::DuplicatePair { user_id: r.user_id, question_id: r.question_id });
            }
        }
        Ok(RecordEnvironment { answers })
    }

    /// Questions each student answered, ascending.
    pub fn answered(&self) -> BTreeMap<u64, BTreeSet<u64>> {
        let mut out: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for &(u, q) in self.answers.keys() {
            out.entry(u).or_default().insert(q);
        }
        out
    }
}

impl AnswerSource for RecordEnvironment {
    fn answer(&self, user_id: u64, question_id: u64) -> Option<(u8, bool)> {
        self.answers.get(&(user_id, question_id)).copied()
    }
}

/// Per-student masks and observations for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    students: Vec<u64>,
    observed: BTreeMap<u64, Vec<Revealed>>,
    candidates: BTreeMap<u64, BTreeSet<u64>>,
    targets: BTreeMap<u64, BTreeSet<u64>>,
    step: usize,
    budget: usize,
}

/// Starts an episode. Students missing from a mask get an empty set.
///
/// A budget of 0 is accepted and yields an episode that only predicts.
pub fn init_episode(
    students: &[u64],
    mut candidate_masks: BTreeMap<u64, BTreeSet<u64>>,
    mut target_masks: BTreeMap<u64, BTreeSet<u64>>,
    budget: usize,
) -> Result<SelectionState> {
    if students.is_empty() {
        return Err(Error::InvalidArgument("episode has no students".into()));
    }
    let mut seen = BTreeSet::new();
    for &s in students {
        if !seen.insert(s) {
            return Err(Error::InvalidArgument(format!("student {s} listed twice")));
        }
    }
    if let Some(s) = candidate_masks.keys().chain(target_masks.keys()).find(|s| !seen.contains(s)) {
        return Err(Error::UnknownId { kind: "student", id: *s });
    }
    let mut candidates = BTreeMap::new();
    let mut targets = BTreeMap::new();
    for &s in students {
        let c = candidate_masks.remove(&s).unwrap_or_default();
        let t = target_masks.remove(&s).unwrap_or_default();
        if let Some(q) = c.intersection(&t).next() {
            return Err(Error::Contract(format!("question {q} is both candidate and target for student {s}")));
        }
        candidates.insert(s, c);
        targets.insert(s, t);
    }
    Ok(SelectionState {
        students: students.to_vec(),
        observed: students.iter().map(|&s| (s, Vec::new())).collect(),
        candidates,
        targets,
        step: 0,
        budget,
    })
}

impl SelectionState {
    pub fn students(&self) -> &[u64] {
        &self.students
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.budget
    }

    /// Remaining queryable questions.
    pub fn candidates(&self, student: u64) -> &BTreeSet<u64> {
        &self.candidates[&student]
    }

    pub fn targets(&self, student: u64) -> &BTreeSet<u64> {
        &self.targets[&student]
    }

    /// Answers revealed so far, in reveal order.
    pub fn observed(&self, student: u64) -> &[Revealed] {
        &self.observed[&student]
    }

    /// Grants one answer per selected student and advances the step.
    ///
    /// The whole batch is validated before anything is revealed.
    pub fn reveal<E: AnswerSource + ?Sized>(
        &mut self,
        environment: &E,
        selections: &BTreeMap<u64, u64>,
    ) -> Result<Vec<(u64, Revealed)>> {
        if self.is_finished() {
            return Err(Error::Contract(format!("budget of {} steps exhausted", self.budget)));
        }
        let mut batch = Vec::with_capacity(selections.len());
        for (&s, &q) in selections {
            let remaining = self.candidates.get(&s).ok_or(Error::UnknownId { kind: "student", id: s })?;
            if !remaining.contains(&q) {
                let why = if self.observed[&s].iter().any(|r| r.question_id == q) {
                    "was already revealed"
                } else {
                    "is not a candidate"
                };
                return Err(Error::Contract(format!("question {q} for student {s} {why}")));
            }
            let (answer_value, is_correct) = environment.answer(s, q).ok_or_else(|| {
                Error::Contract(format!("environment has no answer for student {s}, question {q}"))
            })?;
            batch.push((s, Revealed { question_id: q, answer_value, is_correct }));
        }
        for &(s, r) in &batch {
            self.candidates.get_mut(&s).expect("validated").remove(&r.question_id);
            self.observed.get_mut(&s).expect("validated").push(r);
        }
        self.step += 1;
        Ok(batch)
    }
}
