use std::collections::HashMap;
use std::hash::Hash;

use crate::dataset::{AnswerMeta, QuestionMeta, ResponseRecord, StudentMeta};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Borrowed metadata tables keyed by external id.
#[derive(Debug, Clone, Copy)]
pub struct MetaTables<'a> {
    pub students: &'a HashMap<u64, StudentMeta>,
    pub questions: &'a HashMap<u64, QuestionMeta>,
    pub answers: &'a HashMap<u64, AnswerMeta>,
}

/// A record together with whatever metadata resolves for it.
#[derive(Debug, Clone, Copy)]
pub struct RecordContext<'a> {
    pub record: &'a ResponseRecord,
    pub student: Option<&'a StudentMeta>,
    pub question: Option<&'a QuestionMeta>,
    pub answer: Option<&'a AnswerMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStat<F> {
    /// Smoothed correctness rate.
    pub mean: F,
    pub count: usize,
}

/// Smoothed correctness rate per segment.
///
/// The mean of group `g` is `(Σ correct + α·global) / (n_g + α)`. In strict
/// mode every record must resolve its student, question and answer metadata.
pub fn target_encode<K, F>(
    records: &[ResponseRecord],
    tables: MetaTables<'_>,
    strict: bool,
    alpha: F,
    key: impl Fn(&RecordContext<'_>) -> K,
) -> Result<HashMap<K, GroupStat<F>>>
where
    K: Hash + Eq,
    F: Scalar,
{
    if records.is_empty() {
        return Ok(HashMap::new());
    }
    let global = F::of_usize(records.iter().filter(|r| r.is_correct).count()) / F::of_usize(records.len());
    let mut sums: HashMap<K, (usize, usize)> = HashMap::new();
    for record in records {
        let ctx = RecordContext {
            record,
            student: tables.students.get(&record.user_id),
            question: tables.questions.get(&record.question_id),
            answer: tables.answers.get(&record.answer_id),
        };
        if strict {
            if ctx.student.is_none() {
                return Err(Error::UnknownId { kind: "user", id: record.user_id });
            }
            if ctx.question.is_none() {
                return Err(Error::UnknownId { kind: "question", id: record.question_id });
            }
            if ctx.answer.is_none() {
                return Err(Error::UnknownId { kind: "answer", id: record.answer_id });
            }
        }
        let entry = sums.entry(key(&ctx)).or_default();
        entry.0 += usize::from(record.is_correct);
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(k, (correct, count))| {
            let mean = (F::of_usize(correct) + alpha * global) / (F::of_usize(count) + alpha);
            (k, GroupStat { mean, count })
        })
        .collect())
}
