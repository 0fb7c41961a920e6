use std::collections::HashMap;

use super::meta::AnswerMeta;
use super::record::ResponseRecord;
use crate::error::{Error, Result};

/// Keeps only the latest answer per (student, question).
///
/// Latest means maximum `date_answered`; equal timestamps go to the larger
/// answer id. Output order follows the first appearance of each pair.
pub fn dedupe_latest(
    records: &[ResponseRecord],
    answers: &HashMap<u64, AnswerMeta>,
) -> Result<Vec<ResponseRecord>> {
    let mut slot: HashMap<(u64, u64), usize> = HashMap::with_capacity(records.len());
    let mut out: Vec<ResponseRecord> = Vec::with_capacity(records.len());
    let mut keys = Vec::with_capacity(records.len());
    for r in records {
        let meta = answers
            .get(&r.answer_id)
            .ok_or(Error::UnknownId { kind: "answer", id: r.answer_id })?;
        let key = (meta.date_answered, r.answer_id);
        match slot.get(&r.pair()) {
            Some(&i) => {
                if key > keys[i] {
                    keys[i] = key;
                    out[i] = *r;
                }
            }
            None => {
                slot.insert(r.pair(), out.len());
                out.push(*r);
                keys.push(key);
            }
        }
    }
    Ok(out)
}

/// Drops sparse questions, then sparse students, in two single passes.
///
/// The question pass counts answers over the input; the student pass counts
/// over what survived the question pass. The passes are not repeated, so a
/// question can end up below `min_q` after the student pass.
pub fn filter_min_counts(records: &[ResponseRecord], min_q: usize, min_s: usize) -> Vec<ResponseRecord> {
    let mut per_question: HashMap<u64, usize> = HashMap::new();
    for r in records {
        *per_question.entry(r.question_id).or_default() += 1;
    }
    let after_questions: Vec<ResponseRecord> =
        records.iter().filter(|r| per_question[&r.question_id] >= min_q).copied().collect();

    let mut per_student: HashMap<u64, usize> = HashMap::new();
    for r in &after_questions {
        *per_student.entry(r.user_id).or_default() += 1;
    }
    after_questions.into_iter().filter(|r| per_student[&r.user_id] >= min_s).collect()
}
