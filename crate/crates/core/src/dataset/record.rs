use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvio::{self, Columns};
use crate::error::{Error, Result};

/// Column names of the answer-record files, in the order they are written.
pub const RECORD_COLUMNS: [&str; 6] =
    ["QuestionId", "UserId", "AnswerId", "AnswerValue", "CorrectAnswer", "IsCorrect"];

/// One answer event: a student choosing an option on a question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub question_id: u64,
    pub user_id: u64,
    pub answer_id: u64,
    /// Chosen option, 1..=4.
    pub answer_value: u8,
    /// Correct option, 1..=4.
    pub correct_answer: u8,
    pub is_correct: bool,
}

impl ResponseRecord {
    /// Builds a record whose correctness flag is derived from the two options.
    pub fn answered(question_id: u64, user_id: u64, answer_id: u64, answer_value: u8, correct_answer: u8) -> Self {
        ResponseRecord {
            question_id,
            user_id,
            answer_id,
            answer_value,
            correct_answer,
            is_correct: answer_value == correct_answer,
        }
    }

    /// Checks the option domain and the correctness consistency rule.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(1..=4).contains(&self.answer_value) {
            return Err(format!("AnswerValue {} outside 1..4", self.answer_value));
        }
        if !(1..=4).contains(&self.correct_answer) {
            return Err(format!("CorrectAnswer {} outside 1..4", self.correct_answer));
        }
        if self.is_correct != (self.answer_value == self.correct_answer) {
            return Err(format!(
                "IsCorrect {} inconsistent with AnswerValue {} / CorrectAnswer {}",
                u8::from(self.is_correct),
                self.answer_value,
                self.correct_answer
            ));
        }
        Ok(())
    }

    pub fn pair(&self) -> (u64, u64) {
        (self.user_id, self.question_id)
    }
}

/// Result of a parse: kept records plus the number of rows dropped in lenient mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedRecords {
    pub records: Vec<ResponseRecord>,
    pub dropped: usize,
}

pub fn parse_records(path: impl AsRef<Path>, strict: bool) -> Result<ParsedRecords> {
    let path = path.as_ref();
    let file = csvio::open(path)?;
    parse_records_from(file, strict, &path.display().to_string())
}

/// Reads answer records from any CSV source. `context` names the source in errors.
pub fn parse_records_from<R: Read>(input: R, strict: bool, context: &str) -> Result<ParsedRecords> {
    let mut rdr = csvio::reader(input);
    let cols = Columns::resolve(rdr.headers()?, &RECORD_COLUMNS, context)?;
    let mut out = ParsedRecords::default();
    for row in rdr.records() {
        let row = row?;
        let line = csvio::line_of(&row);
        let int = |slot: usize| csvio::parse_u64(cols.get(&row, slot), RECORD_COLUMNS[slot], line);
        let answer_value = int(3)?;
        let correct_answer = int(4)?;
        let is_correct = int(5)?;
        let in_domain = answer_value <= u8::MAX as u64 && correct_answer <= u8::MAX as u64 && is_correct <= 1;
        let record = ResponseRecord {
            question_id: int(0)?,
            user_id: int(1)?,
            answer_id: int(2)?,
            answer_value: answer_value.min(u8::MAX as u64) as u8,
            correct_answer: correct_answer.min(u8::MAX as u64) as u8,
            is_correct: is_correct == 1,
        };
        let verdict = if in_domain {
            record.validate()
        } else {
            Err(format!("values out of domain (AnswerValue {answer_value}, CorrectAnswer {correct_answer}, IsCorrect {is_correct})"))
        };
        match verdict {
            Ok(()) => out.records.push(record),
            Err(msg) if strict => return Err(Error::row(line, msg)),
            Err(msg) => {
                log::debug!("{context}: dropping row {line}: {msg}");
                out.dropped += 1;
            }
        }
    }
    Ok(out)
}

pub fn write_records<W: Write>(output: W, records: &[ResponseRecord]) -> Result<()> {
    let mut w = csvio::writer(output);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.question_id.to_string(),
            r.user_id.to_string(),
            r.answer_id.to_string(),
            r.answer_value.to_string(),
            r.correct_answer.to_string(),
            u8::from(r.is_correct).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
