//! Competition file formats: scoring prediction files and filling templates.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::dataset::{csv_reader, csv_writer, line_of, parse_u64, Columns, ResponseRecord};
use crate::error::{Error, Result};
use crate::predict::{accuracy, ConfusionMatrix, Mode, ResponseModel};
use crate::quality::QualityRanking;
use crate::scalar::Scalar;

/// The pair-level prediction tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairTask {
    /// Correctness, column `IsCorrect`, values 0 or 1.
    Correctness,
    /// Chosen option, column `AnswerValue`, values 1 to 4.
    AnswerChoice,
}

impl PairTask {
    pub fn number(self) -> u8 {
        match self {
            PairTask::Correctness => 1,
            PairTask::AnswerChoice => 2,
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            PairTask::Correctness => "IsCorrect",
            PairTask::AnswerChoice => "AnswerValue",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            PairTask::Correctness => Mode::Binary,
            PairTask::AnswerChoice => Mode::Categorical,
        }
    }

    fn check(self, value: u64, line: usize) -> Result<u8> {
        let ok = match self {
            PairTask::Correctness => value <= 1,
            PairTask::AnswerChoice => (1..=4).contains(&value),
        };
        if ok {
            Ok(value as u8)
        } else {
            Err(Error::row(line, format!("{} value {value} is out of range", self.column())))
        }
    }

    fn truth(self, record: &ResponseRecord) -> u8 {
        match self {
            PairTask::Correctness => u8::from(record.is_correct),
            PairTask::AnswerChoice => record.answer_value,
        }
    }
}

impl fmt::Display for PairTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "task {}", self.number())
    }
}

impl FromStr for PairTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(PairTask::Correctness),
            "2" => Ok(PairTask::AnswerChoice),
            other => Err(Error::InvalidArgument(format!("`{other}` is not a pair-prediction task (1 or 2)"))),
        }
    }
}

/// Ranking column name in quality submissions.
pub const RANKING_COLUMN: &str = "ranking";

/// Reads `UserId, QuestionId, <task column>` predictions. Duplicate pairs and
/// out-of-range values are errors.
pub fn read_pair_predictions<R: Read>(input: R, task: PairTask, context: &str) -> Result<HashMap<(u64, u64), u8>> {
    let mut rdr = csv_reader(input);
    let cols = Columns::resolve(rdr.headers()?, &["UserId", "QuestionId", task.column()], context)?;
    let mut out = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let user = parse_u64(cols.get(&row, 0), "UserId", line)?;
        let question = parse_u64(cols.get(&row, 1), "QuestionId", line)?;
        let value = task.check(parse_u64(cols.get(&row, 2), task.column(), line)?, line)?;
        if out.insert((user, question), value).is_some() {
            return Err(Error::DuplicatePair { user_id: user, question_id: question });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub n: usize,
}

/// Scores predictions against truth records. Every truth pair must be
/// predicted, and every prediction must match a truth pair.
pub fn score_pairs(predictions: &HashMap<(u64, u64), u8>, truth: &[ResponseRecord], task: PairTask) -> Result<PairScore> {
    let mut seen = HashSet::with_capacity(truth.len());
    let mut predicted = Vec::with_capacity(truth.len());
    let mut actual = Vec::with_capacity(truth.len());
    for r in truth {
        let pair = r.pair();
        if !seen.insert(pair) {
            return Err(Error::DuplicatePair { user_id: pair.0, question_id: pair.1 });
        }
        let p = predictions.get(&pair).ok_or_else(|| {
            Error::Contract(format!("no prediction for user {} and question {}", pair.0, pair.1))
        })?;
        predicted.push(*p);
        actual.push(task.truth(r));
    }
    if let Some(extra) = predictions.keys().find(|k| !seen.contains(k)) {
        return Err(Error::Contract(format!("prediction for user {} and question {} has no truth row", extra.0, extra.1)));
    }
    let confusion = match task {
        PairTask::Correctness => ConfusionMatrix::binary(&predicted, &actual)?,
        PairTask::AnswerChoice => ConfusionMatrix::categorical(&predicted, &actual)?,
    };
    Ok(PairScore { accuracy: accuracy(&predicted, &actual)?, confusion, n: truth.len() })
}

/// Writes a confusion matrix as CSV: a `truth` column then one column per predicted label.
pub fn write_confusion<W: Write>(output: W, confusion: &ConfusionMatrix) -> Result<()> {
    let mut w = csv_writer(output);
    let labels: Vec<String> = (0..confusion.counts.len()).map(|i| (confusion.first_label as usize + i).to_string()).collect();
    w.write_record(std::iter::once("truth".to_string()).chain(labels.iter().map(|l| format!("pred_{l}"))))?;
    for (label, row) in labels.iter().zip(&confusion.counts) {
        w.write_record(std::iter::once(label.clone()).chain(row.iter().map(usize::to_string)))?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))
}

/// Copies `template` to `output`, setting `column` on every row from `value`.
/// The column is appended when the template lacks it; row order and all
/// other fields are preserved. Returns the number of rows written.
fn fill_column<R: Read, W: Write>(
    template: R,
    output: W,
    column: &str,
    context: &str,
    mut value: impl FnMut(&csv::StringRecord, usize) -> Result<String>,
) -> Result<usize> {
    let mut rdr = csv_reader(template);
    let mut headers = rdr.headers()?.clone();
    let slot = match headers.iter().position(|h| h.trim() == column) {
        Some(i) => i,
        None => {
            headers.push_field(column);
            headers.len() - 1
        }
    };
    let mut w = csv_writer(output);
    w.write_record(&headers)?;
    let mut rows = 0;
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let v = value(&row, line).map_err(|e| match e {
            Error::UnknownId { kind, id } => Error::row(line, format!("unknown {kind} {id} in {context}")),
            other => other,
        })?;
        let fields: Vec<&str> = (0..headers.len()).map(|i| if i == slot { v.as_str() } else { row.get(i).unwrap_or("") }).collect();
        w.write_record(&fields)?;
        rows += 1;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(rows)
}

/// Fills a pair template (`UserId, QuestionId, ...`) with hard labels from `model`.
pub fn fill_pair_template<F: Scalar, M: ResponseModel<F> + ?Sized, R: Read, W: Write>(
    template: R,
    output: W,
    task: PairTask,
    model: &M,
    context: &str,
) -> Result<usize> {
    let mut body = Vec::new();
    let mut input = template;
    input.read_to_end(&mut body).map_err(|e| Error::io(context, e))?;
    let cols = Columns::resolve(csv_reader(&body[..]).headers()?, &["UserId", "QuestionId"], context)?;
    let mut seen = HashSet::new();
    fill_column(&body[..], output, task.column(), context, |row, line| {
        let c = &cols;
        let user = parse_u64(c.get(row, 0), "UserId", line)?;
        let question = parse_u64(c.get(row, 1), "QuestionId", line)?;
        if !seen.insert((user, question)) {
            return Err(Error::DuplicatePair { user_id: user, question_id: question });
        }
        Ok(model.predict(user, question, task.mode())?.label().to_string())
    })
}

/// Fills a question template (`QuestionId, ...`) with ranks from `ranking`,
/// re-ranked to `1..=N` over the template's questions.
pub fn fill_ranking_template<R: Read, W: Write>(
    template: R,
    output: W,
    ranking: &QualityRanking,
    context: &str,
) -> Result<usize> {
    let mut body = Vec::new();
    let mut input = template;
    input.read_to_end(&mut body).map_err(|e| Error::io(context, e))?;
    let mut rdr = csv_reader(&body[..]);
    let cols = Columns::resolve(rdr.headers()?, &["QuestionId"], context)?;
    let mut questions = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let q = parse_u64(cols.get(&row, 0), "QuestionId", line)?;
        if !seen.insert(q) {
            return Err(Error::row(line, format!("question {q} listed twice in {context}")));
        }
        if ranking.rank(q).is_none() {
            return Err(Error::Mismatch(format!("template question {q} is not in the ranking")));
        }
        questions.push(q);
    }
    let restricted = ranking.restrict(&questions)?;
    let ranks: BTreeMap<u64, usize> = restricted.ranks().clone();
    let mut i = 0;
    fill_column(&body[..], output, RANKING_COLUMN, context, |_, _| {
        let r = ranks[&questions[i]];
        i += 1;
        Ok(r.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::Prediction;

    struct Constant;

    impl ResponseModel<f64> for Constant {
        fn supports(&self, _: Mode) -> bool {
            true
        }

        fn predict(&self, user: u64, question: u64, mode: Mode) -> Result<Prediction<f64>> {
            if question == 99 {
                return Err(Error::UnknownId { kind: "question", id: 99 });
            }
            Ok(match mode {
                Mode::Binary => Prediction::Binary(if user % 2 == 0 { 0.9 } else { 0.1 }),
                Mode::Categorical => Prediction::Categorical([0.1, 0.2, 0.6, 0.1]),
            })
        }
    }

    fn truth() -> Vec<ResponseRecord> {
        vec![
            ResponseRecord::answered(1, 10, 0, 1, 1),
            ResponseRecord::answered(2, 10, 1, 2, 1),
            ResponseRecord::answered(1, 11, 2, 3, 3),
            ResponseRecord::answered(2, 11, 3, 4, 1),
        ]
    }

    #[test]
    fn one_of_four_wrong() {
        let text = "UserId,QuestionId,IsCorrect\n10,1,1\n10,2,0\n11,1,1\n11,2,1\n";
        let preds = read_pair_predictions(text.as_bytes(), PairTask::Correctness, "p").unwrap();
        let s = score_pairs(&preds, &truth(), PairTask::Correctness).unwrap();
        assert_eq!(s.accuracy, 0.75);
        assert_eq!(s.confusion.counts, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn contract_violations() {
        let missing = "UserId,QuestionId,IsCorrect\n10,1,1\n10,2,0\n11,1,1\n";
        let preds = read_pair_predictions(missing.as_bytes(), PairTask::Correctness, "p").unwrap();
        assert!(score_pairs(&preds, &truth(), PairTask::Correctness).is_err());
        let wrong_col = "UserId,QuestionId,Prediction\n10,1,1\n";
        assert!(matches!(
            read_pair_predictions(wrong_col.as_bytes(), PairTask::Correctness, "p"),
            Err(Error::MissingColumn { .. })
        ));
        let dup = "UserId,QuestionId,AnswerValue\n10,1,1\n10,1,2\n";
        assert!(matches!(
            read_pair_predictions(dup.as_bytes(), PairTask::AnswerChoice, "p"),
            Err(Error::DuplicatePair { .. })
        ));
        let range = "UserId,QuestionId,AnswerValue\n10,1,5\n";
        assert!(read_pair_predictions(range.as_bytes(), PairTask::AnswerChoice, "p").is_err());
    }

    #[test]
    fn templates_keep_order_and_columns() {
        let template = "QuestionId,UserId,AnswerId\n3,11,7\n3,10,8\n";
        let mut out = Vec::new();
        let n = fill_pair_template(template.as_bytes(), &mut out, PairTask::Correctness, &Constant, "t").unwrap();
        assert_eq!(n, 2);
        assert_eq!(String::from_utf8(out).unwrap(), "QuestionId,UserId,AnswerId,IsCorrect\n3,11,7,0\n3,10,8,1\n");
        let with_col = "UserId,QuestionId,AnswerValue\n1,2,\n";
        let mut out = Vec::new();
        fill_pair_template(with_col.as_bytes(), &mut out, PairTask::AnswerChoice, &Constant, "t").unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "UserId,QuestionId,AnswerValue\n1,2,3\n");
        let unknown = "UserId,QuestionId\n1,99\n";
        assert!(fill_pair_template(unknown.as_bytes(), Vec::new(), PairTask::AnswerChoice, &Constant, "t").is_err());
    }

    #[test]
    fn ranking_template() {
        let ranking = QualityRanking::from_order(&[5, 9, 2, 7]).unwrap();
        let mut out = Vec::new();
        fill_ranking_template("QuestionId\n7\n2\n5\n".as_bytes(), &mut out, &ranking, "t").unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "QuestionId,ranking\n7,3\n2,2\n5,1\n");
        assert!(fill_ranking_template("QuestionId\n8\n".as_bytes(), Vec::new(), &ranking, "t").is_err());
    }
}
