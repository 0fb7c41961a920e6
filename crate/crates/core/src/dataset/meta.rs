//! Student, answer, question and subject metadata.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime};

use super::csvio::{self, Columns};
use crate::error::{Error, Result};

pub const STUDENT_COLUMNS: [&str; 4] = ["UserId", "Gender", "DateOfBirth", "PremiumPupil"];
pub const ANSWER_COLUMNS: [&str; 6] =
    ["AnswerId", "DateAnswered", "Confidence", "GroupId", "QuizId", "SchemeOfWorkId"];
pub const QUESTION_COLUMNS: [&str; 2] = ["QuestionId", "SubjectId"];
pub const SUBJECT_COLUMNS: [&str; 4] = ["SubjectId", "Name", "ParentId", "Level"];

const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S%.3f";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Unspecified = 0,
    Female = 1,
    Male = 2,
    Other = 3,
}

impl Gender {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(Gender::Unspecified),
            1 => Some(Gender::Female),
            2 => Some(Gender::Male),
            3 => Some(Gender::Other),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentMeta {
    pub user_id: u64,
    pub gender: Gender,
    /// Always the first day of a month.
    pub date_of_birth: Option<NaiveDate>,
    pub premium_pupil: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerMeta {
    pub answer_id: u64,
    pub date_answered: NaiveDateTime,
    /// Self-reported confidence in 0..=100.
    pub confidence: Option<u8>,
    pub group_id: u64,
    pub quiz_id: u64,
    pub scheme_of_work_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionMeta {
    pub question_id: u64,
    pub subject_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectNode {
    pub name: String,
    pub parent_id: Option<u64>,
    pub level: i64,
}

/// Subject hierarchy; parent links form a forest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubjectTree {
    nodes: BTreeMap<u64, SubjectNode>,
}

impl SubjectTree {
    /// Validates acyclicity and the `level == parent.level + 1` rule.
    pub fn new(nodes: BTreeMap<u64, SubjectNode>) -> Result<Self> {
        for (&id, node) in &nodes {
            if let Some(parent) = node.parent_id {
                let p = nodes.get(&parent).ok_or_else(|| {
                    Error::Contract(format!("subject {id} has unknown parent {parent}"))
                })?;
                if node.level != p.level + 1 {
                    return Err(Error::Contract(format!(
                        "subject {id} has level {} but parent {parent} has level {}",
                        node.level, p.level
                    )));
                }
            }
        }
        // Strictly increasing levels along parent links already rule out cycles.
        Ok(SubjectTree { nodes })
    }

    pub fn get(&self, id: u64) -> Option<&SubjectNode> {
        self.nodes.get(&id)
    }

    pub fn contains(&self, id: u64) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &SubjectNode)> {
        self.nodes.iter().map(|(&k, v)| (k, v))
    }

    /// Path from the root down to `id`, inclusive.
    pub fn lineage(&self, id: u64) -> Vec<u64> {
        let mut path = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            match self.nodes.get(&c) {
                Some(node) => {
                    path.push(c);
                    cur = node.parent_id;
                }
                None => break,
            }
        }
        path.reverse();
        path
    }
}

impl QuestionMeta {
    pub fn validate(&self, tree: &SubjectTree) -> Result<()> {
        if self.subject_ids.is_empty() {
            return Err(Error::Contract(format!("question {} has no subjects", self.question_id)));
        }
        if let Some(bad) = self.subject_ids.iter().find(|s| !tree.contains(**s)) {
            return Err(Error::Contract(format!(
                "question {} references unknown subject {bad}",
                self.question_id
            )));
        }
        Ok(())
    }
}

fn parse_timestamp(field: &str, line: usize) -> Result<NaiveDateTime> {
    const FORMATS: [&str; 3] = ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M"];
    for f in FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(field, f) {
            return Ok(t);
        }
    }
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight"))
        .map_err(|_| Error::row(line, format!("`{field}` is not a timestamp")))
}

fn parse_birth_month(field: &str, line: usize) -> Result<Option<NaiveDate>> {
    if csvio::is_missing(field) {
        return Ok(None);
    }
    let date = match parse_timestamp(field, line) {
        Ok(t) => t.date(),
        Err(_) => NaiveDate::parse_from_str(&format!("{field}-01"), "%Y-%m-%d")
            .map_err(|_| Error::row(line, format!("`{field}` is not a date of birth")))?,
    };
    Ok(date.with_day(1))
}

fn parse_subject_list(field: &str, line: usize) -> Result<Vec<u64>> {
    let inner = field
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::row(line, format!("SubjectId `{field}` is not a bracketed list")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| csvio::parse_u64(s, "SubjectId", line))
        .collect()
}

pub fn read_student_meta(path: impl AsRef<Path>) -> Result<HashMap<u64, StudentMeta>> {
    let path = path.as_ref();
    read_student_meta_from(csvio::open(path)?, &path.display().to_string())
}

pub fn read_student_meta_from<R: Read>(input: R, context: &str) -> Result<HashMap<u64, StudentMeta>> {
    let mut rdr = csvio::reader(input);
    let cols = Columns::resolve(rdr.headers()?, &STUDENT_COLUMNS, context)?;
    let mut out = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = csvio::line_of(&row);
        let user_id = csvio::parse_u64(cols.get(&row, 0), "UserId", line)?;
        let code = csvio::parse_i64(cols.get(&row, 1), "Gender", line)?;
        let gender =
            Gender::from_code(code).ok_or_else(|| Error::row(line, format!("Gender {code} outside 0..3")))?;
        let premium_pupil = match csvio::parse_opt_i64(cols.get(&row, 3), "PremiumPupil", line)? {
            None => None,
            Some(0) => Some(false),
            Some(1) => Some(true),
            Some(v) => return Err(Error::row(line, format!("PremiumPupil {v} is not binary"))),
        };
        let meta = StudentMeta {
            user_id,
            gender,
            date_of_birth: parse_birth_month(cols.get(&row, 2), line)?,
            premium_pupil,
        };
        out.insert(user_id, meta);
    }
    Ok(out)
}

pub fn read_answer_meta(path: impl AsRef<Path>) -> Result<HashMap<u64, AnswerMeta>> {
    let path = path.as_ref();
    read_answer_meta_from(csvio::open(path)?, &path.display().to_string())
}

pub fn read_answer_meta_from<R: Read>(input: R, context: &str) -> Result<HashMap<u64, AnswerMeta>> {
    let mut rdr = csvio::reader(input);
    let cols = Columns::resolve(rdr.headers()?, &ANSWER_COLUMNS, context)?;
    let mut out = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = csvio::line_of(&row);
        let answer_id = csvio::parse_u64(cols.get(&row, 0), "AnswerId", line)?;
        let confidence = match csvio::parse_opt_i64(cols.get(&row, 2), "Confidence", line)? {
            None => None,
            Some(c) if (0..=100).contains(&c) => Some(c as u8),
            Some(c) => return Err(Error::row(line, format!("Confidence {c} outside 0..100"))),
        };
        let meta = AnswerMeta {
            answer_id,
            date_answered: parse_timestamp(cols.get(&row, 1), line)?,
            confidence,
            group_id: csvio::parse_u64(cols.get(&row, 3), "GroupId", line)?,
            quiz_id: csvio::parse_u64(cols.get(&row, 4), "QuizId", line)?,
            scheme_of_work_id: csvio::parse_u64(cols.get(&row, 5), "SchemeOfWorkId", line)?,
        };
        out.insert(answer_id, meta);
    }
    Ok(out)
}

pub fn read_question_meta(path: impl AsRef<Path>) -> Result<HashMap<u64, QuestionMeta>> {
    let path = path.as_ref();
    read_question_meta_from(csvio::open(path)?, &path.display().to_string())
}

pub fn read_question_meta_from<R: Read>(input: R, context: &str) -> Result<HashMap<u64, QuestionMeta>> {
    let mut rdr = csvio::reader(input);
    let cols = Columns::resolve(rdr.headers()?, &QUESTION_COLUMNS, context)?;
    let mut out = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = csvio::line_of(&row);
        let question_id = csvio::parse_u64(cols.get(&row, 0), "QuestionId", line)?;
        let subject_ids = parse_subject_list(cols.get(&row, 1), line)?;
        out.insert(question_id, QuestionMeta { question_id, subject_ids });
    }
    Ok(out)
}

pub fn read_subject_tree(path: impl AsRef<Path>) -> Result<SubjectTree> {
    let path = path.as_ref();
    read_subject_tree_from(csvio::open(path)?, &path.display().to_string())
}

pub fn read_subject_tree_from<R: Read>(input: R, context: &str) -> Result<SubjectTree> {
    let mut rdr = csvio::reader(input);
    let cols = Columns::resolve(rdr.headers()?, &SUBJECT_COLUMNS, context)?;
    let mut nodes = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = csvio::line_of(&row);
        let id = csvio::parse_u64(cols.get(&row, 0), "SubjectId", line)?;
        let parent = cols.get(&row, 2);
        let node = SubjectNode {
            name: cols.get(&row, 1).to_string(),
            parent_id: if csvio::is_missing(parent) {
                None
            } else {
                Some(csvio::parse_u64(parent, "ParentId", line)?)
            },
            level: csvio::parse_i64(cols.get(&row, 3), "Level", line)?,
        };
        nodes.insert(id, node);
    }
    SubjectTree::new(nodes)
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv writer>", e))
}

pub fn write_student_meta<'a, W: Write>(output: W, rows: impl IntoIterator<Item = &'a StudentMeta>) -> Result<()> {
    let mut w = csvio::writer(output);
    w.write_record(STUDENT_COLUMNS)?;
    for s in rows {
        w.write_record([
            s.user_id.to_string(),
            s.gender.code().to_string(),
            s.date_of_birth.map(|d| format!("{} 00:00:00.000", d.format("%Y-%m-%d"))).unwrap_or_default(),
            s.premium_pupil.map(|p| u8::from(p).to_string()).unwrap_or_default(),
        ])?;
    }
    flush(w)
}

pub fn write_answer_meta<'a, W: Write>(output: W, rows: impl IntoIterator<Item = &'a AnswerMeta>) -> Result<()> {
    let mut w = csvio::writer(output);
    w.write_record(ANSWER_COLUMNS)?;
    for a in rows {
        w.write_record([
            a.answer_id.to_string(),
            a.date_answered.format(TIMESTAMP_FORMAT).to_string(),
            a.confidence.map(|c| c.to_string()).unwrap_or_default(),
            a.group_id.to_string(),
            a.quiz_id.to_string(),
            a.scheme_of_work_id.to_string(),
        ])?;
    }
    flush(w)
}

pub fn write_question_meta<'a, W: Write>(output: W, rows: impl IntoIterator<Item = &'a QuestionMeta>) -> Result<()> {
    let mut w = csvio::writer(output);
    w.write_record(QUESTION_COLUMNS)?;
    for q in rows {
        let list = q.subject_ids.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        w.write_record([q.question_id.to_string(), format!("[{list}]")])?;
    }
    flush(w)
}

pub fn write_subject_tree<W: Write>(output: W, tree: &SubjectTree) -> Result<()> {
    let mut w = csvio::writer(output);
    w.write_record(SUBJECT_COLUMNS)?;
    for (id, node) in tree.iter() {
        w.write_record([
            id.to_string(),
            node.name.clone(),
            node.parent_id.map(|p| p.to_string()).unwrap_or_default(),
            node.level.to_string(),
        ])?;
    }
    flush(w)
}
