use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::dataset::{csv_reader, line_of, parse_u64, Columns};
use crate::error::{Error, Result};
use crate::quality::ranking::QualityRanking;

pub const JUDGMENT_COLUMNS: [&str; 5] = ["PairId", "LeftQuestionId", "RightQuestionId", "ExpertId", "Choice"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Left,
    Right,
}

impl Choice {
    fn parse(field: &str, line: usize) -> Result<Self> {
        match field.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Choice::Left),
            "right" | "r" => Ok(Choice::Right),
            other => Err(Error::row(line, format!("Choice must be `left` or `right`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuestionPair {
    pub left: u64,
    pub right: u64,
}

/// Pairwise expert preferences: every expert votes on every pair, no ties.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertJudgments {
    pairs: BTreeMap<u64, QuestionPair>,
    votes: BTreeMap<u64, BTreeMap<u64, Choice>>,
}

impl ExpertJudgments {
    /// `votes` maps expert id to a choice per pair id.
    pub fn new(pairs: BTreeMap<u64, QuestionPair>, votes: BTreeMap<u64, BTreeMap<u64, Choice>>) -> Result<Self> {
        if let Some((id, p)) = pairs.iter().find(|(_, p)| p.left == p.right) {
            return Err(Error::Contract(format!("pair {id} compares question {} with itself", p.left)));
        }
        for (expert, choices) in &votes {
            if choices.len() != pairs.len() || choices.keys().any(|k| !pairs.contains_key(k)) {
                return Err(Error::Contract(format!("expert {expert} did not vote on exactly the judged pairs")));
            }
        }
        Ok(ExpertJudgments { pairs, votes })
    }

    pub fn pairs(&self) -> &BTreeMap<u64, QuestionPair> {
        &self.pairs
    }

    pub fn experts(&self) -> impl Iterator<Item = u64> + '_ {
        self.votes.keys().copied()
    }

    pub fn votes(&self, expert: u64) -> Option<&BTreeMap<u64, Choice>> {
        self.votes.get(&expert)
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty() || self.pairs.is_empty()
    }

    pub fn read_csv<R: Read>(input: R, context: &str) -> Result<Self> {
        let mut rdr = csv_reader(input);
        let cols = Columns::resolve(rdr.headers()?, &JUDGMENT_COLUMNS, context)?;
        let mut pairs: BTreeMap<u64, QuestionPair> = BTreeMap::new();
        let mut votes: BTreeMap<u64, BTreeMap<u64, Choice>> = BTreeMap::new();
        for row in rdr.records() {
            let row = row?;
            let line = line_of(&row);
            let pair_id = parse_u64(cols.get(&row, 0), "PairId", line)?;
            let pair = QuestionPair {
                left: parse_u64(cols.get(&row, 1), "LeftQuestionId", line)?,
                right: parse_u64(cols.get(&row, 2), "RightQuestionId", line)?,
            };
            let expert = parse_u64(cols.get(&row, 3), "ExpertId", line)?;
            let choice = Choice::parse(cols.get(&row, 4), line)?;
            if *pairs.entry(pair_id).or_insert(pair) != pair {
                return Err(Error::row(line, format!("pair {pair_id} redefined with different questions")));
            }
            if votes.entry(expert).or_default().insert(pair_id, choice).is_some() {
                return Err(Error::row(line, format!("expert {expert} voted twice on pair {pair_id}")));
            }
        }
        ExpertJudgments::new(pairs, votes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }
}

/// Fraction of the expert's pairs on which the ranking prefers the same
/// question (the one with the smaller rank number).
pub fn agreement_fraction(ranking: &QualityRanking, judgments: &ExpertJudgments, expert: u64) -> Result<f64> {
    let votes = judgments.votes(expert).ok_or(Error::UnknownId { kind: "expert", id: expert })?;
    if votes.is_empty() {
        return Err(Error::InvalidArgument("no judged pairs".into()));
    }
    let mut matching = 0usize;
    for (pair_id, &choice) in votes {
        let pair = judgments.pairs[pair_id];
        let rank = |q| ranking.rank(q).ok_or(Error::UnknownId { kind: "question", id: q });
        let preferred = if rank(pair.left)? < rank(pair.right)? { Choice::Left } else { Choice::Right };
        matching += usize::from(preferred == choice);
    }
    Ok(matching as f64 / votes.len() as f64)
}

/// Per-expert agreement fractions, keyed by expert id.
pub fn agreement_by_expert(ranking: &QualityRanking, judgments: &ExpertJudgments) -> Result<BTreeMap<u64, f64>> {
    judgments.experts().map(|e| Ok((e, agreement_fraction(ranking, judgments, e)?))).collect()
}

/// Largest value and its key; ties go to the smallest key.
pub fn max_of(per_expert: &BTreeMap<u64, f64>) -> Result<(f64, u64)> {
    let mut best: Option<(f64, u64)> = None;
    for (&e, &a) in per_expert {
        if best.is_none_or(|(b, _)| a > b) {
            best = Some((a, e));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no experts to take the maximum over".into()))
}

/// `(A_max, expert)`: the best agreement over experts.
pub fn max_agreement(ranking: &QualityRanking, judgments: &ExpertJudgments) -> Result<(f64, u64)> {
    if judgments.is_empty() {
        return Err(Error::InvalidArgument("empty judgments".into()));
    }
    max_of(&agreement_by_expert(ranking, judgments)?)
}

/// Kendall tau-a between two rankings over the same questions.
pub fn kendall_tau(a: &QualityRanking, b: &QualityRanking) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Mismatch("rankings cover different question sets".into()));
    }
    let pairs: Vec<(usize, usize)> = a
        .ranks()
        .iter()
        .map(|(&q, &r)| Ok((r, b.rank(q).ok_or(Error::UnknownId { kind: "question", id: q })?)))
        .collect::<Result<_>>()?;
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InvalidArgument("kendall tau needs at least two items".into()));
    }
    let mut score = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let s = (pairs[i].0 as i64 - pairs[j].0 as i64).signum() * (pairs[i].1 as i64 - pairs[j].1 as i64).signum();
            score += s;
        }
    }
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}
