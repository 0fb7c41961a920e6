use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{csv_reader, csv_writer, line_of, parse_u64, Columns};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const RANKING_COLUMNS: [&str; 2] = ["QuestionId", "ranking"];

/// A total order over questions: ranks `1..=N`, each used once, rank 1 best.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityRanking {
    ranks: BTreeMap<u64, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl QualityRanking {
    /// Validates that `ranks` is a bijection onto `1..=N`.
    pub fn from_ranks(ranks: BTreeMap<u64, usize>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for (&q, &r) in &ranks {
            if r == 0 || r > n {
                return Err(Error::Contract(format!("question {q} has rank {r} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[r - 1], true) {
                return Err(Error::Contract(format!("rank {r} is assigned more than once")));
            }
        }
        Ok(QualityRanking { ranks })
    }

    /// Best question first.
    pub fn from_order(order: &[u64]) -> Result<Self> {
        let mut ranks = BTreeMap::new();
        for (i, &q) in order.iter().enumerate() {
            if ranks.insert(q, i + 1).is_some() {
                return Err(Error::Contract(format!("question {q} appears twice in the order")));
            }
        }
        Ok(QualityRanking { ranks })
    }

    pub fn rank(&self, question_id: u64) -> Option<usize> {
        self.ranks.get(&question_id).copied()
    }

    pub fn ranks(&self) -> &BTreeMap<u64, usize> {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Question ids, best first.
    pub fn order(&self) -> Vec<u64> {
        let mut order = vec![0; self.ranks.len()];
        for (&q, &r) in &self.ranks {
            order[r - 1] = q;
        }
        order
    }

    pub fn reversed(&self) -> Self {
        let n = self.ranks.len();
        QualityRanking { ranks: self.ranks.iter().map(|(&q, &r)| (q, n + 1 - r)).collect() }
    }

    /// Re-ranks a subset of the questions, keeping their relative order.
    pub fn restrict(&self, questions: &[u64]) -> Result<Self> {
        let mut kept: Vec<(usize, u64)> = Vec::with_capacity(questions.len());
        for &q in questions {
            let r = self.rank(q).ok_or(Error::UnknownId { kind: "question", id: q })?;
            kept.push((r, q));
        }
        kept.sort_unstable();
        kept.dedup();
        QualityRanking::from_order(&kept.into_iter().map(|(_, q)| q).collect::<Vec<_>>())
    }

    pub fn write_csv<W: Write>(&self, output: W) -> Result<()> {
        let mut w = csv_writer(output);
        w.write_record(RANKING_COLUMNS)?;
        for (q, r) in &self.ranks {
            w.write_record([q.to_string(), r.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))
    }

    pub fn read_csv<R: Read>(input: R, context: &str) -> Result<Self> {
        let mut rdr = csv_reader(input);
        let cols = Columns::resolve(rdr.headers()?, &RANKING_COLUMNS, context)?;
        let mut ranks = BTreeMap::new();
        for row in rdr.records() {
            let row = row?;
            let line = line_of(&row);
            let q = parse_u64(cols.get(&row, 0), "QuestionId", line)?;
            let r = parse_u64(cols.get(&row, 1), "ranking", line)? as usize;
            if ranks.insert(q, r).is_some() {
                return Err(Error::row(line, format!("question {q} ranked twice")));
            }
        }
        QualityRanking::from_ranks(ranks)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }
}

/// Ranks questions by one scalar feature.
///
/// Present values come first in the requested direction, then questions
/// with no value; ties and the absent block are ordered by ascending id.
pub fn rank_by_feature<F: Scalar>(features: &BTreeMap<u64, Option<F>>, direction: Direction) -> QualityRanking {
    let mut present: Vec<(u64, F)> = features.iter().filter_map(|(&q, v)| v.map(|v| (q, v))).collect();
    present.sort_by(|a, b| {
        let by_value = match direction {
            Direction::HigherIsBetter => b.1.partial_cmp(&a.1),
            Direction::LowerIsBetter => a.1.partial_cmp(&b.1),
        };
        by_value.unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
    });
    let order: Vec<u64> = present
        .into_iter()
        .map(|(q, _)| q)
        .chain(features.iter().filter(|(_, v)| v.is_none()).map(|(&q, _)| q))
        .collect();
    QualityRanking::from_order(&order).expect("map keys are unique")
}

/// Re-ranks by ascending mean rank across `rankings`; ties by ascending id.
pub fn aggregate_ranks_mean(rankings: &[QualityRanking]) -> Result<QualityRanking> {
    let first = rankings.first().ok_or_else(|| Error::InvalidArgument("no rankings to aggregate".into()))?;
    let keys: HashSet<u64> = first.ranks.keys().copied().collect();
    for (i, r) in rankings.iter().enumerate().skip(1) {
        if r.len() != keys.len() || r.ranks.keys().any(|q| !keys.contains(q)) {
            return Err(Error::Mismatch(format!("ranking {i} covers a different question set")));
        }
    }
    // Every question has the same number of ranks, so rank sums order like means.
    let mut totals: Vec<(usize, u64)> =
        first.ranks.keys().map(|&q| (rankings.iter().map(|r| r.ranks[&q]).sum(), q)).collect();
    totals.sort_unstable();
    QualityRanking::from_order(&totals.into_iter().map(|(_, q)| q).collect::<Vec<_>>())
}

/// Ranks by the weighted sum of per-dimension min-max normalised features,
/// highest first; ties by ascending id. A constant dimension normalises to 0.
pub fn weighted_feature_rank<F: Scalar>(features: &BTreeMap<u64, Vec<F>>, weights: &[F]) -> Result<QualityRanking> {
    let dim = weights.len();
    if let Some((q, v)) = features.iter().find(|(_, v)| v.len() != dim) {
        return Err(Error::Mismatch(format!("question {q} has {} features, expected {dim}", v.len())));
    }
    if weights.iter().chain(features.values().flatten()).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("features and weights must be finite".into()));
    }
    let mut lo = vec![F::infinity(); dim];
    let mut hi = vec![F::neg_infinity(); dim];
    for v in features.values() {
        for d in 0..dim {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    let scores: BTreeMap<u64, Option<F>> = features
        .iter()
        .map(|(&q, v)| {
            let s = (0..dim)
                .map(|d| {
                    let span = hi[d] - lo[d];
                    let norm = if span > F::zero() { (v[d] - lo[d]) / span } else { F::zero() };
                    weights[d] * norm
                })
                .sum::<F>();
            (q, Some(s))
        })
        .collect();
    Ok(rank_by_feature(&scores, Direction::HigherIsBetter))
}
