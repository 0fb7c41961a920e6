use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use crate::dataset::{AnswerMeta, ResponseRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shannon entropy in bits of a count vector; `0 · log 0 = 0`.
fn entropy_bits<F: Scalar>(counts: &[usize]) -> Option<F> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let n = F::of_usize(total);
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = F::of_usize(c) / n;
            -p * p.log2()
        })
        .sum::<F>();
    // exact zero for degenerate distributions rather than -0.0
    Some(h.max(F::zero()))
}

/// Entropy of the empirical answer-option distribution, in `[0, 2]` bits.
pub fn choice_entropy<F: Scalar>(counts: [usize; 4]) -> Result<F> {
    entropy_bits(&counts).ok_or_else(|| Error::InvalidArgument("choice entropy of zero answers".into()))
}

/// Binary entropy of the correctness rate, in `[0, 1]` bits.
pub fn correctness_entropy<F: Scalar>(n_correct: usize, n_incorrect: usize) -> Result<F> {
    entropy_bits(&[n_correct, n_incorrect])
        .ok_or_else(|| Error::InvalidArgument("correctness entropy of zero answers".into()))
}

/// Answer-metadata field used to partition a question's answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Group,
    Quiz,
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "group" | "groupid" => Ok(Condition::Group),
            "quiz" | "quizid" => Ok(Condition::Quiz),
            other => Err(Error::InvalidArgument(format!("unknown condition key `{other}`"))),
        }
    }
}

/// Minimum answers a conditioning cell needs to contribute.
pub const MIN_CELL_ANSWERS: usize = 2;

/// Per question, the answer-weighted mean of correctness entropy within each
/// group (or quiz) cell. Cells with fewer than two answers are skipped; a
/// question with no qualifying cell maps to `None`.
pub fn conditional_correctness_entropy<F: Scalar>(
    records: &[ResponseRecord],
    answers: &HashMap<u64, AnswerMeta>,
    condition: Condition,
) -> Result<BTreeMap<u64, Option<F>>> {
    let mut cells: BTreeMap<u64, HashMap<u64, (usize, usize)>> = BTreeMap::new();
    for r in records {
        let meta = answers.get(&r.answer_id).ok_or(Error::UnknownId { kind: "answer", id: r.answer_id })?;
        let key = match condition {
            Condition::Group => meta.group_id,
            Condition::Quiz => meta.quiz_id,
        };
        let cell = cells.entry(r.question_id).or_default().entry(key).or_default();
        if r.is_correct {
            cell.0 += 1;
        } else {
            cell.1 += 1;
        }
    }
    cells
        .into_iter()
        .map(|(q, by_cell)| {
            let mut weighted = F::zero();
            let mut weight = 0usize;
            for &(c, i) in by_cell.values() {
                if c + i >= MIN_CELL_ANSWERS {
                    weighted += F::of_usize(c + i) * correctness_entropy::<F>(c, i)?;
                    weight += c + i;
                }
            }
            Ok((q, (weight > 0).then(|| weighted / F::of_usize(weight))))
        })
        .collect()
}

/// Mean reported confidence per question over answers that carry one.
/// Questions whose answers report no confidence map to `None`.
pub fn mean_confidence<F: Scalar>(
    records: &[ResponseRecord],
    answers: &HashMap<u64, AnswerMeta>,
) -> BTreeMap<u64, Option<F>> {
    let mut sums: BTreeMap<u64, (u64, usize)> = BTreeMap::new();
    for r in records {
        let entry = sums.entry(r.question_id).or_default();
        if let Some(c) = answers.get(&r.answer_id).and_then(|m| m.confidence) {
            entry.0 += u64::from(c);
            entry.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(q, (sum, n))| (q, (n > 0).then(|| F::of(sum as f64) / F::of_usize(n))))
        .collect()
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;

    #[test]
    fn choice_entropy_examples() {
        assert_eq!(choice_entropy::<f64>([25, 25, 25, 25]).unwrap(), 2.0);
        assert_eq!(choice_entropy::<f64>([100, 0, 0, 0]).unwrap(), 0.0);
        assert_eq!(choice_entropy::<f64>([50, 50, 0, 0]).unwrap(), 1.0);
        assert!(choice_entropy::<f64>([0; 4]).is_err());
    }

    #[test]
    fn correctness_entropy_examples() {
        assert_eq!(correctness_entropy::<f64>(50, 50).unwrap(), 1.0);
        assert_eq!(correctness_entropy::<f64>(100, 0).unwrap(), 0.0);
        // H(0.75) = -(0.75 log2 0.75 + 0.25 log2 0.25)
        let expected = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((correctness_entropy::<f64>(75, 25).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.8113).abs() < 1e-4);
        assert!(correctness_entropy::<f64>(0, 0).is_err());
    }

    fn meta(answer_id: u64, group_id: u64, confidence: Option<u8>) -> AnswerMeta {
        AnswerMeta {
            answer_id,
            date_answered: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            confidence,
            group_id,
            quiz_id: 0,
            scheme_of_work_id: 0,
        }
    }

    #[test]
    fn conditioning_on_pure_groups() {
        // group 1 always right, group 2 always wrong
        let recs: Vec<_> = (0..8u64).map(|i| ResponseRecord::answered(5, i, i, if i < 4 { 1 } else { 2 }, 1)).collect();
        let answers: HashMap<_, _> = (0..8u64).map(|i| (i, meta(i, 1 + u64::from(i >= 4), None))).collect();
        let by_group = conditional_correctness_entropy::<f64>(&recs, &answers, Condition::Group).unwrap();
        assert_eq!(by_group[&5], Some(0.0));
        let one_cell = conditional_correctness_entropy::<f64>(&recs, &answers, Condition::Quiz).unwrap();
        assert_eq!(one_cell[&5], Some(1.0));
        assert!("class".parse::<Condition>().is_err());
    }

    #[test]
    fn singleton_cells_are_skipped() {
        let recs: Vec<_> = (0..3u64).map(|i| ResponseRecord::answered(5, i, i, 1, 1)).collect();
        let answers: HashMap<_, _> = (0..3u64).map(|i| (i, meta(i, i, None))).collect();
        let out = conditional_correctness_entropy::<f64>(&recs, &answers, Condition::Group).unwrap();
        assert_eq!(out[&5], None);
    }

    #[test]
    fn confidence_means() {
        let recs: Vec<_> = (0..4u64).map(|i| ResponseRecord::answered(i / 2, i, i, 1, 1)).collect();
        let answers: HashMap<_, _> =
            [(0, meta(0, 0, Some(0))), (1, meta(1, 0, Some(100))), (2, meta(2, 0, None)), (3, meta(3, 0, None))].into();
        let m = mean_confidence::<f64>(&recs, &answers);
        assert_eq!(m[&0], Some(50.0));
        assert_eq!(m[&1], None);
    }
}
