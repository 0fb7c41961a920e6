use std::collections::{BTreeMap, HashMap};

use crate::dataset::{AnswerMeta, ResponseRecord};
use crate::error::Result;
use crate::quality::entropy::{
    choice_entropy, conditional_correctness_entropy, correctness_entropy, mean_confidence, Condition,
};
use crate::quality::ranking::{rank_by_feature, Direction, QualityRanking};
use crate::scalar::Scalar;

/// Per-question quality signals.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityFeatures<F> {
    /// Bits, `[0, 2]`.
    pub choice_entropy: F,
    /// Bits, `[0, 1]`.
    pub correctness_entropy: F,
    /// Group-conditioned correctness entropy, when some group has two or more answers.
    pub conditional_correctness_entropy: Option<F>,
    /// Mean reported confidence in `[0, 100]`.
    pub mean_confidence: Option<F>,
    pub support: usize,
}

/// Computes [`QualityFeatures`] for every question that has at least one answer.
pub fn quality_features<F: Scalar>(
    records: &[ResponseRecord],
    answers: &HashMap<u64, AnswerMeta>,
    condition: Condition,
) -> Result<BTreeMap<u64, QualityFeatures<F>>> {
    let mut counts: BTreeMap<u64, ([usize; 4], usize, usize)> = BTreeMap::new();
    for r in records {
        let entry = counts.entry(r.question_id).or_default();
        if (1..=4).contains(&r.answer_value) {
            entry.0[usize::from(r.answer_value - 1)] += 1;
        }
        entry.1 += usize::from(r.is_correct);
        entry.2 += 1;
    }
    let conditional = conditional_correctness_entropy::<F>(records, answers, condition)?;
    let confidence = mean_confidence::<F>(records, answers);
    counts
        .into_iter()
        .map(|(q, (choices, correct, support))| {
            Ok((
                q,
                QualityFeatures {
                    choice_entropy: choice_entropy(choices)?,
                    correctness_entropy: correctness_entropy(correct, support - correct)?,
                    conditional_correctness_entropy: conditional.get(&q).copied().flatten(),
                    mean_confidence: confidence.get(&q).copied().flatten(),
                    support,
                },
            ))
        })
        .collect()
}

/// Ranks by mean confidence, highest first. Questions with no confidence data
/// follow all others, ordered among themselves by descending choice entropy.
pub fn confidence_ranking<F: Scalar>(features: &BTreeMap<u64, QualityFeatures<F>>) -> QualityRanking {
    let with: BTreeMap<u64, Option<F>> =
        features.iter().filter_map(|(&q, f)| f.mean_confidence.map(|c| (q, Some(c)))).collect();
    let without: BTreeMap<u64, Option<F>> = features
        .iter()
        .filter(|(_, f)| f.mean_confidence.is_none())
        .map(|(&q, f)| (q, Some(f.choice_entropy)))
        .collect();
    let order: Vec<u64> = rank_by_feature(&with, Direction::HigherIsBetter)
        .order()
        .into_iter()
        .chain(rank_by_feature(&without, Direction::HigherIsBetter).order())
        .collect();
    QualityRanking::from_order(&order).expect("question ids are unique")
}

/// Projects one feature out of the table for use with [`rank_by_feature`].
pub fn feature_column<F: Scalar>(
    features: &BTreeMap<u64, QualityFeatures<F>>,
    pick: impl Fn(&QualityFeatures<F>) -> Option<F>,
) -> BTreeMap<u64, Option<F>> {
    features.iter().map(|(&q, f)| (q, pick(f))).collect()
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;

    fn meta(answer_id: u64, confidence: Option<u8>) -> AnswerMeta {
        AnswerMeta {
            answer_id,
            date_answered: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            confidence,
            group_id: 0,
            quiz_id: 0,
            scheme_of_work_id: 0,
        }
    }

    #[test]
    fn features_and_confidence_fallback() {
        // q1: balanced over two options, confidence 40; q2: all option 1, confidence 90;
        // q3 and q4: no confidence, q4 more balanced than q3
        let rows: [(u64, u8, Option<u8>); 8] = [
            (1, 1, Some(40)),
            (1, 2, Some(40)),
            (2, 1, Some(90)),
            (2, 1, Some(90)),
            (3, 1, None),
            (3, 1, None),
            (4, 1, None),
            (4, 3, None),
        ];
        let recs: Vec<_> =
            rows.iter().enumerate().map(|(i, &(q, v, _))| ResponseRecord::answered(q, i as u64, i as u64, v, 1)).collect();
        let answers: HashMap<_, _> = rows.iter().enumerate().map(|(i, &(_, _, c))| (i as u64, meta(i as u64, c))).collect();
        let f = quality_features::<f64>(&recs, &answers, Condition::Group).unwrap();
        assert_eq!(f[&1].choice_entropy, 1.0);
        assert_eq!(f[&1].correctness_entropy, 1.0);
        assert_eq!(f[&2].choice_entropy, 0.0);
        assert_eq!(f[&2].support, 2);
        assert_eq!(f[&3].mean_confidence, None);
        assert_eq!(confidence_ranking(&f).order(), vec![2, 1, 4, 3]);
    }
}
