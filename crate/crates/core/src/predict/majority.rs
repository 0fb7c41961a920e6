use std::collections::HashMap;

use crate::dataset::ResponseMatrix;
use crate::error::{Error, Result};
use crate::predict::model::{Mode, Prediction, ResponseModel};
use crate::scalar::Scalar;

/// Per-question empirical frequencies, used as the baseline predictor.
///
/// Binary output is the question's correctness rate, so the 0.5 threshold
/// yields the modal outcome. Categorical output is the empirical option
/// distribution; its argmax is the modal option with the smallest option
/// winning ties. Unseen questions use the pooled frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityModel<F> {
    question_ids: Vec<u64>,
    index: HashMap<u64, usize>,
    correct_rate: Vec<F>,
    choice_freq: Vec<[F; 4]>,
    global_rate: F,
    global_freq: [F; 4],
}

fn frequencies<F: Scalar>(counts: &[usize; 4]) -> [F; 4] {
    let total: usize = counts.iter().sum();
    counts.map(|c| F::of_usize(c) / F::of_usize(total.max(1)))
}

impl<F: Scalar> MajorityModel<F> {
    pub fn fit(matrix: &ResponseMatrix) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::InvalidArgument("majority baseline needs a non-empty matrix".into()));
        }
        let mut correct_rate = Vec::with_capacity(matrix.n_questions());
        let mut choice_freq = Vec::with_capacity(matrix.n_questions());
        let mut global = [0usize; 4];
        for q in 0..matrix.n_questions() {
            let mut counts = [0usize; 4];
            let mut correct = 0usize;
            for o in matrix.question_column(q) {
                if (1..=4).contains(&o.answer_value) {
                    counts[usize::from(o.answer_value - 1)] += 1;
                }
                correct += usize::from(o.is_correct);
            }
            for (g, c) in global.iter_mut().zip(counts) {
                *g += c;
            }
            correct_rate.push(F::of_usize(correct) / F::of_usize(matrix.question_count(q).max(1)));
            choice_freq.push(frequencies(&counts));
        }
        let question_ids = matrix.question_ids().to_vec();
        let index = question_ids.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        Ok(MajorityModel {
            question_ids,
            index,
            correct_rate,
            choice_freq,
            global_rate: F::of_usize(matrix.n_correct()) / F::of_usize(matrix.len()),
            global_freq: frequencies(&global),
        })
    }

    pub(crate) fn from_parts(
        question_ids: Vec<u64>,
        correct_rate: Vec<F>,
        choice_freq: Vec<[F; 4]>,
        global_rate: F,
        global_freq: [F; 4],
    ) -> Self {
        let index = question_ids.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        MajorityModel { question_ids, index, correct_rate, choice_freq, global_rate, global_freq }
    }

    pub fn question_ids(&self) -> &[u64] {
        &self.question_ids
    }

    pub fn correct_rates(&self) -> &[F] {
        &self.correct_rate
    }

    pub fn choice_frequencies(&self) -> &[[F; 4]] {
        &self.choice_freq
    }

    pub fn global_rate(&self) -> F {
        self.global_rate
    }

    pub fn global_frequencies(&self) -> [F; 4] {
        self.global_freq
    }
}

impl<F: Scalar> ResponseModel<F> for MajorityModel<F> {
    fn supports(&self, _mode: Mode) -> bool {
        true
    }

    fn predict(&self, _user_id: u64, question_id: u64, mode: Mode) -> Result<Prediction<F>> {
        let q = self.index.get(&question_id).copied();
        Ok(match mode {
            Mode::Binary => Prediction::Binary(q.map_or(self.global_rate, |q| self.correct_rate[q])),
            Mode::Categorical => Prediction::Categorical(q.map_or(self.global_freq, |q| self.choice_freq[q])),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ResponseRecord;

    #[test]
    fn modal_labels() {
        let mut recs = Vec::new();
        // question 1: 7 of 10 correct
        for u in 0..10 {
            recs.push(ResponseRecord::answered(1, u, u, if u < 7 { 2 } else { 3 }, 2));
        }
        // question 2: options A and B five times each
        for u in 0..10 {
            recs.push(ResponseRecord::answered(2, u, 100 + u, if u < 5 { 2 } else { 1 }, 3));
        }
        let m = ResponseMatrix::from_records(&recs).unwrap();
        let model = MajorityModel::<f64>::fit(&m).unwrap();
        assert_eq!(model.predict(0, 1, Mode::Binary).unwrap().label(), 1);
        assert_eq!(model.predict(0, 2, Mode::Categorical).unwrap().label(), 1);
        assert_eq!(model.predict(0, 2, Mode::Binary).unwrap().label(), 0);
    }

    #[test]
    fn unseen_question_uses_global_rate() {
        let recs: Vec<_> = (0..10).map(|u| ResponseRecord::answered(1, u, u, if u < 6 { 1 } else { 2 }, 1)).collect();
        let model = MajorityModel::<f64>::fit(&ResponseMatrix::from_records(&recs).unwrap()).unwrap();
        match model.predict(0, 99, Mode::Binary).unwrap() {
            Prediction::Binary(p) => assert!((p - 0.6).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(model.predict(0, 99, Mode::Binary).unwrap().label(), 1);
        assert!(MajorityModel::<f64>::fit(&ResponseMatrix::default()).is_err());
    }
}
