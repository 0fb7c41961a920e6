use std::collections::HashMap;

use super::record::ResponseRecord;
use crate::error::{Error, Result};

/// One observed cell of the response matrix, in dense indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub student: usize,
    pub question: usize,
    pub answer_value: u8,
    pub is_correct: bool,
}

/// Sparse student × question store with both the categorical and the binary view.
///
/// Dense indices follow ascending external ids. Observations are stored in
/// row-major order, so each student's cells are one contiguous slice.
#[derive(Debug, Clone, Default)]
pub struct ResponseMatrix {
    user_ids: Vec<u64>,
    question_ids: Vec<u64>,
    user_index: HashMap<u64, usize>,
    question_index: HashMap<u64, usize>,
    observations: Vec<Observation>,
    row_offsets: Vec<usize>,
    by_question: Vec<Vec<usize>>,
}

impl ResponseMatrix {
    pub fn from_records(records: &[ResponseRecord]) -> Result<Self> {
        let mut user_ids: Vec<u64> = records.iter().map(|r| r.user_id).collect();
        user_ids.sort_unstable();
        user_ids.dedup();
        let mut question_ids: Vec<u64> = records.iter().map(|r| r.question_id).collect();
        question_ids.sort_unstable();
        question_ids.dedup();
        let user_index: HashMap<u64, usize> = user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let question_index: HashMap<u64, usize> =
            question_ids.iter().enumerate().map(|(i, &q)| (q, i)).collect();

        let mut observations: Vec<Observation> = records
            .iter()
            .map(|r| Observation {
                student: user_index[&r.user_id],
                question: question_index[&r.question_id],
                answer_value: r.answer_value,
                is_correct: r.is_correct,
            })
            .collect();
        observations.sort_unstable_by_key(|o| (o.student, o.question));
        if let Some(w) = observations.windows(2).find(|w| (w[0].student, w[0].question) == (w[1].student, w[1].question)) {
            return Err(Error::DuplicatePair {
                user_id: user_ids[w[0].student],
                question_id: question_ids[w[0].question],
            });
        }

        let mut row_offsets = vec![0; user_ids.len() + 1];
        for o in &observations {
            row_offsets[o.student + 1] += 1;
        }
        for i in 0..user_ids.len() {
            row_offsets[i + 1] += row_offsets[i];
        }
        let mut by_question = vec![Vec::new(); question_ids.len()];
        for (i, o) in observations.iter().enumerate() {
            by_question[o.question].push(i);
        }

        Ok(ResponseMatrix { user_ids, question_ids, user_index, question_index, observations, row_offsets, by_question })
    }

    pub fn n_students(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_questions(&self) -> usize {
        self.question_ids.len()
    }

    /// Number of observed cells.
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Observed fraction of the full grid; 0 for an empty matrix.
    pub fn density(&self) -> f64 {
        let cells = self.n_students() * self.n_questions();
        if cells == 0 {
            0.0
        } else {
            self.len() as f64 / cells as f64
        }
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn student_row(&self, student: usize) -> &[Observation] {
        &self.observations[self.row_offsets[student]..self.row_offsets[student + 1]]
    }

    pub fn question_column(&self, question: usize) -> impl Iterator<Item = &Observation> + '_ {
        self.by_question[question].iter().map(move |&i| &self.observations[i])
    }

    pub fn question_count(&self, question: usize) -> usize {
        self.by_question[question].len()
    }

    pub fn get(&self, student: usize, question: usize) -> Option<&Observation> {
        let row = self.student_row(student);
        row.binary_search_by_key(&question, |o| o.question).ok().map(|i| &row[i])
    }

    pub fn user_ids(&self) -> &[u64] {
        &self.user_ids
    }

    pub fn question_ids(&self) -> &[u64] {
        &self.question_ids
    }

    pub fn student_index(&self, user_id: u64) -> Option<usize> {
        self.user_index.get(&user_id).copied()
    }

    pub fn question_index(&self, question_id: u64) -> Option<usize> {
        self.question_index.get(&question_id).copied()
    }

    pub fn user_id(&self, student: usize) -> u64 {
        self.user_ids[student]
    }

    pub fn question_id(&self, question: usize) -> u64 {
        self.question_ids[question]
    }

    pub fn n_correct(&self) -> usize {
        self.observations.iter().filter(|o| o.is_correct).count()
    }
}
