use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{argmax_first, Scalar};

/// Which target a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Probability that the answer is correct.
    Binary,
    /// Distribution over the four answer options.
    Categorical,
}

/// Decision threshold for binary labels.
pub const THRESHOLD: f64 = 0.5;

/// A model's output for one (student, question) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction<F> {
    Binary(F),
    Categorical([F; 4]),
}

impl<F: Scalar> Prediction<F> {
    /// Hard label: 0/1 for binary (`p >= 0.5`), option 1..=4 for categorical
    /// (argmax, smallest option on ties).
    pub fn label(&self) -> u8 {
        match self {
            Prediction::Binary(p) => u8::from(p.f64() >= THRESHOLD),
            Prediction::Categorical(d) => argmax_first(d) as u8 + 1,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Prediction::Binary(_) => Mode::Binary,
            Prediction::Categorical(_) => Mode::Categorical,
        }
    }
}

/// Anything that can score a (student, question) pair by external ids.
pub trait ResponseModel<F: Scalar> {
    fn supports(&self, mode: Mode) -> bool;

    fn predict(&self, user_id: u64, question_id: u64, mode: Mode) -> Result<Prediction<F>>;

    fn predict_proba(&self, user_id: u64, question_id: u64) -> Result<F> {
        match self.predict(user_id, question_id, Mode::Binary)? {
            Prediction::Binary(p) => Ok(p),
            Prediction::Categorical(_) => Err(Error::Mismatch("model returned a categorical output".into())),
        }
    }
}

/// Predictions for a list of pairs, with labels derived from the stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet<F> {
    pub pairs: Vec<(u64, u64)>,
    pub values: Vec<Prediction<F>>,
}

impl<F: Scalar> PredictionSet<F> {
    pub fn compute<M: ResponseModel<F> + ?Sized>(model: &M, pairs: &[(u64, u64)], mode: Mode) -> Result<Self> {
        let values = pairs.iter().map(|&(u, q)| model.predict(u, q, mode)).collect::<Result<Vec<_>>>()?;
        Ok(PredictionSet { pairs: pairs.to_vec(), values })
    }

    pub fn labels(&self) -> Vec<u8> {
        self.values.iter().map(Prediction::label).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Mean of the members' outputs for one pair.
pub fn ensemble_mean<F: Scalar>(
    members: &[&dyn ResponseModel<F>],
    user_id: u64,
    question_id: u64,
    mode: Mode,
) -> Result<Prediction<F>> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
    }
    if let Some(i) = members.iter().position(|m| !m.supports(mode)) {
        return Err(Error::Mismatch(format!("ensemble member {i} does not support {mode:?} output")));
    }
    let n = F::of_usize(members.len());
    match mode {
        Mode::Binary => {
            let mut total = F::zero();
            for m in members {
                total += m.predict_proba(user_id, question_id)?;
            }
            Ok(Prediction::Binary(total / n))
        }
        Mode::Categorical => {
            let mut acc = [F::zero(); 4];
            for m in members {
                match m.predict(user_id, question_id, mode)? {
                    Prediction::Categorical(d) => {
                        for (a, x) in acc.iter_mut().zip(d) {
                            *a += x;
                        }
                    }
                    Prediction::Binary(_) => {
                        return Err(Error::Mismatch("member returned a binary output".into()))
                    }
                }
            }
            let total: F = acc.iter().copied().sum();
            Ok(Prediction::Categorical(acc.map(|a| a / total)))
        }
    }
}
