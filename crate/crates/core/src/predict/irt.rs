//! Two-parameter logistic item response model.
//!
//! `p(correct) = σ(a_q (θ_s − b_q))` with `a_q = exp(log_a_q)`. Fitting
//! maximises the L2-penalised Bernoulli log-likelihood by alternating
//! preconditioned gradient steps over the student block and the item block.
//! Each block step is scaled by the inverse Fisher information and shortened
//! until the block objective does not increase, so the total penalised loss
//! is monotone over epochs.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::ResponseMatrix;
use crate::error::{Error, Result};
use crate::predict::linalg::cholesky_solve;
use crate::predict::model::{Mode, Prediction, ResponseModel};
use crate::scalar::{log_sigmoid, open_unit_sigmoid, sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrtKind {
    /// Rasch model, all discriminations fixed at 1.
    #[serde(rename = "1pl")]
    OnePl,
    #[serde(rename = "2pl")]
    TwoPl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrtConfig {
    pub kind: IrtKind,
    pub epochs: usize,
    /// Initial scale of each preconditioned step (1.0 is a full Fisher-scoring step).
    pub learning_rate: f64,
    /// Penalty on abilities, difficulties and log-discriminations.
    pub l2: f64,
    pub seed: u64,
    /// Stop once an epoch improves the loss by less than this fraction.
    pub tolerance: f64,
}

impl Default for IrtConfig {
    fn default() -> Self {
        IrtConfig { kind: IrtKind::TwoPl, epochs: 200, learning_rate: 1.0, l2: 1.0, seed: 0, tolerance: 1e-10 }
    }
}

/// A fitted model together with its training loss after every epoch.
///
/// `losses[0]` is the loss at initialisation.
#[derive(Debug, Clone)]
pub struct Fitted<M, F> {
    pub model: M,
    pub losses: Vec<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrtModel<F> {
    pub(crate) kind: IrtKind,
    pub(crate) user_ids: Vec<u64>,
    pub(crate) question_ids: Vec<u64>,
    pub(crate) user_index: HashMap<u64, usize>,
    pub(crate) question_index: HashMap<u64, usize>,
    pub(crate) theta: Vec<F>,
    pub(crate) log_a: Vec<F>,
    pub(crate) b: Vec<F>,
}

#[inline]
fn nll<F: Scalar>(z: F, y: bool) -> F {
    if y {
        -log_sigmoid(z)
    } else {
        -log_sigmoid(-z)
    }
}

#[inline]
fn target<F: Scalar>(y: bool) -> F {
    if y {
        F::one()
    } else {
        F::zero()
    }
}

/// Halves `step` until `objective(step)` is no worse than `current`.
fn backtrack<F: Scalar>(current: F, mut step: F, objective: impl Fn(F) -> F) -> Option<F> {
    for _ in 0..30 {
        let value = objective(step);
        if value.is_finite() && value <= current {
            return Some(step);
        }
        step = step * F::of(0.5);
    }
    None
}

impl<F: Scalar> IrtModel<F> {
    pub fn fit(matrix: &ResponseMatrix, config: &IrtConfig) -> Result<Fitted<Self, F>> {
        if matrix.is_empty() {
            return Err(Error::InvalidArgument("cannot fit an IRT model to an empty matrix".into()));
        }
        let l2 = F::of(config.l2);
        let lr = F::of(config.learning_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut jitter = || { let z: f64 = StandardNormal.sample(&mut rng); F::of(0.01 * z) };

        let theta: Vec<F> = (0..matrix.n_students()).map(|_| jitter()).collect();
        let log_a: Vec<F> = (0..matrix.n_questions())
            .map(|_| if config.kind == IrtKind::TwoPl { jitter() } else { F::zero() })
            .collect();
        let b: Vec<F> = (0..matrix.n_questions())
            .map(|q| {
                let n = matrix.question_count(q) as f64;
                let c = matrix.question_column(q).filter(|o| o.is_correct).count() as f64;
                let rate = (c + 0.5) / (n + 1.0);
                F::of(-(rate / (1.0 - rate)).ln()) + jitter()
            })
            .collect();

        let mut model = IrtModel {
            kind: config.kind,
            user_ids: matrix.user_ids().to_vec(),
            question_ids: matrix.question_ids().to_vec(),
            user_index: matrix.user_ids().iter().enumerate().map(|(i, &u)| (u, i)).collect(),
            question_index: matrix.question_ids().iter().enumerate().map(|(i, &q)| (q, i)).collect(),
            theta,
            log_a,
            b,
        };
        let objective = IrtObjective::new(matrix, config.kind, l2);
        let mut losses = vec![objective.loss(&model.flat_params())];
        for epoch in 1..=config.epochs {
            model.student_block(matrix, l2, lr);
            model.item_block(matrix, l2, lr);
            let loss = objective.loss(&model.flat_params());
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let prev = *losses.last().expect("initial loss");
            losses.push(loss);
            if prev - loss <= F::of(config.tolerance) * loss.abs().max(F::one()) {
                break;
            }
        }
        log::debug!("irt fit: {} epochs, final loss {}", losses.len() - 1, losses.last().unwrap());
        Ok(Fitted { model, losses })
    }

    fn student_block(&mut self, matrix: &ResponseMatrix, l2: F, lr: F) {
        for s in 0..matrix.n_students() {
            let row = matrix.student_row(s);
            let responses: Vec<(usize, bool)> = row.iter().map(|o| (o.question, o.is_correct)).collect();
            let theta = self.theta[s];
            let (g, h) = self.ability_derivatives(&responses, theta, l2);
            let f = |t: F| self.ability_objective(&responses, t, l2);
            let current = f(theta);
            if let Some(step) = backtrack(current, lr * g / h, |step| f(theta - step)) {
                self.theta[s] = theta - step;
            }
        }
    }

    fn item_block(&mut self, matrix: &ResponseMatrix, l2: F, lr: F) {
        let half = F::of(0.5);
        for q in 0..matrix.n_questions() {
            let cells: Vec<(F, bool)> =
                matrix.question_column(q).map(|o| (self.theta[o.student], o.is_correct)).collect();
            let item_loss = |log_a: F, b: F| {
                let a = log_a.exp();
                let data: F = cells.iter().map(|&(t, y)| nll(a * (t - b), y)).sum();
                data + half * l2 * (log_a * log_a + b * b)
            };
            let (log_a, b) = (self.log_a[q], self.b[q]);
            let a = log_a.exp();
            let current = item_loss(log_a, b);
            match self.kind {
                IrtKind::OnePl => {
                    let (mut g, mut h) = (l2 * b, l2);
                    for &(t, y) in &cells {
                        let p = sigmoid(t - b);
                        g -= p - target::<F>(y);
                        h += p * (F::one() - p);
                    }
                    if let Some(step) = backtrack(current, lr * g / h, |step| item_loss(log_a, b - step)) {
                        self.b[q] = b - step;
                    }
                }
                IrtKind::TwoPl => {
                    let mut g = [l2 * log_a, l2 * b];
                    let mut fisher = [l2, F::zero(), F::zero(), l2];
                    for &(t, y) in &cells {
                        let z = a * (t - b);
                        let p = sigmoid(z);
                        let r = p - target::<F>(y);
                        let w = p * (F::one() - p);
                        let dz = [z, -a];
                        g[0] += r * dz[0];
                        g[1] += r * dz[1];
                        fisher[0] += w * dz[0] * dz[0];
                        fisher[1] += w * dz[0] * dz[1];
                        fisher[3] += w * dz[1] * dz[1];
                    }
                    fisher[2] = fisher[1];
                    let Some(dir) = cholesky_solve(&fisher, &g) else { continue };
                    let apply = |step: F| item_loss(log_a - step * dir[0], b - step * dir[1]);
                    if let Some(step) = backtrack(current, lr, apply) {
                        self.log_a[q] = log_a - step * dir[0];
                        self.b[q] = b - step * dir[1];
                    }
                }
            }
        }
    }

    /// Penalised negative log-likelihood of one student's responses as a function of ability.
    fn ability_objective(&self, responses: &[(usize, bool)], theta: F, precision: F) -> F {
        let data: F = responses.iter().map(|&(q, y)| nll(self.logit_at(theta, q), y)).sum();
        data + F::of(0.5) * precision * theta * theta
    }

    /// Gradient and Fisher information of [`Self::ability_objective`].
    fn ability_derivatives(&self, responses: &[(usize, bool)], theta: F, precision: F) -> (F, F) {
        let mut g = precision * theta;
        let mut h = precision;
        for &(q, y) in responses {
            let a = self.discrimination(q);
            let p = sigmoid(self.logit_at(theta, q));
            g += (p - target::<F>(y)) * a;
            h += a * a * p * (F::one() - p);
        }
        (g, h)
    }

    /// MAP ability under a `Normal(0, 1/prior_precision)` prior with item
    /// parameters held fixed, by `steps` safeguarded Newton iterations from `start`.
    pub fn estimate_ability(&self, responses: &[(usize, bool)], start: F, steps: usize, prior_precision: F) -> F {
        let mut theta = start;
        for _ in 0..steps {
            let (g, h) = self.ability_derivatives(responses, theta, prior_precision);
            if g == F::zero() {
                break;
            }
            let current = self.ability_objective(responses, theta, prior_precision);
            match backtrack(current, g / h, |step| self.ability_objective(responses, theta - step, prior_precision)) {
                Some(step) if step != F::zero() => theta -= step,
                _ => break,
            }
        }
        theta
    }

    #[inline]
    fn logit_at(&self, theta: F, q: usize) -> F {
        self.discrimination(q) * (theta - self.b[q])
    }

    pub fn kind(&self) -> IrtKind {
        self.kind
    }

    pub fn n_students(&self) -> usize {
        self.theta.len()
    }

    pub fn n_questions(&self) -> usize {
        self.b.len()
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

    pub fn ability(&self, student: usize) -> F {
        self.theta[student]
    }

    pub fn abilities(&self) -> &[F] {
        &self.theta
    }

    pub fn difficulty(&self, question: usize) -> F {
        self.b[question]
    }

    pub fn difficulties(&self) -> &[F] {
        &self.b
    }

    pub fn discrimination(&self, question: usize) -> F {
        self.log_a[question].exp()
    }

    /// `σ(a_q (θ − b_q))`, kept strictly inside (0, 1).
    pub fn probability_at(&self, theta: F, question: usize) -> F {
        open_unit_sigmoid(self.logit_at(theta, question))
    }

    pub fn probability(&self, student: usize, question: usize) -> F {
        self.probability_at(self.theta[student], question)
    }

    /// Item Fisher information `a² p (1 − p)` at ability `theta`.
    pub fn item_information(&self, theta: F, question: usize) -> F {
        let a = self.discrimination(question);
        let p = self.probability_at(theta, question);
        a * a * p * (F::one() - p)
    }

    pub fn predict_ids(&self, user_id: u64, question_id: u64) -> Result<F> {
        let s = self.student_index(user_id).ok_or(Error::UnknownId { kind: "user", id: user_id })?;
        let q = self.question_index(question_id).ok_or(Error::UnknownId { kind: "question", id: question_id })?;
        Ok(self.probability(s, q))
    }

    /// Parameters in the layout used by [`IrtObjective`].
    pub fn flat_params(&self) -> Vec<F> {
        let mut out = self.theta.clone();
        if self.kind == IrtKind::TwoPl {
            out.extend_from_slice(&self.log_a);
        }
        out.extend_from_slice(&self.b);
        out
    }

    pub fn from_parts(
        kind: IrtKind,
        user_ids: Vec<u64>,
        question_ids: Vec<u64>,
        theta: Vec<F>,
        log_a: Vec<F>,
        b: Vec<F>,
    ) -> Result<Self> {
        if theta.len() != user_ids.len() || log_a.len() != question_ids.len() || b.len() != question_ids.len() {
            return Err(Error::Mismatch("IRT parameter lengths disagree with id lists".into()));
        }
        if theta.iter().chain(&log_a).chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::Contract("IRT parameters must be finite".into()));
        }
        Ok(IrtModel {
            kind,
            user_index: user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect(),
            question_index: question_ids.iter().enumerate().map(|(i, &q)| (q, i)).collect(),
            user_ids,
            question_ids,
            theta,
            log_a,
            b,
        })
    }

    pub fn log_discriminations(&self) -> &[F] {
        &self.log_a
    }
}

impl<F: Scalar> ResponseModel<F> for IrtModel<F> {
    fn supports(&self, mode: Mode) -> bool {
        mode == Mode::Binary
    }

    fn predict(&self, user_id: u64, question_id: u64, mode: Mode) -> Result<Prediction<F>> {
        match mode {
            Mode::Binary => self.predict_ids(user_id, question_id).map(Prediction::Binary),
            Mode::Categorical => Err(Error::Mismatch("IRT models predict correctness only".into())),
        }
    }
}

/// Penalised negative log-likelihood over a flat parameter vector.
///
/// Layout: abilities (one per student), then log-discriminations (2PL only,
/// one per question), then difficulties.
pub struct IrtObjective<'a, F> {
    matrix: &'a ResponseMatrix,
    kind: IrtKind,
    l2: F,
}

impl<'a, F: Scalar> IrtObjective<'a, F> {
    pub fn new(matrix: &'a ResponseMatrix, kind: IrtKind, l2: F) -> Self {
        IrtObjective { matrix, kind, l2 }
    }

    pub fn n_params(&self) -> usize {
        let per_q = if self.kind == IrtKind::TwoPl { 2 } else { 1 };
        self.matrix.n_students() + per_q * self.matrix.n_questions()
    }

    fn split<'p>(&self, params: &'p [F]) -> (&'p [F], Option<&'p [F]>, &'p [F]) {
        assert_eq!(params.len(), self.n_params(), "parameter vector length");
        let (theta, rest) = params.split_at(self.matrix.n_students());
        match self.kind {
            IrtKind::TwoPl => {
                let (log_a, b) = rest.split_at(self.matrix.n_questions());
                (theta, Some(log_a), b)
            }
            IrtKind::OnePl => (theta, None, rest),
        }
    }

    pub fn loss(&self, params: &[F]) -> F {
        let (theta, log_a, b) = self.split(params);
        let data: F = self
            .matrix
            .observations()
            .iter()
            .map(|o| {
                let a = log_a.map_or(F::one(), |la| la[o.question].exp());
                nll(a * (theta[o.student] - b[o.question]), o.is_correct)
            })
            .sum();
        let penalty: F = params.iter().map(|&x| x * x).sum();
        data + F::of(0.5) * self.l2 * penalty
    }

    pub fn gradient(&self, params: &[F]) -> Vec<F> {
        let (theta, log_a, b) = self.split(params);
        let n_s = self.matrix.n_students();
        let n_q = self.matrix.n_questions();
        let mut grad: Vec<F> = params.iter().map(|&x| self.l2 * x).collect();
        let b_offset = if log_a.is_some() { n_s + n_q } else { n_s };
        for o in self.matrix.observations() {
            let a = log_a.map_or(F::one(), |la| la[o.question].exp());
            let diff = theta[o.student] - b[o.question];
            let z = a * diff;
            let r = sigmoid(z) - target::<F>(o.is_correct);
            grad[o.student] += r * a;
            if log_a.is_some() {
                grad[n_s + o.question] += r * z;
            }
            grad[b_offset + o.question] -= r * a;
        }
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ResponseRecord;

    fn model_with(theta: f64, log_a: f64, b: f64) -> IrtModel<f64> {
        IrtModel::from_parts(IrtKind::TwoPl, vec![1], vec![1], vec![theta], vec![log_a], vec![b]).unwrap()
    }

    #[test]
    fn probability_examples() {
        assert_eq!(model_with(0.3, 0.0, 0.3).probability(0, 0), 0.5);
        let p = model_with(1.0, 2f64.ln(), 0.0).probability(0, 0);
        assert!((p - 0.880_797_077_977_882_3).abs() < 1e-12);
        let tiny = model_with(-1e4, 0.0, 0.0).probability(0, 0);
        assert!(tiny > 0.0 && tiny < 1e-15);
    }

    #[test]
    fn single_correct_answer_raises_probability() {
        let m = ResponseMatrix::from_records(&[ResponseRecord::answered(1, 1, 1, 2, 2)]).unwrap();
        let fit = IrtModel::<f64>::fit(&m, &IrtConfig::default()).unwrap();
        assert!(fit.model.predict_ids(1, 1).unwrap() > 0.5);
        assert!(fit.model.predict_ids(2, 1).is_err());
        assert!(fit.model.predict(1, 1, Mode::Categorical).is_err());
    }

    #[test]
    fn ability_estimate_is_batch_invariant() {
        let model = IrtModel::from_parts(
            IrtKind::TwoPl,
            vec![1],
            (0..4).collect(),
            vec![0.0],
            vec![0.0, 0.3, -0.2, 0.1],
            vec![-1.0, 0.0, 1.0, 2.0],
        )
        .unwrap();
        let responses = [(0, true), (1, true), (2, false), (3, true)];
        let batch = model.estimate_ability(&responses, 0.0, 50, 1.0);
        let mut seq = 0.0f64;
        for k in 1..=responses.len() {
            seq = model.estimate_ability(&responses[..k], seq, 50, 1.0);
        }
        assert!((batch - seq).abs() < 1e-10);
    }
}
