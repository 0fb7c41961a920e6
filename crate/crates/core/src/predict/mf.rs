//! Logistic and softmax matrix factorisation over the observed cells.
//!
//! Binary: `score = μ + b_s + b_q + u_s·v_q`, logistic loss.
//! Categorical: `logit_c = b_{q,c} + u_s·v_{q,c}` for the four options,
//! softmax cross-entropy. A student bias would cancel inside the softmax, so
//! the categorical head has none.
//!
//! Fitting alternates Newton steps over one student's parameters at a time,
//! then one question's, each shortened until its block objective does not
//! increase. Every block subproblem is convex with the other side fixed.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Observation, ResponseMatrix};
use crate::error::{Error, Result};
use crate::predict::irt::Fitted;
use crate::predict::linalg::{cholesky_solve, dot};
use crate::predict::model::{Mode, Prediction, ResponseModel};
use crate::scalar::{log_sigmoid, open_unit_sigmoid, sigmoid, softmax, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfConfig {
    pub k: usize,
    pub epochs: usize,
    /// Initial scale of each Newton step.
    pub learning_rate: f64,
    pub l2: f64,
    pub mode: Mode,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig { k: 8, epochs: 100, learning_rate: 1.0, l2: 10.0, mode: Mode::Binary, seed: 0, tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfModel<F> {
    pub(crate) mode: Mode,
    pub(crate) k: usize,
    pub(crate) user_ids: Vec<u64>,
    pub(crate) question_ids: Vec<u64>,
    pub(crate) user_index: HashMap<u64, usize>,
    pub(crate) question_index: HashMap<u64, usize>,
    /// `n_students × k`, row-major.
    pub(crate) student_factors: Vec<F>,
    /// `n_questions × k` (binary) or `n_questions × 4 × k` (categorical).
    pub(crate) question_factors: Vec<F>,
    /// Zero for the categorical head.
    pub(crate) student_bias: Vec<F>,
    /// `n_questions` (binary) or `n_questions × 4` (categorical).
    pub(crate) question_bias: Vec<F>,
    pub(crate) global_bias: F,
}

fn backtrack_vec<F: Scalar>(w: &[F], dir: &[F], lr: F, current: F, f: impl Fn(&[F]) -> F) -> Option<Vec<F>> {
    let mut step = lr;
    let mut trial = vec![F::zero(); w.len()];
    for _ in 0..30 {
        for ((t, &x), &d) in trial.iter_mut().zip(w).zip(dir) {
            *t = x - step * d;
        }
        let v = f(&trial);
        if v.is_finite() && v <= current {
            return Some(trial);
        }
        step = step * F::of(0.5);
    }
    None
}

/// Adds `weight · x xᵀ` into a square block of `h` starting at (`r0`, `c0`).
#[inline]
fn add_outer<F: Scalar>(h: &mut [F], n: usize, r0: usize, c0: usize, x: &[F], weight: F) {
    for (i, &xi) in x.iter().enumerate() {
        let wx = weight * xi;
        let row = &mut h[(r0 + i) * n + c0..(r0 + i) * n + c0 + x.len()];
        for (hj, &xj) in row.iter_mut().zip(x) {
            *hj += wx * xj;
        }
    }
}

fn ridge<F: Scalar>(h: &mut [F], n: usize, l2: F) {
    for i in 0..n {
        h[i * n + i] += l2;
    }
}

impl<F: Scalar> MfModel<F> {
    pub fn fit(matrix: &ResponseMatrix, config: &MfConfig) -> Result<Fitted<Self, F>> {
        let k = config.k;
        if k == 0 {
            return Err(Error::InvalidArgument("factor dimension k must be at least 1".into()));
        }
        if matrix.is_empty() {
            return Err(Error::InvalidArgument("cannot factorise an empty matrix".into()));
        }
        if k > matrix.n_students().min(matrix.n_questions()) {
            log::warn!(
                "k = {k} exceeds min(n_students, n_questions) = {}",
                matrix.n_students().min(matrix.n_questions())
            );
        }
        let (n_s, n_q) = (matrix.n_students(), matrix.n_questions());
        let per_q = if config.mode == Mode::Categorical { 4 } else { 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, 0.01).expect("valid stdev");
        let mut draw = |n: usize| (0..n).map(|_| F::of(normal.sample(&mut rng))).collect::<Vec<F>>();
        let student_factors = draw(n_s * k);
        let question_factors = draw(n_q * per_q * k);
        let global_bias = match config.mode {
            Mode::Binary => {
                let rate = (matrix.n_correct() as f64 + 0.5) / (matrix.len() as f64 + 1.0);
                F::of((rate / (1.0 - rate)).ln())
            }
            Mode::Categorical => F::zero(),
        };
        let mut model = MfModel {
            mode: config.mode,
            k,
            user_ids: matrix.user_ids().to_vec(),
            question_ids: matrix.question_ids().to_vec(),
            user_index: matrix.user_ids().iter().enumerate().map(|(i, &u)| (u, i)).collect(),
            question_index: matrix.question_ids().iter().enumerate().map(|(i, &q)| (q, i)).collect(),
            student_factors,
            question_factors,
            student_bias: vec![F::zero(); n_s],
            question_bias: vec![F::zero(); n_q * per_q],
            global_bias,
        };
        let l2 = F::of(config.l2);
        let lr = F::of(config.learning_rate);
        let mut losses = vec![model.loss(matrix, l2)];
        for epoch in 1..=config.epochs {
            match config.mode {
                Mode::Binary => {
                    model.binary_global_step(matrix);
                    model.binary_student_block(matrix, l2, lr);
                    model.binary_question_block(matrix, l2, lr);
                }
                Mode::Categorical => {
                    model.categorical_student_block(matrix, l2, lr);
                    model.categorical_question_block(matrix, l2, lr);
                }
            }
            let loss = model.loss(matrix, l2);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let prev = *losses.last().expect("initial loss");
            losses.push(loss);
            if prev - loss <= F::of(config.tolerance) * loss.abs().max(F::one()) {
                break;
            }
        }
        log::debug!("mf fit ({:?}, k={k}): {} epochs, final loss {}", config.mode, losses.len() - 1, losses.last().unwrap());
        Ok(Fitted { model, losses })
    }

    fn u(&self, s: usize) -> &[F] {
        &self.student_factors[s * self.k..(s + 1) * self.k]
    }

    fn v(&self, q: usize, c: usize) -> &[F] {
        let per_q = self.options();
        let start = (q * per_q + c) * self.k;
        &self.question_factors[start..start + self.k]
    }

    fn options(&self) -> usize {
        if self.mode == Mode::Categorical {
            4
        } else {
            1
        }
    }

    fn binary_score(&self, s: usize, q: usize) -> F {
        self.global_bias + self.student_bias[s] + self.question_bias[q] + dot(self.u(s), self.v(q, 0))
    }

    fn categorical_logits(&self, s: usize, q: usize) -> [F; 4] {
        let u = self.u(s);
        std::array::from_fn(|c| self.question_bias[q * 4 + c] + dot(u, self.v(q, c)))
    }

    fn observation_loss(&self, o: &Observation) -> F {
        match self.mode {
            Mode::Binary => {
                let z = self.binary_score(o.student, o.question);
                if o.is_correct {
                    -log_sigmoid(z)
                } else {
                    -log_sigmoid(-z)
                }
            }
            Mode::Categorical => {
                let p = softmax(&self.categorical_logits(o.student, o.question));
                -p[usize::from(o.answer_value.clamp(1, 4) - 1)].max(F::min_positive_value()).ln()
            }
        }
    }

    /// Penalised training loss.
    pub fn loss(&self, matrix: &ResponseMatrix, l2: F) -> F {
        let data: F = matrix.observations().iter().map(|o| self.observation_loss(o)).sum();
        let sq = |v: &[F]| v.iter().map(|&x| x * x).sum::<F>();
        let penalty = sq(&self.student_factors) + sq(&self.question_factors) + sq(&self.student_bias) + sq(&self.question_bias);
        data + F::of(0.5) * l2 * penalty
    }

    fn binary_global_step(&mut self, matrix: &ResponseMatrix) {
        let data_loss = |m: &Self| -> F { matrix.observations().iter().map(|o| m.observation_loss(o)).sum() };
        let (mut g, mut h) = (F::zero(), F::of(1e-9));
        for o in matrix.observations() {
            let p = sigmoid(self.binary_score(o.student, o.question));
            g += p - if o.is_correct { F::one() } else { F::zero() };
            h += p * (F::one() - p);
        }
        let current = data_loss(self);
        let mu = self.global_bias;
        let mut step = g / h;
        for _ in 0..30 {
            self.global_bias = mu - step;
            let v = data_loss(self);
            if v.is_finite() && v <= current {
                return;
            }
            step = step * F::of(0.5);
        }
        self.global_bias = mu;
    }

    fn binary_student_block(&mut self, matrix: &ResponseMatrix, l2: F, lr: F) {
        let k = self.k;
        let n = k + 1;
        for s in 0..matrix.n_students() {
            let row = matrix.student_row(s);
            // fixed part of each score and the regressor x = [1, v_q]
            let cells: Vec<(F, Vec<F>, bool)> = row
                .iter()
                .map(|o| {
                    let offset = self.global_bias + self.question_bias[o.question];
                    let mut x = Vec::with_capacity(n);
                    x.push(F::one());
                    x.extend_from_slice(self.v(o.question, 0));
                    (offset, x, o.is_correct)
                })
                .collect();
            let mut w = Vec::with_capacity(n);
            w.push(self.student_bias[s]);
            w.extend_from_slice(self.u(s));
            if let Some(new) = logistic_newton(&cells, &w, l2, lr) {
                self.student_bias[s] = new[0];
                self.student_factors[s * k..(s + 1) * k].copy_from_slice(&new[1..]);
            }
        }
    }

    fn binary_question_block(&mut self, matrix: &ResponseMatrix, l2: F, lr: F) {
        let k = self.k;
        let n = k + 1;
        for q in 0..matrix.n_questions() {
            let cells: Vec<(F, Vec<F>, bool)> = matrix
                .question_column(q)
                .map(|o| {
                    let offset = self.global_bias + self.student_bias[o.student];
                    let mut x = Vec::with_capacity(n);
                    x.push(F::one());
                    x.extend_from_slice(self.u(o.student));
                    (offset, x, o.is_correct)
                })
                .collect();
            let mut w = Vec::with_capacity(n);
            w.push(self.question_bias[q]);
            w.extend_from_slice(self.v(q, 0));
            if let Some(new) = logistic_newton(&cells, &w, l2, lr) {
                self.question_bias[q] = new[0];
                self.question_factors[q * k..(q + 1) * k].copy_from_slice(&new[1..]);
            }
        }
    }

    fn categorical_student_block(&mut self, matrix: &ResponseMatrix, l2: F, lr: F) {
        let k = self.k;
        for s in 0..matrix.n_students() {
            let row = matrix.student_row(s);
            // per cell: option biases, option vectors (4 × k) and the chosen option
            let cells: Vec<([F; 4], Vec<F>, usize)> = row
                .iter()
                .map(|o| {
                    let q = o.question;
                    let bias = std::array::from_fn(|c| self.question_bias[q * 4 + c]);
                    let vs = self.question_factors[q * 4 * k..(q + 1) * 4 * k].to_vec();
                    (bias, vs, usize::from(o.answer_value.clamp(1, 4) - 1))
                })
                .collect();
            let objective = |u: &[F]| -> F {
                let data: F = cells
                    .iter()
                    .map(|(bias, vs, y)| {
                        let logits: [F; 4] = std::array::from_fn(|c| bias[c] + dot(u, &vs[c * k..(c + 1) * k]));
                        -softmax(&logits)[*y].max(F::min_positive_value()).ln()
                    })
                    .sum();
                data + F::of(0.5) * l2 * dot(u, u)
            };
            let u = self.u(s).to_vec();
            let mut g: Vec<F> = u.iter().map(|&x| l2 * x).collect();
            let mut h = vec![F::zero(); k * k];
            ridge(&mut h, k, l2);
            for (bias, vs, y) in &cells {
                let logits: [F; 4] = std::array::from_fn(|c| bias[c] + dot(&u, &vs[c * k..(c + 1) * k]));
                let p = softmax(&logits);
                let mut mean = vec![F::zero(); k];
                for c in 0..4 {
                    let vc = &vs[c * k..(c + 1) * k];
                    let r = p[c] - if c == *y { F::one() } else { F::zero() };
                    for j in 0..k {
                        g[j] += r * vc[j];
                        mean[j] += p[c] * vc[j];
                    }
                    add_outer(&mut h, k, 0, 0, vc, p[c]);
                }
                add_outer(&mut h, k, 0, 0, &mean, -F::one());
            }
            let Some(dir) = cholesky_solve(&h, &g) else { continue };
            let current = objective(&u);
            if let Some(new) = backtrack_vec(&u, &dir, lr, current, &objective) {
                self.student_factors[s * k..(s + 1) * k].copy_from_slice(&new);
            }
        }
    }

    fn categorical_question_block(&mut self, matrix: &ResponseMatrix, l2: F, lr: F) {
        let k = self.k;
        let d = k + 1;
        let n = 4 * d;
        for q in 0..matrix.n_questions() {
            // regressor x = [1, u_s] and the chosen option for each respondent
            let cells: Vec<(Vec<F>, usize)> = matrix
                .question_column(q)
                .map(|o| {
                    let mut x = Vec::with_capacity(d);
                    x.push(F::one());
                    x.extend_from_slice(self.u(o.student));
                    (x, usize::from(o.answer_value.clamp(1, 4) - 1))
                })
                .collect();
            // w = [b_c, v_c] for c = 0..4
            let mut w = Vec::with_capacity(n);
            for c in 0..4 {
                w.push(self.question_bias[q * 4 + c]);
                w.extend_from_slice(self.v(q, c));
            }
            let logits_of = |w: &[F], x: &[F]| -> [F; 4] { std::array::from_fn(|c| dot(&w[c * d..(c + 1) * d], x)) };
            let objective = |w: &[F]| -> F {
                let data: F = cells
                    .iter()
                    .map(|(x, y)| -softmax(&logits_of(w, x))[*y].max(F::min_positive_value()).ln())
                    .sum();
                data + F::of(0.5) * l2 * dot(w, w)
            };
            let mut g: Vec<F> = w.iter().map(|&x| l2 * x).collect();
            let mut h = vec![F::zero(); n * n];
            ridge(&mut h, n, l2);
            for (x, y) in &cells {
                let p = softmax(&logits_of(&w, x));
                for c in 0..4 {
                    let r = p[c] - if c == *y { F::one() } else { F::zero() };
                    for (gj, &xj) in g[c * d..(c + 1) * d].iter_mut().zip(x) {
                        *gj += r * xj;
                    }
                    for c2 in 0..4 {
                        let weight = if c == c2 { p[c] - p[c] * p[c2] } else { -p[c] * p[c2] };
                        add_outer(&mut h, n, c * d, c2 * d, x, weight);
                    }
                }
            }
            let Some(dir) = cholesky_solve(&h, &g) else { continue };
            let current = objective(&w);
            if let Some(new) = backtrack_vec(&w, &dir, lr, current, &objective) {
                for c in 0..4 {
                    self.question_bias[q * 4 + c] = new[c * d];
                    let start = (q * 4 + c) * k;
                    self.question_factors[start..start + k].copy_from_slice(&new[c * d + 1..(c + 1) * d]);
                }
            }
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn user_ids(&self) -> &[u64] {
        &self.user_ids
    }

    pub fn question_ids(&self) -> &[u64] {
        &self.question_ids
    }

    pub fn predict_index(&self, s: usize, q: usize) -> Prediction<F> {
        match self.mode {
            Mode::Binary => Prediction::Binary(open_unit_sigmoid(self.binary_score(s, q))),
            Mode::Categorical => Prediction::Categorical(softmax(&self.categorical_logits(s, q))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        mode: Mode,
        k: usize,
        user_ids: Vec<u64>,
        question_ids: Vec<u64>,
        student_factors: Vec<F>,
        question_factors: Vec<F>,
        student_bias: Vec<F>,
        question_bias: Vec<F>,
        global_bias: F,
    ) -> Result<Self> {
        let per_q = if mode == Mode::Categorical { 4 } else { 1 };
        let (n_s, n_q) = (user_ids.len(), question_ids.len());
        if k == 0
            || student_factors.len() != n_s * k
            || question_factors.len() != n_q * per_q * k
            || student_bias.len() != n_s
            || question_bias.len() != n_q * per_q
        {
            return Err(Error::Mismatch("factor model dimensions disagree".into()));
        }
        Ok(MfModel {
            mode,
            k,
            user_index: user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect(),
            question_index: question_ids.iter().enumerate().map(|(i, &q)| (q, i)).collect(),
            user_ids,
            question_ids,
            student_factors,
            question_factors,
            student_bias,
            question_bias,
            global_bias,
        })
    }
}

/// One safeguarded Newton step of a ridge-penalised logistic regression.
///
/// `cells` holds (fixed offset, regressor, label); the block objective is
/// `Σ nll(offset + w·x) + l2/2 |w|²`.
fn logistic_newton<F: Scalar>(cells: &[(F, Vec<F>, bool)], w: &[F], l2: F, lr: F) -> Option<Vec<F>> {
    let n = w.len();
    let objective = |w: &[F]| -> F {
        let data: F = cells
            .iter()
            .map(|(off, x, y)| {
                let z = *off + dot(w, x);
                if *y {
                    -log_sigmoid(z)
                } else {
                    -log_sigmoid(-z)
                }
            })
            .sum();
        data + F::of(0.5) * l2 * dot(w, w)
    };
    let mut g: Vec<F> = w.iter().map(|&x| l2 * x).collect();
    let mut h = vec![F::zero(); n * n];
    ridge(&mut h, n, l2);
    for (off, x, y) in cells {
        let p = sigmoid(*off + dot(w, x));
        let r = p - if *y { F::one() } else { F::zero() };
        for (gj, &xj) in g.iter_mut().zip(x) {
            *gj += r * xj;
        }
        add_outer(&mut h, n, 0, 0, x, p * (F::one() - p));
    }
    let dir = cholesky_solve(&h, &g)?;
    backtrack_vec(w, &dir, lr, objective(w), objective)
}

impl<F: Scalar> ResponseModel<F> for MfModel<F> {
    fn supports(&self, mode: Mode) -> bool {
        mode == self.mode
    }

    fn predict(&self, user_id: u64, question_id: u64, mode: Mode) -> Result<Prediction<F>> {
        if mode != self.mode {
            return Err(Error::Mismatch(format!("model was trained for {:?} output", self.mode)));
        }
        let s = self.user_index.get(&user_id).copied().ok_or(Error::UnknownId { kind: "user", id: user_id })?;
        let q = self
            .question_index
            .get(&question_id)
            .copied()
            .ok_or(Error::UnknownId { kind: "question", id: question_id })?;
        Ok(self.predict_index(s, q))
    }
}
