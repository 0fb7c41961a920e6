use crate::dataset::ResponseMatrix;
use crate::error::{Error, Result};
use crate::predict::linalg::{svd, Dense};
use crate::scalar::Scalar;

/// Rank-k latent features of the correctness matrix.
#[derive(Debug, Clone)]
pub struct SvdFeatures<F> {
    /// Left singular vectors, `n_students × k`.
    pub student_vectors: Dense<F>,
    /// Right singular vectors, `n_questions × k`.
    pub question_vectors: Dense<F>,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<F>,
}

/// Dense correctness matrix with observed cells centred on the global mean
/// and unobserved cells set to zero.
pub fn centred_correctness<F: Scalar>(matrix: &ResponseMatrix) -> Dense<F> {
    let mut dense = Dense::zeros(matrix.n_students(), matrix.n_questions());
    if matrix.is_empty() {
        return dense;
    }
    let mean = F::of_usize(matrix.n_correct()) / F::of_usize(matrix.len());
    for o in matrix.observations() {
        let y = if o.is_correct { F::one() } else { F::zero() };
        dense.set(o.student, o.question, y - mean);
    }
    dense
}

/// Truncated SVD of the centred, zero-imputed correctness matrix.
pub fn svd_features<F: Scalar>(matrix: &ResponseMatrix, k: usize) -> Result<SvdFeatures<F>> {
    svd_features_dense(&centred_correctness(matrix), k)
}

/// Truncated SVD of an arbitrary dense matrix; `1 <= k <= min(rows, cols)`.
pub fn svd_features_dense<F: Scalar>(dense: &Dense<F>, k: usize) -> Result<SvdFeatures<F>> {
    let max_k = dense.rows().min(dense.cols());
    if k == 0 || k > max_k {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={max_k}")));
    }
    let full = svd(dense);
    let take = |m: &Dense<F>| {
        let mut out = Dense::zeros(m.rows(), k);
        for r in 0..m.rows() {
            out.row_mut(r).copy_from_slice(&m.row(r)[..k]);
        }
        out
    };
    Ok(SvdFeatures {
        student_vectors: take(&full.u),
        question_vectors: take(&full.v),
        singular_values: full.singular_values[..k].to_vec(),
    })
}

impl<F: Scalar> SvdFeatures<F> {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(s) Vᵀ`.
    pub fn reconstruct(&self) -> Dense<F> {
        let (n, m) = (self.student_vectors.rows(), self.question_vectors.rows());
        let mut out = Dense::zeros(n, m);
        for i in 0..n {
            let u = self.student_vectors.row(i);
            for j in 0..m {
                let v = self.question_vectors.row(j);
                let x: F = (0..self.k()).map(|c| u[c] * self.singular_values[c] * v[c]).sum();
                out.set(i, j, x);
            }
        }
        out
    }

    /// Frobenius norm of `target − reconstruction`.
    pub fn reconstruction_error(&self, target: &Dense<F>) -> F {
        self.reconstruct().frobenius_distance(target)
    }

    /// Student embedding scaled by the singular values, as used for downstream features.
    pub fn scaled_student_vector(&self, student: usize) -> Vec<F> {
        self.student_vectors.row(student).iter().zip(&self.singular_values).map(|(&u, &s)| u * s).collect()
    }

    pub fn scaled_question_vector(&self, question: usize) -> Vec<F> {
        self.question_vectors.row(question).iter().zip(&self.singular_values).map(|(&v, &s)| v * s).collect()
    }
}
