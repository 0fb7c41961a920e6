//! Small dense linear algebra used by the fitting routines.

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Dense<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Dense { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> F {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [F] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Dense::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn frobenius_distance(&self, other: &Self) -> F {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b) * (a - b)).sum::<F>().sqrt()
    }
}

#[inline]
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solves `h x = g` for a symmetric positive definite `h` (row-major, `n × n`).
///
/// Returns `None` when the Cholesky factorisation breaks down.
pub fn cholesky_solve<F: Scalar>(h: &[F], g: &[F]) -> Option<Vec<F>> {
    let n = g.len();
    debug_assert_eq!(h.len(), n * n);
    let mut l = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > F::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![F::zero(); n];
    for i in 0..n {
        let mut s = g[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![F::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Thin singular value decomposition `a = u diag(s) vᵀ`.
pub struct Svd<F> {
    /// `rows × r` with orthonormal columns, `r = min(rows, cols)`.
    pub u: Dense<F>,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<F>,
    /// `cols × r` with orthonormal columns.
    pub v: Dense<F>,
}

/// One-sided Jacobi SVD.
pub fn svd<F: Scalar>(a: &Dense<F>) -> Svd<F> {
    if a.cols() > a.rows() {
        let t = svd(&a.transpose());
        return Svd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    let (m, n) = (a.rows(), a.cols());
    // Work column-major: w[j] is column j of the rotated matrix.
    let mut w: Vec<Vec<F>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<F>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { F::one() } else { F::zero() }).collect())
        .collect();
    let eps = F::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == F::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (F::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (F::one() + zeta * zeta).sqrt());
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    let (left, right) = cols.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let (xp, yq) = (*x, *y);
                        *x = c * xp - s * yq;
                        *y = s * xp + c * yq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<F> = w.iter().map(|col| dot(col, col).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = Dense::zeros(m, n);
    let mut vv = Dense::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let tiny = eps * norms.iter().copied().fold(F::zero(), F::max) * F::of_usize(m.max(1));
    for (out, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        for i in 0..n {
            vv.set(i, out, v[j][i]);
        }
        if sigma > tiny {
            for i in 0..m {
                u.set(i, out, w[j][i] / sigma);
            }
        }
    }
    complete_orthonormal(&mut u, &s, tiny);
    Svd { u, singular_values: s, v: vv }
}

/// Fills the columns of `u` that belong to zero singular values with an
/// orthonormal completion, so `u` always has orthonormal columns.
fn complete_orthonormal<F: Scalar>(u: &mut Dense<F>, s: &[F], tiny: F) {
    let (m, r) = (u.rows(), u.cols());
    let mut basis = 0;
    for j in 0..r {
        if s[j] > tiny {
            continue;
        }
        while basis < m {
            let mut cand = vec![F::zero(); m];
            cand[basis] = F::one();
            basis += 1;
            for k in 0..r {
                if k == j || (s[k] <= tiny && k > j) {
                    continue;
                }
                let col: Vec<F> = (0..m).map(|i| u.get(i, k)).collect();
                let proj = dot(&cand, &col);
                for (c, x) in cand.iter_mut().zip(&col) {
                    *c -= proj * *x;
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if norm > F::of(1e-6) {
                for i in 0..m {
                    u.set(i, j, cand[i] / norm);
                }
                break;
            }
        }
    }
}
