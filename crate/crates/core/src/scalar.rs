use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the numerical routines are generic over.
///
/// Implemented for `f32` and `f64`. Counts and probabilities that cross the
/// file-format boundary are always converted through `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `ln(sigmoid(x))` without overflow.
#[inline]
pub fn log_sigmoid<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Logistic probability clamped into the open unit interval.
#[inline]
pub fn open_unit_sigmoid<F: Scalar>(x: F) -> F {
    let p = sigmoid(x);
    let eps = F::epsilon();
    p.max(eps).min(F::one() - eps)
}

/// Softmax over a fixed-size array of logits.
pub fn softmax<F: Scalar, const N: usize>(logits: &[F; N]) -> [F; N] {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let mut out = [F::zero(); N];
    let mut total = F::zero();
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax_first<F: Scalar>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_symmetry() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!((sigmoid(2.0f64) - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert!((sigmoid(-3.0f32) + sigmoid(3.0f32) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn open_interval_at_extremes() {
        let lo = open_unit_sigmoid(-1e6f64);
        let hi = open_unit_sigmoid(1e6f64);
        assert!(lo > 0.0 && hi < 1.0);
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0f64, 0.0, -5.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let u = softmax(&[0.0f32; 4]);
        assert!(u.iter().all(|&x| (x - 0.25).abs() < 1e-7));
    }

    #[test]
    fn argmax_ties_to_first() {
        assert_eq!(argmax_first(&[0.2f64, 0.4, 0.4, 0.0]), 1);
    }
}
