//! Scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar the planning math is written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Numerically stable softmax. Every component of the result is positive and
/// the components sum to one (up to rounding) for any finite input.
pub fn softmax<T: Real>(xs: &[T]) -> Vec<T> {
    if xs.is_empty() {
        return Vec::new();
    }
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = xs.iter().map(|&x| (x - max).exp()).collect();
    let total = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / total).collect()
}
