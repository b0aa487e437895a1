use super::FrameSeq;
use crate::{Error, Real, Result};

/// Elementwise `max(0, x)`.
pub fn relu<T: Real>(input: &[T]) -> Vec<T> {
    input.iter().map(|&v| v.max(T::zero())).collect()
}

/// Passes `grad_output` where `input > 0`; the subgradient at exactly 0 is 0.
pub fn relu_backward_slice<T: Real>(input: &[T], grad_output: &[T]) -> Result<Vec<T>> {
    if input.len() != grad_output.len() {
        return Err(Error::shape("relu grad_output", input.len(), grad_output.len()));
    }
    Ok(input
        .iter()
        .zip(grad_output)
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect())
}

pub fn relu_forward<T: Real>(input: &FrameSeq<T>) -> FrameSeq<T> {
    input.map(|v| v.max(T::zero()))
}

pub fn relu_backward<T: Real>(input: &FrameSeq<T>, grad_output: &FrameSeq<T>) -> Result<FrameSeq<T>> {
    grad_output.expect_shape("relu grad_output", input.frames(), input.length())?;
    let data = relu_backward_slice(input.as_slice(), grad_output.as_slice())?;
    FrameSeq::from_vec(input.frames(), input.length(), data)
}
