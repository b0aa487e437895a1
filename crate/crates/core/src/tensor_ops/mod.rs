//! Hand-written forward and backward kernels for every layer type.
//!
//! Index convention: the layer definitions use 1-based taps `x ∈ [1, k]` and
//! output positions `y ∈ [1, L]`, reading the input at `y·d − x + c` with
//! `c = k − d + 1`. The translation to 0-based storage happens once, in
//! [`source_index`]; every kernel below goes through it (or its `y0 = 0`
//! special case, the per-tap base offset `k − 1 − x0`).

use crate::Real;

mod activation;
mod conv;
mod dropout;
mod frames;
mod linear;
mod loss;
mod pool;

pub use activation::{relu, relu_backward, relu_backward_slice, relu_forward};
pub use conv::{
    conv_backward, conv_forward, conv_forward_onehot, conv_input_grad, conv_weight_grad,
    conv_weight_grad_onehot, ConvGrads, ConvKernel,
};
pub use dropout::{dropout, dropout_backward, DropoutMask, Mode};
pub use frames::FrameSeq;
pub(crate) use conv::{
    conv_forward_gemm, conv_input_grad_gemm, conv_weight_accumulate_gemm, conv_weight_accumulate_onehot,
};
pub(crate) use linear::linear_input_grad;
pub use linear::{linear_backward, linear_forward, LinearGrads, LinearWeights};
pub use loss::{softmax, softmax_nll};
pub use pool::{maxpool_backward, maxpool_forward, ArgMax, PoolOutput, PoolSpec};

/// Output length of a window of width `k` slid with stride `d` over `l`
/// positions: the number of `y ≥ 1` for which every read index
/// `y·d − x + c` (`x ∈ [1, k]`) stays within `[1, l]`.
///
/// Returns `None` when not even one window fits.
pub fn output_length(l: usize, k: usize, d: usize) -> Option<usize> {
    if k == 0 || d == 0 || l < k {
        None
    } else {
        Some((l - k) / d + 1)
    }
}

/// 0-based input position read by 0-based output `y0` at 0-based tap `x0`.
///
/// With `y = y0 + 1`, `x = x0 + 1` and `c = k − d + 1`, the 1-based position
/// `y·d − x + c` minus one equals `y0·d + (k − 1 − x0)`.
#[inline]
pub fn source_index(y0: usize, x0: usize, k: usize, d: usize) -> usize {
    y0 * d + (k - 1 - x0)
}

/// Dot product with eight independent partial sums, which lets the compiler
/// vectorize the loop.
#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut lanes = [T::zero(); 8];
    let mut chunks_a = a.chunks_exact(8);
    let mut chunks_b = b.chunks_exact(8);
    for (ca, cb) in chunks_a.by_ref().zip(chunks_b.by_ref()) {
        for i in 0..8 {
            lanes[i] += ca[i] * cb[i];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
        tail += x * y;
    }
    ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) + ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])) + tail
}
