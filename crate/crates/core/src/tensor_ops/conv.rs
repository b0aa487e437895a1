use super::{output_length, source_index, FrameSeq};
use crate::{Error, Real, Result, Strided};

/// Kernel bank of a temporal convolution: one `width`-tap kernel per
/// (output frame, input frame) pair.
///
/// Weights are stored `[out_frame][in_frame][tap]` with tap `x0 = x − 1`, so
/// `weight(j, i, 0)` is the 1-based tap `f_ij(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel<T> {
    out_frames: usize,
    in_frames: usize,
    width: usize,
    stride: usize,
    weights: Vec<T>,
}

impl<T: Real> ConvKernel<T> {
    pub fn new(
        out_frames: usize,
        in_frames: usize,
        width: usize,
        stride: usize,
        weights: Vec<T>,
    ) -> Result<Self> {
        if out_frames == 0 || in_frames == 0 || width == 0 {
            return Err(Error::Config(format!(
                "conv kernel dimensions must be >= 1, got {out_frames}x{in_frames}x{width}"
            )));
        }
        if stride == 0 || stride > width {
            return Err(Error::Config(format!(
                "conv stride must satisfy 1 <= d <= k, got d={stride}, k={width}"
            )));
        }
        let expected = out_frames * in_frames * width;
        if weights.len() != expected {
            return Err(Error::shape(
                "ConvKernel::new",
                format!("{expected} weights"),
                weights.len(),
            ));
        }
        Ok(ConvKernel {
            out_frames,
            in_frames,
            width,
            stride,
            weights,
        })
    }

    pub fn zeros(out_frames: usize, in_frames: usize, width: usize, stride: usize) -> Result<Self> {
        Self::new(
            out_frames,
            in_frames,
            width,
            stride,
            vec![T::zero(); out_frames * in_frames * width],
        )
    }

    pub fn zeros_like(&self) -> Self {
        ConvKernel {
            weights: vec![T::zero(); self.weights.len()],
            ..*self
        }
    }

    pub fn out_frames(&self) -> usize {
        self.out_frames
    }

    pub fn in_frames(&self) -> usize {
        self.in_frames
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// The offset constant `c = k − d + 1`.
    pub fn offset(&self) -> usize {
        self.width - self.stride + 1
    }

    #[inline]
    pub fn weight(&self, out_frame: usize, in_frame: usize, tap: usize) -> T {
        self.weights[self.index(out_frame, in_frame, tap)]
    }

    #[inline]
    pub fn set_weight(&mut self, out_frame: usize, in_frame: usize, tap: usize, value: T) {
        let idx = self.index(out_frame, in_frame, tap);
        self.weights[idx] = value;
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    /// Taps of the kernel connecting `in_frame` to `out_frame`.
    pub fn taps(&self, out_frame: usize, in_frame: usize) -> &[T] {
        let start = self.index(out_frame, in_frame, 0);
        &self.weights[start..start + self.width]
    }

    pub fn output_length(&self, input_length: usize) -> Option<usize> {
        output_length(input_length, self.width, self.stride)
    }

    #[inline]
    fn index(&self, out_frame: usize, in_frame: usize, tap: usize) -> usize {
        (out_frame * self.in_frames + in_frame) * self.width + tap
    }

    fn checked_output_length(&self, input_length: usize) -> Result<usize> {
        self.output_length(input_length).ok_or_else(|| {
            Error::InputTooShort(format!(
                "convolution of width {} needs at least {} positions, got {input_length}",
                self.width, self.width
            ))
        })
    }
}

/// Gradients of [`conv_forward`] with respect to its input and its kernel.
#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub input: FrameSeq<T>,
    pub kernel: ConvKernel<T>,
}

fn check_input<T: Real>(input: &FrameSeq<T>, kernel: &ConvKernel<T>) -> Result<usize> {
    if input.frames() != kernel.in_frames {
        return Err(Error::shape(
            "conv input frames",
            format!("{} frames (kernel {}x{}x{})", kernel.in_frames, kernel.out_frames, kernel.in_frames, kernel.width),
            format!("input {}", input.shape_string()),
        ));
    }
    kernel.checked_output_length(input.length())
}

fn check_grad_output<T: Real>(
    input_length: usize,
    kernel: &ConvKernel<T>,
    grad_output: &FrameSeq<T>,
) -> Result<usize> {
    let out_len = kernel.checked_output_length(input_length)?;
    grad_output.expect_shape("conv grad_output", kernel.out_frames, out_len)?;
    Ok(out_len)
}

/// Temporal convolution: `h_j(y) = Σ_i Σ_x f_ij(x) · g_i(y·d − x + c)`.
///
/// No padding and no bias. Output length is `(l − k) / d + 1`.
pub fn conv_forward<T: Real>(input: &FrameSeq<T>, kernel: &ConvKernel<T>) -> Result<FrameSeq<T>> {
    let out_len = check_input(input, kernel)?;
    let (k, d) = (kernel.width, kernel.stride);
    let mut output = FrameSeq::zeros(kernel.out_frames, out_len);
    for j in 0..kernel.out_frames {
        let out = output.row_mut(j);
        for i in 0..kernel.in_frames {
            let g = input.row(i);
            for (x0, &w) in kernel.taps(j, i).iter().enumerate() {
                let base = source_index(0, x0, k, d);
                if d == 1 {
                    for (o, &v) in out.iter_mut().zip(&g[base..base + out_len]) {
                        *o += w * v;
                    }
                } else {
                    for (y0, o) in out.iter_mut().enumerate() {
                        *o += w * g[base + y0 * d];
                    }
                }
            }
        }
    }
    Ok(output)
}

/// [`conv_forward`] for a one-hot input given as the active frame of each
/// position (`None` for an all-zero column).
pub fn conv_forward_onehot<T: Real>(
    active: &[Option<usize>],
    kernel: &ConvKernel<T>,
) -> Result<FrameSeq<T>> {
    check_onehot(active, kernel)?;
    let out_len = kernel.checked_output_length(active.len())?;
    let (k, d, n) = (kernel.width, kernel.stride, kernel.out_frames);
    // Work position-major so each active tap adds one contiguous kernel
    // column across all output frames.
    let columns = kernel_columns(kernel);
    let mut by_position = vec![T::zero(); out_len * n];
    for (y0, out) in by_position.chunks_exact_mut(n.max(1)).enumerate().take(out_len) {
        for x0 in 0..k {
            if let Some(i) = active[source_index(y0, x0, k, d)] {
                for (o, &w) in out.iter_mut().zip(&columns[(i * k + x0) * n..][..n]) {
                    *o += w;
                }
            }
        }
    }
    let mut output = FrameSeq::zeros(n, out_len);
    for j in 0..n {
        for (y0, o) in output.row_mut(j).iter_mut().enumerate() {
            *o = by_position[y0 * n + j];
        }
    }
    Ok(output)
}

/// Gradient of the convolution with respect to its input only.
pub fn conv_input_grad<T: Real>(
    input_shape: (usize, usize),
    kernel: &ConvKernel<T>,
    grad_output: &FrameSeq<T>,
) -> Result<FrameSeq<T>> {
    let (frames, length) = input_shape;
    if frames != kernel.in_frames {
        return Err(Error::shape(
            "conv input frames",
            kernel.in_frames,
            frames,
        ));
    }
    let out_len = check_grad_output(length, kernel, grad_output)?;
    let (k, d) = (kernel.width, kernel.stride);
    let mut grad_input = FrameSeq::zeros(frames, length);
    for j in 0..kernel.out_frames {
        let go = grad_output.row(j);
        for i in 0..kernel.in_frames {
            let gi = grad_input.row_mut(i);
            for (x0, &w) in kernel.taps(j, i).iter().enumerate() {
                let base = source_index(0, x0, k, d);
                if d == 1 {
                    for (g, &v) in gi[base..base + out_len].iter_mut().zip(go) {
                        *g += w * v;
                    }
                } else {
                    for (y0, &v) in go.iter().enumerate() {
                        gi[base + y0 * d] += w * v;
                    }
                }
            }
        }
    }
    Ok(grad_input)
}

/// Gradient of the convolution with respect to its kernel only.
pub fn conv_weight_grad<T: Real>(
    input: &FrameSeq<T>,
    kernel: &ConvKernel<T>,
    grad_output: &FrameSeq<T>,
) -> Result<ConvKernel<T>> {
    check_input(input, kernel)?;
    let mut grad = kernel.zeros_like();
    conv_weight_accumulate(input, grad_output, &mut grad)?;
    Ok(grad)
}

/// Adds the kernel gradient for one (input, grad_output) pair into `grad`.
fn conv_weight_accumulate<T: Real>(
    input: &FrameSeq<T>,
    grad_output: &FrameSeq<T>,
    grad: &mut ConvKernel<T>,
) -> Result<()> {
    check_input(input, grad)?;
    check_grad_output(input.length(), grad, grad_output)?;
    let (k, d) = (grad.width, grad.stride);
    for j in 0..grad.out_frames {
        let go = grad_output.row(j);
        for i in 0..grad.in_frames {
            let g = input.row(i);
            for x0 in 0..k {
                let base = source_index(0, x0, k, d);
                let sum: T = if d == 1 {
                    super::dot(go, &g[base..base + go.len()])
                } else {
                    go.iter()
                        .enumerate()
                        .fold(T::zero(), |acc, (y0, &a)| acc + a * g[base + y0 * d])
                };
                let idx = grad.index(j, i, x0);
                grad.weights[idx] += sum;
            }
        }
    }
    Ok(())
}

/// Kernel gradient for a one-hot input (see [`conv_forward_onehot`]).
pub fn conv_weight_grad_onehot<T: Real>(
    active: &[Option<usize>],
    kernel: &ConvKernel<T>,
    grad_output: &FrameSeq<T>,
) -> Result<ConvKernel<T>> {
    let mut grad = kernel.zeros_like();
    conv_weight_accumulate_onehot(active, grad_output, &mut grad)?;
    Ok(grad)
}

pub(crate) fn conv_weight_accumulate_onehot<T: Real>(
    active: &[Option<usize>],
    grad_output: &FrameSeq<T>,
    grad: &mut ConvKernel<T>,
) -> Result<()> {
    check_onehot(active, grad)?;
    check_grad_output(active.len(), grad, grad_output)?;
    let (k, d, n) = (grad.width, grad.stride, grad.out_frames);
    let out_len = grad_output.length();
    let mut by_position = vec![T::zero(); out_len * n];
    for j in 0..n {
        for (y0, &v) in grad_output.row(j).iter().enumerate() {
            by_position[y0 * n + j] = v;
        }
    }
    let mut columns = vec![T::zero(); grad.in_frames * k * n];
    for (y0, go) in by_position.chunks_exact(n.max(1)).enumerate().take(out_len) {
        for x0 in 0..k {
            if let Some(i) = active[source_index(y0, x0, k, d)] {
                for (c, &v) in columns[(i * k + x0) * n..][..n].iter_mut().zip(go) {
                    *c += v;
                }
            }
        }
    }
    for j in 0..n {
        for col in 0..grad.in_frames * k {
            grad.weights[j * grad.in_frames * k + col] += columns[col * n + j];
        }
    }
    Ok(())
}

/// Kernel weights regrouped so that `(in_frame, tap)` pairs are rows and
/// output frames are contiguous.
fn kernel_columns<T: Real>(kernel: &ConvKernel<T>) -> Vec<T> {
    let inner = kernel.in_frames * kernel.width;
    let mut columns = vec![T::zero(); inner * kernel.out_frames];
    for j in 0..kernel.out_frames {
        for col in 0..inner {
            columns[col * kernel.out_frames + j] = kernel.weights[j * inner + col];
        }
    }
    columns
}

fn check_onehot<T: Real>(active: &[Option<usize>], kernel: &ConvKernel<T>) -> Result<()> {
    if let Some(bad) = active.iter().flatten().find(|&&i| i >= kernel.in_frames) {
        return Err(Error::shape(
            "one-hot conv input",
            format!("frame index < {}", kernel.in_frames),
            bad,
        ));
    }
    Ok(())
}

/// Both gradients of [`conv_forward`]. Input positions the forward pass never
/// reads get a zero gradient.
pub fn conv_backward<T: Real>(
    input: &FrameSeq<T>,
    kernel: &ConvKernel<T>,
    grad_output: &FrameSeq<T>,
) -> Result<ConvGrads<T>> {
    let kernel_grad = conv_weight_grad(input, kernel, grad_output)?;
    let input_grad = conv_input_grad(input.shape(), kernel, grad_output)?;
    Ok(ConvGrads {
        input: input_grad,
        kernel: kernel_grad,
    })
}

/// Unrolled input: row `i·k + x0` holds the values tap `x0` of input frame
/// `i` reads at every output position.
fn unroll<T: Real>(input: &FrameSeq<T>, k: usize, d: usize, out_len: usize) -> Vec<T> {
    let mut cols = Vec::with_capacity(input.frames() * k * out_len);
    for i in 0..input.frames() {
        let g = input.row(i);
        for x0 in 0..k {
            let base = source_index(0, x0, k, d);
            cols.extend((0..out_len).map(|y0| g[base + y0 * d]));
        }
    }
    cols
}

// The three functions below compute the same quantities as conv_forward,
// conv_input_grad and conv_weight_accumulate as matrix products. They add
// terms in a different order, so they agree with the loops up to rounding.

pub(crate) fn conv_forward_gemm<T: Real>(input: &FrameSeq<T>, kernel: &ConvKernel<T>) -> Result<FrameSeq<T>> {
    let out_len = check_input(input, kernel)?;
    let inner = kernel.in_frames * kernel.width;
    let cols = unroll(input, kernel.width, kernel.stride, out_len);
    let mut out = vec![T::zero(); kernel.out_frames * out_len];
    T::gemm(
        Strided::row_major(&kernel.weights, kernel.out_frames, inner),
        Strided::row_major(&cols, inner, out_len),
        T::zero(),
        &mut out,
    );
    FrameSeq::from_vec(kernel.out_frames, out_len, out)
}

pub(crate) fn conv_input_grad_gemm<T: Real>(
    input_shape: (usize, usize),
    kernel: &ConvKernel<T>,
    grad_output: &FrameSeq<T>,
) -> Result<FrameSeq<T>> {
    let (frames, length) = input_shape;
    if frames != kernel.in_frames {
        return Err(Error::shape("conv input frames", kernel.in_frames, frames));
    }
    let out_len = check_grad_output(length, kernel, grad_output)?;
    let (k, d) = (kernel.width, kernel.stride);
    let inner = frames * k;
    let mut cols = vec![T::zero(); inner * out_len];
    T::gemm(
        Strided::row_major(&kernel.weights, kernel.out_frames, inner).transposed(),
        Strided::row_major(grad_output.as_slice(), kernel.out_frames, out_len),
        T::zero(),
        &mut cols,
    );
    let mut grad_input = FrameSeq::zeros(frames, length);
    for i in 0..frames {
        let gi = grad_input.row_mut(i);
        for x0 in 0..k {
            let base = source_index(0, x0, k, d);
            let row = &cols[(i * k + x0) * out_len..][..out_len];
            for (y0, &v) in row.iter().enumerate() {
                gi[base + y0 * d] += v;
            }
        }
    }
    Ok(grad_input)
}

pub(crate) fn conv_weight_accumulate_gemm<T: Real>(
    input: &FrameSeq<T>,
    grad_output: &FrameSeq<T>,
    grad: &mut ConvKernel<T>,
) -> Result<()> {
    check_input(input, grad)?;
    let out_len = check_grad_output(input.length(), grad, grad_output)?;
    let inner = grad.in_frames * grad.width;
    let cols = unroll(input, grad.width, grad.stride, out_len);
    T::gemm(
        Strided::row_major(grad_output.as_slice(), grad.out_frames, out_len),
        Strided::row_major(&cols, inner, out_len).transposed(),
        T::one(),
        &mut grad.weights,
    );
    Ok(())
}
