use super::{output_length, source_index, FrameSeq};
use crate::{Error, Real, Result};

/// Temporal max-pooling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSpec {
    width: usize,
    stride: usize,
}

impl PoolSpec {
    /// Non-overlapping pool (`stride == width`), the only kind the
    /// architectures use.
    pub fn new(width: usize) -> Result<Self> {
        Self::with_stride(width, width)
    }

    /// General pool with `1 <= stride <= width`.
    pub fn with_stride(width: usize, stride: usize) -> Result<Self> {
        if width == 0 || stride == 0 || stride > width {
            return Err(Error::Config(format!(
                "pool must satisfy 1 <= d <= k, got k={width}, d={stride}"
            )));
        }
        Ok(PoolSpec { width, stride })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn output_length(&self, input_length: usize) -> Option<usize> {
        output_length(input_length, self.width, self.stride)
    }
}

/// Winning input position for every pooled output, frame-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgMax {
    frames: usize,
    length: usize,
    indices: Vec<usize>,
}

impl ArgMax {
    pub fn from_parts(frames: usize, length: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.len() != frames * length {
            return Err(Error::shape(
                "ArgMax::from_parts",
                frames * length,
                indices.len(),
            ));
        }
        Ok(ArgMax {
            frames,
            length,
            indices,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.length)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn get(&self, frame: usize, pos: usize) -> usize {
        self.indices[frame * self.length + pos]
    }
}

#[derive(Debug, Clone)]
pub struct PoolOutput<T> {
    pub output: FrameSeq<T>,
    pub argmax: ArgMax,
}

/// `h(y) = max_x g(y·d − x + c)`, applied to each frame independently.
///
/// Ties go to the smallest tap `x`, i.e. the rightmost position in the window.
pub fn maxpool_forward<T: Real>(input: &FrameSeq<T>, spec: PoolSpec) -> Result<PoolOutput<T>> {
    let (k, d) = (spec.width, spec.stride);
    let out_len = spec.output_length(input.length()).ok_or_else(|| {
        Error::InputTooShort(format!(
            "pool of width {k} needs at least {k} positions, got {}",
            input.length()
        ))
    })?;
    let frames = input.frames();
    let mut output = FrameSeq::zeros(frames, out_len);
    let mut indices = Vec::with_capacity(frames * out_len);
    for f in 0..frames {
        let g = input.row(f);
        let out = output.row_mut(f);
        for (y0, o) in out.iter_mut().enumerate() {
            let mut best = source_index(y0, 0, k, d);
            for x0 in 1..k {
                let p = source_index(y0, x0, k, d);
                if g[p] > g[best] {
                    best = p;
                }
            }
            *o = g[best];
            indices.push(best);
        }
    }
    Ok(PoolOutput {
        output,
        argmax: ArgMax {
            frames,
            length: out_len,
            indices,
        },
    })
}

/// Routes each output gradient to the input position recorded in `argmax`.
/// Overlapping windows that share a winner accumulate.
pub fn maxpool_backward<T: Real>(
    argmax: &ArgMax,
    grad_output: &FrameSeq<T>,
    input_shape: (usize, usize),
) -> Result<FrameSeq<T>> {
    grad_output.expect_shape("maxpool grad_output", argmax.frames, argmax.length)?;
    let (frames, length) = input_shape;
    if frames != argmax.frames {
        return Err(Error::shape("maxpool input frames", argmax.frames, frames));
    }
    let mut grad_input = FrameSeq::zeros(frames, length);
    for f in 0..frames {
        let go = grad_output.row(f);
        let gi = grad_input.row_mut(f);
        let idx = &argmax.indices[f * argmax.length..(f + 1) * argmax.length];
        for (&p, &v) in idx.iter().zip(go) {
            if p >= length {
                return Err(Error::Internal(format!(
                    "argmax position {p} outside input of length {length}"
                )));
            }
            gi[p] += v;
        }
    }
    Ok(grad_input)
}
