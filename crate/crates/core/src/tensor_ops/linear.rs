use crate::{Error, Real, Result};

/// Fully-connected layer: `out_units × in_units` row-major matrix plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights<T> {
    out_units: usize,
    in_units: usize,
    pub matrix: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> LinearWeights<T> {
    pub fn new(out_units: usize, in_units: usize, matrix: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if out_units == 0 || in_units == 0 {
            return Err(Error::Config(format!(
                "linear layer dimensions must be >= 1, got {out_units}x{in_units}"
            )));
        }
        if matrix.len() != out_units * in_units {
            return Err(Error::shape(
                "LinearWeights matrix",
                out_units * in_units,
                matrix.len(),
            ));
        }
        if bias.len() != out_units {
            return Err(Error::shape("LinearWeights bias", out_units, bias.len()));
        }
        Ok(LinearWeights {
            out_units,
            in_units,
            matrix,
            bias,
        })
    }

    pub fn zeros(out_units: usize, in_units: usize) -> Result<Self> {
        Self::new(
            out_units,
            in_units,
            vec![T::zero(); out_units * in_units],
            vec![T::zero(); out_units],
        )
    }

    pub fn zeros_like(&self) -> Self {
        LinearWeights {
            out_units: self.out_units,
            in_units: self.in_units,
            matrix: vec![T::zero(); self.matrix.len()],
            bias: vec![T::zero(); self.bias.len()],
        }
    }

    pub fn out_units(&self) -> usize {
        self.out_units
    }

    pub fn in_units(&self) -> usize {
        self.in_units
    }

    pub fn row(&self, out_unit: usize) -> &[T] {
        &self.matrix[out_unit * self.in_units..(out_unit + 1) * self.in_units]
    }

    /// Adds the gradients for one (input, grad_output) pair into `self`.
    pub(crate) fn accumulate_grad(&mut self, input: &[T], grad_output: &[T]) {
        for (o, &go) in grad_output.iter().enumerate() {
            self.bias[o] += go;
            if go == T::zero() {
                continue;
            }
            let row = &mut self.matrix[o * self.in_units..(o + 1) * self.in_units];
            for (w, &x) in row.iter_mut().zip(input) {
                *w += go * x;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearGrads<T> {
    pub input: Vec<T>,
    pub weights: LinearWeights<T>,
}

/// `matrix · input + bias`.
pub fn linear_forward<T: Real>(input: &[T], w: &LinearWeights<T>) -> Result<Vec<T>> {
    if input.len() != w.in_units {
        return Err(Error::shape("linear input", w.in_units, input.len()));
    }
    Ok((0..w.out_units)
        .map(|o| w.bias[o] + super::dot(w.row(o), input))
        .collect())
}

/// Input gradient `matrixᵀ · grad_output`.
pub(crate) fn linear_input_grad<T: Real>(w: &LinearWeights<T>, grad_output: &[T]) -> Vec<T> {
    let mut grad_input = vec![T::zero(); w.in_units];
    for (o, &go) in grad_output.iter().enumerate() {
        if go == T::zero() {
            continue;
        }
        for (g, &m) in grad_input.iter_mut().zip(w.row(o)) {
            *g += go * m;
        }
    }
    grad_input
}

pub fn linear_backward<T: Real>(
    input: &[T],
    w: &LinearWeights<T>,
    grad_output: &[T],
) -> Result<LinearGrads<T>> {
    if input.len() != w.in_units {
        return Err(Error::shape("linear input", w.in_units, input.len()));
    }
    if grad_output.len() != w.out_units {
        return Err(Error::shape("linear grad_output", w.out_units, grad_output.len()));
    }
    let mut weights = w.zeros_like();
    weights.accumulate_grad(input, grad_output);
    Ok(LinearGrads {
        input: linear_input_grad(w, grad_output),
        weights,
    })
}
