use rand::Rng;

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-unit scale applied by [`dropout`]: `0` for dropped units and
/// `1 / (1 − p)` for survivors. Eval mode records no mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask<T> {
    scales: Option<Vec<T>>,
}

impl<T: Real> DropoutMask<T> {
    pub fn identity() -> Self {
        DropoutMask { scales: None }
    }

    pub fn scales(&self) -> Option<&[T]> {
        self.scales.as_deref()
    }

    pub fn survivors(&self) -> Option<usize> {
        self.scales
            .as_ref()
            .map(|s| s.iter().filter(|&&v| v != T::zero()).count())
    }
}

/// Inverted dropout: in train mode each unit is zeroed with probability
/// `prob` and survivors are scaled by `1 / (1 − prob)`; eval mode is the identity.
pub fn dropout<T: Real, R: Rng + ?Sized>(
    input: &[T],
    prob: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Vec<T>, DropoutMask<T>)> {
    if !(0.0..1.0).contains(&prob) {
        return Err(Error::Config(format!(
            "dropout probability must be in [0, 1), got {prob}"
        )));
    }
    if mode == Mode::Eval || prob == 0.0 {
        return Ok((input.to_vec(), DropoutMask::identity()));
    }
    let keep = T::from_f64(1.0 / (1.0 - prob));
    let scales: Vec<T> = input
        .iter()
        .map(|_| {
            if rng.random::<f64>() < prob {
                T::zero()
            } else {
                keep
            }
        })
        .collect();
    let output = input.iter().zip(&scales).map(|(&x, &s)| x * s).collect();
    Ok((output, DropoutMask { scales: Some(scales) }))
}

pub fn dropout_backward<T: Real>(grad_output: &[T], mask: &DropoutMask<T>) -> Result<Vec<T>> {
    match &mask.scales {
        None => Ok(grad_output.to_vec()),
        Some(scales) => {
            if scales.len() != grad_output.len() {
                return Err(Error::shape("dropout grad_output", scales.len(), grad_output.len()));
            }
            Ok(grad_output.iter().zip(scales).map(|(&g, &s)| g * s).collect())
        }
    }
}
