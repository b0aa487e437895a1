use crate::{Error, Real, Result};

/// Numerically stable softmax (max-subtracted).
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let exps: Vec<T> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Negative log-likelihood of `target` under `softmax(logits)`, and its
/// gradient `softmax(logits) − onehot(target)`.
pub fn softmax_nll<T: Real>(logits: &[T], target: usize) -> Result<(T, Vec<T>)> {
    if target >= logits.len() {
        return Err(Error::Data(format!(
            "target class {target} out of range for {} logits",
            logits.len()
        )));
    }
    let max = logits.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let sum: T = logits.iter().map(|&v| (v - max).exp()).sum();
    let log_sum = sum.ln();
    let loss = (log_sum - (logits[target] - max)).max(T::zero());
    let mut grad: Vec<T> = logits.iter().map(|&v| (v - max - log_sum).exp()).collect();
    grad[target] -= T::one();
    Ok((loss, grad))
}
