use rand::seq::SliceRandom;

use crate::metrics::argmax;
use crate::tensor_ops::{linear_forward, softmax_nll, LinearWeights};
use crate::trainer::sgd_momentum_step;
use crate::{seeded_rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegOptions {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        LogRegOptions {
            epochs: 10,
            lr: 0.01,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Multinomial logistic regression: `softmax(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: LinearWeights<f64>,
}

impl LogRegModel {
    pub fn zeros(class_count: usize, feature_count: usize) -> Result<Self> {
        Ok(LogRegModel {
            weights: LinearWeights::zeros(class_count, feature_count)?,
        })
    }

    pub fn class_count(&self) -> usize {
        self.weights.out_units()
    }

    pub fn feature_count(&self) -> usize {
        self.weights.in_units()
    }

    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        linear_forward(features, &self.weights)
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(argmax(&self.logits(features)?))
    }

    /// Mean softmax-NLL over a labeled set.
    pub fn loss(&self, features: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (x, &y) in features.iter().zip(labels) {
            total += softmax_nll(&self.logits(x)?, y)?.0;
        }
        Ok(total / features.len().max(1) as f64)
    }
}

/// Fits by plain minibatch SGD (mean gradient per batch) from zero weights.
/// Returns the model and the training loss after each epoch.
pub fn train_logreg(
    features: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
    options: &LogRegOptions,
) -> Result<(LogRegModel, Vec<f64>)> {
    if features.len() != labels.len() {
        return Err(Error::shape("logistic regression labels", features.len(), labels.len()));
    }
    if features.is_empty() {
        return Err(Error::Data("logistic regression needs at least one sample".into()));
    }
    let dim = features[0].len();
    if let Some(i) = features.iter().position(|f| f.len() != dim) {
        return Err(Error::shape(format!("feature vector {i}"), dim, features[i].len()));
    }
    if let Some(i) = labels.iter().position(|&y| y >= class_count) {
        return Err(Error::Data(format!(
            "sample {}: label {} outside {class_count} classes",
            i + 1,
            labels[i]
        )));
    }
    let mut model = LogRegModel::zeros(class_count, dim)?;
    let mut grads = model.weights.zeros_like();
    let mut velocity = model.weights.zeros_like();
    let mut rng = seeded_rng(options.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut history = Vec::with_capacity(options.epochs);
    for _ in 0..options.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(options.batch_size.max(1)) {
            grads.matrix.fill(0.0);
            grads.bias.fill(0.0);
            for &i in batch {
                let (_, g) = softmax_nll(&model.logits(&features[i])?, labels[i])?;
                grads.accumulate_grad(&features[i], &g);
            }
            let scale = 1.0 / batch.len() as f64;
            grads.matrix.iter_mut().for_each(|v| *v *= scale);
            grads.bias.iter_mut().for_each(|v| *v *= scale);
            sgd_momentum_step(&mut model.weights, &grads, &mut velocity, options.lr, 0.0)?;
        }
        history.push(model.loss(features, labels)?);
    }
    Ok((model, history))
}
