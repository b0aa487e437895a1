//! Minibatch SGD with momentum and a step-halving learning-rate schedule.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::augmentation::Augmenter;
use crate::config::KeyValues;
use crate::metrics::{argmax, ConfusionMatrix};
use crate::model::{Model, Params, TrainingState};
use crate::tensor_ops::{softmax_nll, LinearWeights, Mode};
use crate::{Error, Real, Result, SeededRng};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSchedule {
    pub batch_size: usize,
    pub momentum: f64,
    pub initial_lr: f64,
    pub halve_every: u32,
    pub halvings: u32,
    pub max_epochs: u32,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            batch_size: 128,
            momentum: 0.9,
            initial_lr: 0.01,
            halve_every: 3,
            halvings: 10,
            max_epochs: 40,
        }
    }
}

impl TrainSchedule {
    /// Learning rate for 1-based `epoch`:
    /// `initial_lr / 2^min(halvings, (epoch - 1) / halve_every)`.
    pub fn lr_at_epoch(&self, epoch: u32) -> f64 {
        assert!(epoch >= 1, "epochs are 1-based");
        let halved = ((epoch - 1) / self.halve_every.max(1)).min(self.halvings);
        self.initial_lr / 2f64.powi(halved as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch-size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.initial_lr >= 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config(format!(
                "lr must be finite and non-negative, got {}",
                self.initial_lr
            )));
        }
        if self.halve_every == 0 {
            return Err(Error::Config("halve-every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let d = TrainSchedule::default();
        let s = TrainSchedule {
            batch_size: kv.parsed_or("batch-size", d.batch_size)?,
            momentum: kv.parsed_or("momentum", d.momentum)?,
            initial_lr: kv.parsed_or("lr", d.initial_lr)?,
            halve_every: kv.parsed_or("halve-every", d.halve_every)?,
            halvings: kv.parsed_or("halvings", d.halvings)?,
            max_epochs: kv.parsed_or("epochs", d.max_epochs)?,
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn lr_at_epoch(schedule: &TrainSchedule, epoch: u32) -> f64 {
    schedule.lr_at_epoch(epoch)
}

/// A set of trainable tensors that the optimizer can walk in a fixed order.
pub trait Parameters<T> {
    fn tensors(&self) -> Vec<&[T]>;
    fn tensors_mut(&mut self) -> Vec<&mut [T]>;
}

impl<T: Real> Parameters<T> for Params<T> {
    fn tensors(&self) -> Vec<&[T]> {
        self.slices()
    }
    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.slices_mut()
    }
}

impl<T: Real> Parameters<T> for LinearWeights<T> {
    fn tensors(&self) -> Vec<&[T]> {
        vec![&self.matrix, &self.bias]
    }
    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        vec![&mut self.matrix, &mut self.bias]
    }
}

/// One momentum update: `v ← μ·v − η·g`, then `w ← w + v`.
pub fn sgd_momentum_step<T: Real, P: Parameters<T>>(
    params: &mut P,
    grads: &P,
    velocity: &mut P,
    lr: T,
    momentum: T,
) -> Result<()> {
    let g = grads.tensors();
    let mut w = params.tensors_mut();
    let mut v = velocity.tensors_mut();
    if g.len() != w.len() || v.len() != w.len() {
        return Err(Error::shape(
            "sgd step",
            format!("{} tensors", w.len()),
            format!("{} gradient and {} velocity tensors", g.len(), v.len()),
        ));
    }
    for (i, ((w, v), g)) in w.iter().zip(v.iter()).zip(&g).enumerate() {
        if w.len() != v.len() || w.len() != g.len() {
            return Err(Error::shape(
                format!("sgd step tensor {i}"),
                w.len(),
                format!("gradient {} / velocity {}", g.len(), v.len()),
            ));
        }
    }
    for ((w, v), g) in w.iter_mut().zip(v.iter_mut()).zip(g) {
        for ((w, v), &g) in w.iter_mut().zip(v.iter_mut()).zip(g) {
            *v = momentum * *v - lr * g;
            *w += *v;
        }
    }
    Ok(())
}

/// A labeled text with a 0-based class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextExample {
    pub text: String,
    pub label: usize,
}

impl TextExample {
    pub fn new(text: impl Into<String>, label: usize) -> Self {
        TextExample {
            text: text.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: u32,
    pub lr: f64,
    pub mean_loss: f64,
    /// Accuracy of the train-mode predictions made while fitting.
    pub train_accuracy: f64,
    pub seconds: f64,
}

impl fmt::Display for EpochStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch={} lr={:e} loss={:.6} train_accuracy={:.4} seconds={:.3}",
            self.epoch, self.lr, self.mean_loss, self.train_accuracy, self.seconds
        )
    }
}

fn check_labels(data: &[TextExample], class_count: usize) -> Result<()> {
    for (i, ex) in data.iter().enumerate() {
        if ex.label >= class_count {
            return Err(Error::Data(format!(
                "example {}: label {} is outside the model's {} classes",
                i + 1,
                ex.label,
                class_count
            )));
        }
    }
    Ok(())
}

/// Seeded stream for one purpose within one epoch. Streams never overlap, so
/// turning augmentation on or off leaves the shuffling and dropout draws alone.
fn epoch_rng(seed: u64, epoch: u32, purpose: u64) -> SeededRng {
    let mut rng = SeededRng::seed_from_u64(seed);
    rng.set_stream(u64::from(epoch) * 2 + purpose);
    rng
}

/// Optimizer state carried across epochs.
#[derive(Debug, Clone)]
pub struct Trainer<T> {
    pub schedule: TrainSchedule,
    velocity: Params<T>,
    epochs_done: u32,
    step: u64,
    seed: u64,
}

impl<T: Real> Trainer<T> {
    pub fn new(model: &Model<T>, schedule: TrainSchedule, seed: u64) -> Self {
        Trainer {
            schedule,
            velocity: model.params().zeros_like(),
            epochs_done: 0,
            step: 0,
            seed,
        }
    }

    /// Continues from a saved state. Without saved momentum the velocity
    /// restarts at zero.
    pub fn resume(model: &Model<T>, schedule: TrainSchedule, state: &TrainingState) -> Result<Self> {
        let velocity = match &state.velocity {
            Some(v) => {
                let v: Params<T> = v.cast();
                if !v.same_shape(model.params()) {
                    return Err(Error::Checkpoint(
                        "saved momentum does not match the model's parameter shapes".into(),
                    ));
                }
                v
            }
            None => model.params().zeros_like(),
        };
        Ok(Trainer {
            schedule,
            velocity,
            epochs_done: state.epoch,
            step: state.step,
            seed: state.run_seed,
        })
    }

    pub fn state(&self) -> TrainingState {
        TrainingState {
            epoch: self.epochs_done,
            step: self.step,
            run_seed: self.seed,
            velocity: Some(self.velocity.cast()),
        }
    }

    pub fn epochs_done(&self) -> u32 {
        self.epochs_done
    }

    pub fn steps_done(&self) -> u64 {
        self.step
    }

    pub fn velocity(&self) -> &Params<T> {
        &self.velocity
    }

    /// Runs one epoch over `data`: shuffle, then per minibatch optionally
    /// augment, quantize, forward in train mode, back-propagate the mean
    /// softmax-NLL gradient and take one momentum step.
    pub fn train_epoch(
        &mut self,
        model: &mut Model<T>,
        data: &[TextExample],
        augmenter: Option<&Augmenter>,
    ) -> Result<EpochStats> {
        if data.is_empty() {
            return Err(Error::Data("training set is empty".into()));
        }
        check_labels(data, model.config().class_count)?;
        if !self.velocity.same_shape(model.params()) {
            return Err(Error::State(
                "trainer velocity does not match the model being trained".into(),
            ));
        }
        let started = Instant::now();
        let epoch = self.epochs_done + 1;
        let lr = self.schedule.lr_at_epoch(epoch);
        let mut rng = epoch_rng(self.seed, epoch, 0);
        let mut aug_rng = epoch_rng(self.seed, epoch, 1);

        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng);

        let mut grads = model.params().zeros_like();
        let mut total_loss = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(self.schedule.batch_size.max(1)) {
            grads.fill_zero();
            for &idx in batch {
                let ex = &data[idx];
                let encoded = match augmenter {
                    Some(a) => model.encode(&a.augment(&ex.text, &mut aug_rng)),
                    None => model.encode(&ex.text),
                };
                let fwd = model.forward(&encoded, Mode::Train, &mut rng)?;
                let (loss, grad) = softmax_nll(&fwd.logits, ex.label)?;
                total_loss += loss.as_f64();
                if argmax(&fwd.logits) == ex.label {
                    correct += 1;
                }
                model.backward_accumulate(&fwd, &grad, &mut grads)?;
            }
            grads.scale(T::from_f64(1.0 / batch.len() as f64));
            sgd_momentum_step(
                model.params_mut(),
                &grads,
                &mut self.velocity,
                T::from_f64(lr),
                T::from_f64(self.schedule.momentum),
            )?;
            self.step += 1;
        }
        self.epochs_done = epoch;
        Ok(EpochStats {
            epoch,
            lr,
            mean_loss: total_loss / data.len() as f64,
            train_accuracy: correct as f64 / data.len() as f64,
            seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// Trains until `schedule.max_epochs` epochs are done, calling `on_epoch`
    /// after each one (for logging and checkpointing).
    pub fn train(
        &mut self,
        model: &mut Model<T>,
        data: &[TextExample],
        augmenter: Option<&Augmenter>,
        mut on_epoch: impl FnMut(&EpochStats, &Model<T>, &Trainer<T>) -> Result<()>,
    ) -> Result<Vec<EpochStats>> {
        let mut history = Vec::new();
        while self.epochs_done < self.schedule.max_epochs {
            let stats = self.train_epoch(model, data, augmenter)?;
            on_epoch(&stats, model, self)?;
            history.push(stats);
        }
        Ok(history)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub mean_loss: f64,
}

/// Eval-mode accuracy, confusion matrix (rows = true class) and mean loss.
pub fn evaluate<T: Real>(model: &Model<T>, data: &[TextExample]) -> Result<Evaluation> {
    let class_count = model.config().class_count;
    check_labels(data, class_count)?;
    let mut confusion = ConfusionMatrix::new(class_count);
    let mut total_loss = 0.0;
    for ex in data {
        let logits = model.logits(&model.encode(&ex.text))?;
        total_loss += softmax_nll(&logits, ex.label)?.0.as_f64();
        confusion.record(ex.label, argmax(&logits))?;
    }
    Ok(Evaluation {
        accuracy: confusion.accuracy(),
        confusion,
        mean_loss: if data.is_empty() {
            0.0
        } else {
            total_loss / data.len() as f64
        },
    })
}
