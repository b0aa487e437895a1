//! Analytic-versus-finite-difference comparisons for every layer. Each check
//! draws one random instance and returns the largest relative error found.
//! Losses are `Σ probe · output` for a fixed random `probe`, so the analytic
//! side receives `probe` as its output gradient.

use rand::Rng;

use chartcn::model::{Model, ModelConfig, ConvLayerSpec};
use chartcn::quantizer::{encode, Alphabet};
use chartcn::tensor_ops::*;
use chartcn::SeededRng;

use super::{dot, fd_gradient, max_rel_error, random_vec};

/// Denominator floor for relative errors; gradients smaller than this are
/// compared absolutely against it.
pub const REL_FLOOR: f64 = 1e-6;

fn frames(data: Vec<f64>, f: usize, l: usize) -> FrameSeq<f64> {
    FrameSeq::from_vec(f, l, data).unwrap()
}

fn random_conv<R: Rng>(rng: &mut R) -> (usize, usize, usize, usize, usize) {
    let m = rng.random_range(1..4);
    let n = rng.random_range(1..4);
    let k = rng.random_range(1..5);
    let d = rng.random_range(1..=k);
    let l = k + rng.random_range(0..9);
    (m, n, k, d, l)
}

pub fn conv_input(rng: &mut SeededRng) -> f64 {
    let (m, n, k, d, l) = random_conv(rng);
    let kernel = ConvKernel::new(n, m, k, d, random_vec(rng, n * m * k)).unwrap();
    let x = random_vec(rng, m * l);
    let out_len = kernel.output_length(l).unwrap();
    let probe = random_vec(rng, n * out_len);
    let analytic = conv_input_grad((m, l), &kernel, &frames(probe.clone(), n, out_len)).unwrap();
    let numeric = fd_gradient(
        |x| dot(&probe, conv_forward(&frames(x.to_vec(), m, l), &kernel).unwrap().as_slice()),
        &x,
    );
    max_rel_error(analytic.as_slice(), &numeric, REL_FLOOR)
}

pub fn conv_weights(rng: &mut SeededRng) -> f64 {
    let (m, n, k, d, l) = random_conv(rng);
    let w = random_vec(rng, n * m * k);
    let input = frames(random_vec(rng, m * l), m, l);
    let out_len = (l - k) / d + 1;
    let probe = random_vec(rng, n * out_len);
    let kernel = ConvKernel::new(n, m, k, d, w.clone()).unwrap();
    let analytic = conv_weight_grad(&input, &kernel, &frames(probe.clone(), n, out_len)).unwrap();
    let numeric = fd_gradient(
        |w| {
            let kernel = ConvKernel::new(n, m, k, d, w.to_vec()).unwrap();
            dot(&probe, conv_forward(&input, &kernel).unwrap().as_slice())
        },
        &w,
    );
    max_rel_error(analytic.weights(), &numeric, REL_FLOOR)
}

/// Kernel gradient through the one-hot fast path, against finite
/// differences of the dense forward pass on the equivalent matrix.
pub fn conv_weights_onehot(rng: &mut SeededRng) -> f64 {
    let alphabet = Alphabet::new("abcdef".chars()).unwrap();
    let (_, n, k, d, l) = random_conv(rng);
    let m = alphabet.len();
    let text: String = (0..l).map(|_| "abcdefxy".chars().nth(rng.random_range(0..8)).unwrap()).collect();
    let encoded = encode(&text, &alphabet, l);
    let dense: FrameSeq<f64> = encoded.to_frames();
    let w = random_vec(rng, n * m * k);
    let out_len = (l - k) / d + 1;
    let probe = random_vec(rng, n * out_len);
    let kernel = ConvKernel::new(n, m, k, d, w.clone()).unwrap();
    let analytic =
        conv_weight_grad_onehot(encoded.active(), &kernel, &frames(probe.clone(), n, out_len)).unwrap();
    let numeric = fd_gradient(
        |w| {
            let kernel = ConvKernel::new(n, m, k, d, w.to_vec()).unwrap();
            dot(&probe, conv_forward(&dense, &kernel).unwrap().as_slice())
        },
        &w,
    );
    max_rel_error(analytic.weights(), &numeric, REL_FLOOR)
}

pub fn maxpool(rng: &mut SeededRng) -> f64 {
    let f = rng.random_range(1..4);
    let k = rng.random_range(1..5);
    let d = rng.random_range(1..=k);
    let l = k + rng.random_range(0..10);
    let spec = PoolSpec::with_stride(k, d).unwrap();
    let x = random_vec(rng, f * l);
    let pooled = maxpool_forward(&frames(x.clone(), f, l), spec).unwrap();
    let out_len = pooled.output.length();
    let probe = random_vec(rng, f * out_len);
    let analytic = maxpool_backward(&pooled.argmax, &frames(probe.clone(), f, out_len), (f, l)).unwrap();
    let numeric = fd_gradient(
        |x| dot(&probe, maxpool_forward(&frames(x.to_vec(), f, l), spec).unwrap().output.as_slice()),
        &x,
    );
    max_rel_error(analytic.as_slice(), &numeric, REL_FLOOR)
}

pub fn relu_layer(rng: &mut SeededRng) -> f64 {
    let n = rng.random_range(1..30);
    let x = random_vec(rng, n);
    let probe = random_vec(rng, n);
    let analytic = relu_backward_slice(&x, &probe).unwrap();
    let numeric = fd_gradient(|x| dot(&probe, &relu(x)), &x);
    max_rel_error(&analytic, &numeric, REL_FLOOR)
}

/// Input, matrix and bias gradients of a fully-connected layer.
pub fn linear(rng: &mut SeededRng) -> f64 {
    let (o, i) = (rng.random_range(1..6), rng.random_range(1..6));
    let mat = random_vec(rng, o * i);
    let bias = random_vec(rng, o);
    let x = random_vec(rng, i);
    let probe = random_vec(rng, o);
    let w = LinearWeights::new(o, i, mat.clone(), bias.clone()).unwrap();
    let g = linear_backward(&x, &w, &probe).unwrap();
    let dx = fd_gradient(|x| dot(&probe, &linear_forward(x, &w).unwrap()), &x);
    let dm = fd_gradient(
        |m| {
            let w = LinearWeights::new(o, i, m.to_vec(), bias.clone()).unwrap();
            dot(&probe, &linear_forward(&x, &w).unwrap())
        },
        &mat,
    );
    let db = fd_gradient(
        |b| {
            let w = LinearWeights::new(o, i, mat.clone(), b.to_vec()).unwrap();
            dot(&probe, &linear_forward(&x, &w).unwrap())
        },
        &bias,
    );
    max_rel_error(&g.input, &dx, REL_FLOOR)
        .max(max_rel_error(&g.weights.matrix, &dm, REL_FLOOR))
        .max(max_rel_error(&g.weights.bias, &db, REL_FLOOR))
}

/// Dropout with its mask held fixed.
pub fn dropout_layer(rng: &mut SeededRng) -> f64 {
    let n = rng.random_range(1..30);
    let x = random_vec(rng, n);
    let probe = random_vec(rng, n);
    let (_, mask) = dropout(&x, 0.5, Mode::Train, rng).unwrap();
    let scales = mask.scales().unwrap().to_vec();
    let analytic = dropout_backward(&probe, &mask).unwrap();
    let numeric = fd_gradient(
        |x| x.iter().zip(&scales).zip(&probe).map(|((x, s), p)| x * s * p).sum(),
        &x,
    );
    max_rel_error(&analytic, &numeric, REL_FLOOR)
}

pub fn softmax_loss(rng: &mut SeededRng) -> f64 {
    let n = rng.random_range(2..8);
    let z: Vec<f64> = random_vec(rng, n).iter().map(|v| v * 4.0).collect();
    let target = rng.random_range(0..n);
    let (_, analytic) = softmax_nll(&z, target).unwrap();
    let numeric = fd_gradient(|z| softmax_nll(z, target).unwrap().0, &z);
    max_rel_error(&analytic, &numeric, REL_FLOOR)
}

/// A small network exercising every layer type: conv with and without pool,
/// overlapping stride, hidden FC with dropout.
pub fn tiny_model_config(seed: u64) -> ModelConfig {
    ModelConfig {
        input_length: 17,
        alphabet: Alphabet::new("abcde".chars()).unwrap(),
        truncation: Default::default(),
        conv_layers: vec![
            ConvLayerSpec { frames: 3, kernel: 3, stride: 1, pool: Some(2) },
            ConvLayerSpec { frames: 3, kernel: 2, stride: 1, pool: None },
            ConvLayerSpec { frames: 2, kernel: 2, stride: 2, pool: Some(2) },
        ],
        fc_units: vec![6, 5],
        class_count: 3,
        class_names: Vec::new(),
        dropout_prob: 0.3,
        init_stddev: 0.5,
        conv_bias: true,
        seed,
    }
}

/// Every parameter of the tiny model against finite differences of the
/// full train-mode loss (dropout draws fixed by reseeding).
pub fn tiny_model(rng: &mut SeededRng) -> f64 {
    let model = Model::<f64>::build(tiny_model_config(rng.random())).unwrap();
    let text: String = (0..15).map(|_| "abcde ".chars().nth(rng.random_range(0..6)).unwrap()).collect();
    let encoded = model.encode(&text);
    let target = rng.random_range(0..3);
    let dropout_seed: u64 = rng.random();
    let fwd = model.forward(&encoded, Mode::Train, &mut chartcn::seeded_rng(dropout_seed)).unwrap();
    let (_, g) = softmax_nll(&fwd.logits, target).unwrap();
    let grads = model.backward(&fwd, &g).unwrap();
    let analytic: Vec<f64> = grads.slices().concat();
    let flat: Vec<f64> = model.params().slices().concat();
    let numeric = fd_gradient(
        |p| {
            let mut m = model.clone();
            let mut offset = 0;
            for t in m.params_mut().slices_mut() {
                t.copy_from_slice(&p[offset..offset + t.len()]);
                offset += t.len();
            }
            let fwd = m.forward(&encoded, Mode::Train, &mut chartcn::seeded_rng(dropout_seed)).unwrap();
            softmax_nll(&fwd.logits, target).unwrap().0
        },
        &flat,
    );
    max_rel_error(&analytic, &numeric, REL_FLOOR)
}

/// Named layer checks, each to be run on at least 20 instances.
/// Runs one random instance and returns its max relative error.
pub type Check = fn(&mut SeededRng) -> f64;

pub const LAYER_CHECKS: &[(&str, Check)] = &[
    ("conv input", conv_input),
    ("conv weights", conv_weights),
    ("conv weights, one-hot input", conv_weights_onehot),
    ("max-pool", maxpool),
    ("relu", relu_layer),
    ("linear", linear),
    ("dropout", dropout_layer),
    ("softmax-nll", softmax_loss),
];
