use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::ModelConfig;
use crate::quantizer::{encode_with, EncodedText};
use crate::tensor_ops::{
    conv_forward_gemm, conv_forward_onehot, conv_input_grad_gemm, dropout, dropout_backward, linear_forward,
    maxpool_backward, maxpool_forward, relu, relu_backward, relu_backward_slice, relu_forward,
    softmax, ArgMax, ConvKernel, DropoutMask, FrameSeq, LinearWeights, Mode, PoolSpec,
};
use crate::tensor_ops::{conv_weight_accumulate_gemm, conv_weight_accumulate_onehot, linear_input_grad};
use crate::{seeded_rng, Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams<T> {
    pub kernel: ConvKernel<T>,
    /// One entry per output frame, or empty when conv bias is disabled.
    pub bias: Vec<T>,
}

/// Every trainable tensor of the model, in layer order. Also used for
/// gradients and momentum buffers, which share the exact same shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub conv: Vec<ConvParams<T>>,
    pub fc: Vec<LinearWeights<T>>,
}

impl<T: Real> Params<T> {
    pub fn zeros_like(&self) -> Self {
        Params {
            conv: self
                .conv
                .iter()
                .map(|c| ConvParams {
                    kernel: c.kernel.zeros_like(),
                    bias: vec![T::zero(); c.bias.len()],
                })
                .collect(),
            fc: self.fc.iter().map(LinearWeights::zeros_like).collect(),
        }
    }

    /// Tensors in serialization order: per conv layer weights then bias, per
    /// FC layer matrix then bias.
    pub fn slices(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::new();
        for c in &self.conv {
            out.push(c.kernel.weights());
            out.push(&c.bias);
        }
        for f in &self.fc {
            out.push(&f.matrix);
            out.push(&f.bias);
        }
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        for c in &mut self.conv {
            out.push(c.kernel.weights_mut());
            out.push(&mut c.bias);
        }
        for f in &mut self.fc {
            out.push(&mut f.matrix);
            out.push(&mut f.bias);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&mut self, factor: T) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn fill_zero(&mut self) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|v| *v = T::zero());
        }
    }

    pub fn same_shape(&self, other: &Params<T>) -> bool {
        let a = self.slices();
        let b = other.slices();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.len() == y.len())
    }

    pub fn cast<U: Real>(&self) -> Params<U> {
        let conv = self
            .conv
            .iter()
            .map(|c| ConvParams {
                kernel: ConvKernel::new(
                    c.kernel.out_frames(),
                    c.kernel.in_frames(),
                    c.kernel.width(),
                    c.kernel.stride(),
                    cast_vec(c.kernel.weights()),
                )
                .expect("shape preserved"),
                bias: cast_vec(&c.bias),
            })
            .collect();
        let fc = self
            .fc
            .iter()
            .map(|f| {
                LinearWeights::new(f.out_units(), f.in_units(), cast_vec(&f.matrix), cast_vec(&f.bias))
                    .expect("shape preserved")
            })
            .collect();
        Params { conv, fc }
    }

    /// Zero tensors laid out for `config`.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut conv = Vec::with_capacity(config.conv_layers.len());
        let mut in_frames = config.input_frames();
        for layer in &config.conv_layers {
            conv.push(ConvParams {
                kernel: ConvKernel::zeros(layer.frames, in_frames, layer.kernel, layer.stride)?,
                bias: if config.conv_bias {
                    vec![T::zero(); layer.frames]
                } else {
                    Vec::new()
                },
            });
            in_frames = layer.frames;
        }
        let mut fc = Vec::with_capacity(config.fc_units.len() + 1);
        let mut in_units = config.flattened_len()?;
        for &units in config.fc_units.iter().chain(std::iter::once(&config.class_count)) {
            fc.push(LinearWeights::zeros(units, in_units)?);
            in_units = units;
        }
        Ok(Params { conv, fc })
    }
}

fn cast_vec<T: Real, U: Real>(values: &[T]) -> Vec<U> {
    values.iter().map(|v| U::from_f64(v.as_f64())).collect()
}

/// Model input: a quantized text (fast one-hot path for the first layer) or
/// an arbitrary dense frame matrix.
#[derive(Debug, Clone, Copy)]
pub enum ModelInput<'a, T> {
    Encoded(&'a EncodedText),
    Frames(&'a FrameSeq<T>),
}

impl<'a, T> From<&'a EncodedText> for ModelInput<'a, T> {
    fn from(e: &'a EncodedText) -> Self {
        ModelInput::Encoded(e)
    }
}

impl<'a, T> From<&'a FrameSeq<T>> for ModelInput<'a, T> {
    fn from(f: &'a FrameSeq<T>) -> Self {
        ModelInput::Frames(f)
    }
}

#[derive(Debug, Clone)]
enum FirstInput<T> {
    Onehot(Vec<Option<usize>>),
    Dense(FrameSeq<T>),
}

#[derive(Debug, Clone)]
struct ConvCache<T> {
    /// Layer input; the first layer keeps its input in [`Cache::first`].
    input: Option<FrameSeq<T>>,
    pre_activation: FrameSeq<T>,
    pool: Option<(ArgMax, (usize, usize))>,
}

#[derive(Debug, Clone)]
struct FcCache<T> {
    input: Vec<T>,
    pre_activation: Vec<T>,
    mask: DropoutMask<T>,
}

#[derive(Debug, Clone)]
struct Cache<T> {
    first: FirstInput<T>,
    conv: Vec<ConvCache<T>>,
    fc: Vec<FcCache<T>>,
}

/// Result of a forward pass. Train-mode passes keep the activations that
/// [`Model::backward`] needs.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub logits: Vec<T>,
    cache: Option<Cache<T>>,
}

impl<T> Forward<T> {
    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    config: ModelConfig,
    params: Params<T>,
}

impl<T: Real> Model<T> {
    /// Builds the model with weights and biases drawn from
    /// `N(0, init_stddev²)` using a generator seeded with `config.seed`.
    pub fn build(config: ModelConfig) -> Result<Self> {
        let mut params = Params::zeros(&config)?;
        let normal = Normal::new(0.0, config.init_stddev)
            .map_err(|e| Error::Config(format!("init-stddev: {e}")))?;
        let mut rng = seeded_rng(config.seed);
        for tensor in params.slices_mut() {
            for v in tensor.iter_mut() {
                *v = T::from_f64(normal.sample(&mut rng));
            }
        }
        Ok(Model { config, params })
    }

    pub fn from_parts(config: ModelConfig, params: Params<T>) -> Result<Self> {
        let expected = Params::<T>::zeros(&config)?;
        if !expected.same_shape(&params) {
            return Err(Error::shape(
                "model parameters",
                format!("{} values", expected.len()),
                format!("{} values", params.len()),
            ));
        }
        Ok(Model { config, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params<T> {
        &mut self.params
    }

    pub fn conv_layer_count(&self) -> usize {
        self.params.conv.len()
    }

    pub fn fc_layer_count(&self) -> usize {
        self.params.fc.len()
    }

    pub fn cast<U: Real>(&self) -> Model<U> {
        Model {
            config: self.config.clone(),
            params: self.params.cast(),
        }
    }

    /// Quantizes `text` with the model's alphabet, length and truncation policy.
    pub fn encode(&self, text: &str) -> EncodedText {
        encode_with(
            text,
            &self.config.alphabet,
            self.config.input_length,
            self.config.truncation,
        )
    }

    pub fn forward<'a, R: Rng + ?Sized>(
        &self,
        input: impl Into<ModelInput<'a, T>>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<Forward<T>> {
        let input = input.into();
        let (frames, length) = match input {
            ModelInput::Encoded(e) => (e.frames(), e.length()),
            ModelInput::Frames(f) => f.shape(),
        };
        let expected = (self.config.input_frames(), self.config.input_length);
        if (frames, length) != expected {
            return Err(Error::shape(
                "model input",
                format!("{}x{}", expected.0, expected.1),
                format!("{frames}x{length}"),
            ));
        }
        let train = mode == Mode::Train;

        let mut conv_caches = Vec::with_capacity(self.params.conv.len());
        let mut x: Option<FrameSeq<T>> = None;
        for (idx, (layer, spec)) in self
            .params
            .conv
            .iter()
            .zip(&self.config.conv_layers)
            .enumerate()
        {
            let mut pre = match (&x, input) {
                (Some(prev), _) => conv_forward_gemm(prev, &layer.kernel)?,
                (None, ModelInput::Encoded(e)) => conv_forward_onehot(e.active(), &layer.kernel)?,
                (None, ModelInput::Frames(f)) => conv_forward_gemm(f, &layer.kernel)?,
            };
            for (j, &b) in layer.bias.iter().enumerate() {
                pre.row_mut(j).iter_mut().for_each(|v| *v += b);
            }
            let activated = relu_forward(&pre);
            let (out, pool) = match spec.pool {
                Some(width) => {
                    let shape = activated.shape();
                    let pooled = maxpool_forward(&activated, PoolSpec::new(width)?)?;
                    (pooled.output, Some((pooled.argmax, shape)))
                }
                None => (activated, None),
            };
            let prev = x.replace(out);
            if train {
                conv_caches.push(ConvCache {
                    input: if idx == 0 { None } else { prev },
                    pre_activation: pre,
                    pool,
                });
            }
        }

        let mut h = x.expect("at least one conv layer").into_vec();
        let mut fc_caches = Vec::with_capacity(self.params.fc.len());
        let last = self.params.fc.len() - 1;
        for (idx, w) in self.params.fc.iter().enumerate() {
            let z = linear_forward(&h, w)?;
            let (out, mask) = if idx == last {
                (z.clone(), DropoutMask::identity())
            } else {
                dropout(&relu(&z), self.config.dropout_prob, mode, rng)?
            };
            let input = std::mem::replace(&mut h, out);
            if train {
                fc_caches.push(FcCache {
                    input,
                    pre_activation: z,
                    mask,
                });
            }
        }

        let cache = train.then(|| Cache {
            first: match input {
                ModelInput::Encoded(e) => FirstInput::Onehot(e.active().to_vec()),
                ModelInput::Frames(f) => FirstInput::Dense(f.clone()),
            },
            conv: conv_caches,
            fc: fc_caches,
        });
        Ok(Forward { logits: h, cache })
    }

    /// Eval-mode logits.
    pub fn logits<'a>(&self, input: impl Into<ModelInput<'a, T>>) -> Result<Vec<T>> {
        // eval mode draws nothing from the generator
        let mut rng = seeded_rng(0);
        Ok(self.forward(input, Mode::Eval, &mut rng)?.logits)
    }

    /// Eval-mode class probabilities for raw text.
    pub fn predict_text(&self, text: &str) -> Result<Vec<T>> {
        let encoded = self.encode(text);
        Ok(softmax(&self.logits(&encoded)?))
    }

    /// Gradients of all parameters given `d loss / d logits`.
    pub fn backward(&self, forward: &Forward<T>, grad_logits: &[T]) -> Result<Params<T>> {
        let mut grads = self.params.zeros_like();
        self.backward_accumulate(forward, grad_logits, &mut grads)?;
        Ok(grads)
    }

    /// Like [`Model::backward`] but adds into an existing gradient buffer.
    pub fn backward_accumulate(
        &self,
        forward: &Forward<T>,
        grad_logits: &[T],
        grads: &mut Params<T>,
    ) -> Result<()> {
        let cache = forward.cache.as_ref().ok_or_else(|| {
            Error::State("backward needs a train-mode forward pass; none was cached".into())
        })?;
        if grad_logits.len() != self.config.class_count {
            return Err(Error::shape(
                "grad_logits",
                self.config.class_count,
                grad_logits.len(),
            ));
        }
        if !grads.same_shape(&self.params) {
            return Err(Error::shape(
                "gradient buffer",
                format!("{} values", self.params.len()),
                format!("{} values", grads.len()),
            ));
        }

        let last = self.params.fc.len() - 1;
        let mut g = grad_logits.to_vec();
        for idx in (0..self.params.fc.len()).rev() {
            let c = &cache.fc[idx];
            if idx != last {
                g = dropout_backward(&g, &c.mask)?;
                g = relu_backward_slice(&c.pre_activation, &g)?;
            }
            grads.fc[idx].accumulate_grad(&c.input, &g);
            g = linear_input_grad(&self.params.fc[idx], &g);
        }

        let last_frames = self.params.conv.last().map_or(0, |c| c.kernel.out_frames());
        let mut g = FrameSeq::from_vec(last_frames, g.len() / last_frames.max(1), g)?;
        for idx in (0..self.params.conv.len()).rev() {
            let c = &cache.conv[idx];
            if let Some((argmax, shape)) = &c.pool {
                g = maxpool_backward(argmax, &g, *shape)?;
            }
            g = relu_backward(&c.pre_activation, &g)?;
            let layer = &self.params.conv[idx];
            let grad_layer = &mut grads.conv[idx];
            for (j, b) in grad_layer.bias.iter_mut().enumerate() {
                *b += g.row(j).iter().copied().sum::<T>();
            }
            match (&c.input, &cache.first) {
                (Some(input), _) => conv_weight_accumulate_gemm(input, &g, &mut grad_layer.kernel)?,
                (None, FirstInput::Onehot(active)) => {
                    conv_weight_accumulate_onehot(active, &g, &mut grad_layer.kernel)?
                }
                (None, FirstInput::Dense(input)) => {
                    conv_weight_accumulate_gemm(input, &g, &mut grad_layer.kernel)?
                }
            }
            if idx > 0 {
                let shape = c.input.as_ref().map(FrameSeq::shape).ok_or_else(|| {
                    Error::Internal(format!("conv layer {} has no cached input", idx + 1))
                })?;
                g = conv_input_grad_gemm(shape, &layer.kernel, &g)?;
            }
        }
        Ok(())
    }
}
