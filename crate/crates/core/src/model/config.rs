use std::path::Path;

use crate::config::KeyValues;
use crate::quantizer::{Alphabet, Truncation};
use crate::tensor_ops::output_length;
use crate::{Error, Result};

const KERNELS: [usize; 6] = [7, 7, 3, 3, 3, 3];
const POOLS: [Option<usize>; 6] = [Some(3), Some(3), None, None, None, Some(3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Large,
    Small,
}

impl Arch {
    pub fn conv_frames(self) -> usize {
        match self {
            Arch::Large => 1024,
            Arch::Small => 256,
        }
    }

    pub fn fc_units(self) -> usize {
        match self {
            Arch::Large => 2048,
            Arch::Small => 1024,
        }
    }

    pub fn init_stddev(self) -> f64 {
        match self {
            Arch::Large => 0.02,
            Arch::Small => 0.05,
        }
    }
}

impl std::str::FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "large" => Ok(Arch::Large),
            "small" => Ok(Arch::Small),
            _ => Err(Error::Config(format!("unknown arch {s:?} (expected large or small)"))),
        }
    }
}

/// One convolutional layer: output frames, kernel width, stride and an
/// optional non-overlapping max-pool width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvLayerSpec {
    pub frames: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pool: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_length: usize,
    pub alphabet: Alphabet,
    pub truncation: Truncation,
    pub conv_layers: Vec<ConvLayerSpec>,
    /// Output units of the hidden fully-connected layers; the final layer has
    /// `class_count` outputs.
    pub fc_units: Vec<usize>,
    pub class_count: usize,
    /// Optional display names, one per class.
    pub class_names: Vec<String>,
    pub dropout_prob: f64,
    pub init_stddev: f64,
    /// Per-output-frame bias on convolutional layers.
    pub conv_bias: bool,
    pub seed: u64,
}

impl ModelConfig {
    pub fn preset(arch: Arch, input_length: usize, class_count: usize) -> Self {
        ModelConfig {
            input_length,
            alphabet: Alphabet::standard(),
            truncation: Truncation::KeepFirst,
            conv_layers: KERNELS
                .iter()
                .zip(POOLS)
                .map(|(&kernel, pool)| ConvLayerSpec {
                    frames: arch.conv_frames(),
                    kernel,
                    stride: 1,
                    pool,
                })
                .collect(),
            fc_units: vec![arch.fc_units(); 2],
            class_count,
            class_names: Vec::new(),
            dropout_prob: 0.5,
            init_stddev: arch.init_stddev(),
            conv_bias: true,
            seed: 0,
        }
    }

    /// Frame 1024, FC 2048, init σ = 0.02.
    pub fn large(input_length: usize, class_count: usize) -> Self {
        Self::preset(Arch::Large, input_length, class_count)
    }

    /// Frame 256, FC 1024, init σ = 0.05.
    pub fn small(input_length: usize, class_count: usize) -> Self {
        Self::preset(Arch::Small, input_length, class_count)
    }

    /// Sets every convolutional layer to `frames` output frames.
    pub fn with_conv_frames(mut self, frames: usize) -> Self {
        for layer in &mut self.conv_layers {
            layer.frames = frames;
        }
        self
    }

    /// Sets every hidden fully-connected layer to `units` outputs.
    pub fn with_fc_units(mut self, units: usize) -> Self {
        for u in &mut self.fc_units {
            *u = units;
        }
        self
    }

    pub fn input_frames(&self) -> usize {
        self.alphabet.len()
    }

    pub fn class_name(&self, class: usize) -> String {
        self.class_names
            .get(class)
            .cloned()
            .unwrap_or_else(|| class.to_string())
    }

    /// Length after each convolutional layer (after its pool, if any).
    pub fn conv_output_lengths(&self) -> Result<Vec<usize>> {
        let mut lengths = Vec::with_capacity(self.conv_layers.len());
        let mut len = self.input_length;
        for (idx, layer) in self.conv_layers.iter().enumerate() {
            len = output_length(len, layer.kernel, layer.stride).ok_or_else(|| {
                Error::InputTooShort(format!(
                    "conv layer {} (kernel {}) receives length {len}",
                    idx + 1,
                    layer.kernel
                ))
            })?;
            if let Some(pool) = layer.pool {
                len = output_length(len, pool, pool).ok_or_else(|| {
                    Error::InputTooShort(format!(
                        "pool after conv layer {} (width {pool}) receives length {len}",
                        idx + 1
                    ))
                })?;
            }
            lengths.push(len);
        }
        Ok(lengths)
    }

    /// Frame length after the last convolutional layer.
    pub fn output_length_after_conv(&self) -> Result<usize> {
        Ok(self
            .conv_output_lengths()?
            .last()
            .copied()
            .unwrap_or(self.input_length))
    }

    /// Input dimension of the first fully-connected layer.
    pub fn flattened_len(&self) -> Result<usize> {
        let frames = self
            .conv_layers
            .last()
            .map_or(self.input_frames(), |l| l.frames);
        Ok(self.output_length_after_conv()? * frames)
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv_layers.is_empty() {
            return Err(Error::Config("at least one convolutional layer is required".into()));
        }
        for (idx, layer) in self.conv_layers.iter().enumerate() {
            if layer.frames == 0 || layer.kernel == 0 {
                return Err(Error::Config(format!(
                    "conv layer {}: frames and kernel must be >= 1",
                    idx + 1
                )));
            }
            if layer.stride == 0 || layer.stride > layer.kernel {
                return Err(Error::Config(format!(
                    "conv layer {}: stride must satisfy 1 <= d <= k",
                    idx + 1
                )));
            }
            if layer.pool == Some(0) {
                return Err(Error::Config(format!("conv layer {}: pool width 0", idx + 1)));
            }
        }
        if self.fc_units.contains(&0) {
            return Err(Error::Config("fully-connected units must be >= 1".into()));
        }
        if self.class_count == 0 {
            return Err(Error::Config("class count must be >= 1".into()));
        }
        if !self.class_names.is_empty() && self.class_names.len() != self.class_count {
            return Err(Error::Config(format!(
                "{} class names given for {} classes",
                self.class_names.len(),
                self.class_count
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout_prob
            )));
        }
        if !(self.init_stddev.is_finite() && self.init_stddev >= 0.0) {
            return Err(Error::Config(format!(
                "init-stddev must be finite and >= 0, got {}",
                self.init_stddev
            )));
        }
        self.output_length_after_conv()?;
        Ok(())
    }

    /// Reads the model keys of a config file. `class_names` comes from the
    /// dataset description.
    pub fn from_config(kv: &KeyValues, class_names: Vec<String>) -> Result<Self> {
        let arch: Arch = kv.parsed_or("arch", Arch::Small)?;
        let input_length = kv.parsed_or("input-length", 1014usize)?;
        let mut cfg = ModelConfig::preset(arch, input_length, class_names.len());
        cfg.class_names = class_names;

        if let Some(a) = kv.get("alphabet") {
            cfg.alphabet = match a {
                "standard" => Alphabet::standard(),
                "standard-69" => Alphabet::standard_69(),
                path => Alphabet::load(Path::new(path))?,
            };
        }
        if let Some(t) = kv.get("truncation") {
            cfg.truncation = match t {
                "first" => Truncation::KeepFirst,
                "last" => Truncation::KeepLast,
                _ => return Err(Error::Config(format!("truncation must be first or last, got {t:?}"))),
            };
        }

        let kernels = kv.list::<usize>("kernels")?;
        let pools = kv.list::<usize>("pools")?;
        if kernels.is_some() || pools.is_some() {
            let kernels = kernels.unwrap_or_else(|| KERNELS.to_vec());
            let pools = pools.unwrap_or_else(|| {
                POOLS.iter().map(|p| p.unwrap_or(0)).collect()
            });
            if kernels.len() != pools.len() {
                return Err(Error::Config(format!(
                    "kernels has {} entries but pools has {}",
                    kernels.len(),
                    pools.len()
                )));
            }
            let frames = arch.conv_frames();
            cfg.conv_layers = kernels
                .into_iter()
                .zip(pools)
                .map(|(kernel, pool)| ConvLayerSpec {
                    frames,
                    kernel,
                    stride: 1,
                    pool: (pool > 0).then_some(pool),
                })
                .collect();
        }
        if let Some(frames) = kv.list::<usize>("conv-frames")? {
            match frames.as_slice() {
                [single] => cfg = cfg.with_conv_frames(*single),
                list if list.len() == cfg.conv_layers.len() => {
                    for (layer, &f) in cfg.conv_layers.iter_mut().zip(list) {
                        layer.frames = f;
                    }
                }
                list => {
                    return Err(Error::Config(format!(
                        "conv-frames needs 1 or {} entries, got {}",
                        cfg.conv_layers.len(),
                        list.len()
                    )))
                }
            }
        }
        if let Some(units) = kv.list::<usize>("fc-units")? {
            cfg.fc_units = units;
        }
        cfg.dropout_prob = kv.parsed_or("dropout", cfg.dropout_prob)?;
        cfg.init_stddev = kv.parsed_or("init-stddev", cfg.init_stddev)?;
        cfg.conv_bias = kv.flag("conv-bias")?.unwrap_or(cfg.conv_bias);
        cfg.seed = kv.parsed_or("seed", cfg.seed)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Frame length after the last convolutional layer of the default
/// (large/small) architecture for input length `l0`.
pub fn output_length_after_conv(l0: usize) -> Result<usize> {
    ModelConfig::small(l0, 2).output_length_after_conv()
}
