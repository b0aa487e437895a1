//! Binary checkpoint format (all integers and floats little-endian):
//!
//! ```text
//! magic            4 bytes  "CCNK"
//! version          u32
//! -- config block --
//! input_length     u32
//! alphabet         u32 count, then count × u32 Unicode scalar values
//! truncation       u8       0 = keep first, 1 = keep last
//! conv layers      u32 count, then count × (frames u32, kernel u32, stride u32, pool u32; 0 = none)
//! conv_bias        u8
//! fc hidden units  u32 count, then count × u32
//! class_count      u32
//! class names      u32 count, then count × (u32 byte length, UTF-8 bytes)
//! dropout          f64
//! init_stddev      f64
//! seed             u64
//! -- training state --
//! epoch            u32
//! step             u64
//! run_seed         u64
//! -- parameters --
//! per conv layer: weights [out][in][tap], then bias   (f32)
//! per FC layer:   matrix [out][in], then bias          (f32)
//! has_velocity     u8; if 1, velocity tensors in the same order as the parameters
//! ```

use std::path::Path;

use super::{ConvLayerSpec, Model, ModelConfig, Params};
use crate::quantizer::{Alphabet, Truncation};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"CCNK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Where training stands, so a run can resume exactly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingState {
    /// Completed epochs.
    pub epoch: u32,
    /// Completed optimizer steps.
    pub step: u64,
    /// Seed of the training run's random streams.
    pub run_seed: u64,
    /// Momentum buffers, if saved.
    pub velocity: Option<Params<f32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model<f32>,
    pub state: TrainingState,
}

impl Checkpoint {
    pub fn new(model: Model<f32>) -> Self {
        Checkpoint {
            model,
            state: TrainingState::default(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(CHECKPOINT_MAGIC);
        w.u32(CHECKPOINT_VERSION);
        write_config(&mut w, self.model.config());
        w.u32(self.state.epoch);
        w.u64(self.state.step);
        w.u64(self.state.run_seed);
        write_params(&mut w, self.model.params());
        match &self.state.velocity {
            Some(v) => {
                w.u8(1);
                write_params(&mut w, v);
            }
            None => w.u8(0),
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint(format!(
                "bad magic {magic:?}, expected {CHECKPOINT_MAGIC:?}"
            )));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (this build reads {CHECKPOINT_VERSION})"
            )));
        }
        let config = read_config(&mut r)?;
        config
            .validate()
            .map_err(|e| Error::Checkpoint(format!("stored configuration is invalid: {e}")))?;
        let epoch = r.u32()?;
        let step = r.u64()?;
        let run_seed = r.u64()?;
        let mut params = Params::<f32>::zeros(&config)?;
        read_params(&mut r, &mut params)?;
        let velocity = match r.u8()? {
            0 => None,
            1 => {
                let mut v = params.zeros_like();
                read_params(&mut r, &mut v)?;
                Some(v)
            }
            other => return Err(Error::Checkpoint(format!("bad velocity flag {other}"))),
        };
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} unexpected trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(Checkpoint {
            model: Model::from_parts(config, params)?,
            state: TrainingState {
                epoch,
                step,
                run_seed,
                velocity,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

impl Model<f32> {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Checkpoint::new(self.clone()).save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Checkpoint::load(path)?.model)
    }
}

fn write_config(w: &mut Writer, c: &ModelConfig) {
    w.len(c.input_length);
    w.len(c.alphabet.len());
    for &ch in c.alphabet.chars() {
        w.u32(ch as u32);
    }
    w.u8(match c.truncation {
        Truncation::KeepFirst => 0,
        Truncation::KeepLast => 1,
    });
    w.len(c.conv_layers.len());
    for l in &c.conv_layers {
        w.len(l.frames);
        w.len(l.kernel);
        w.len(l.stride);
        w.len(l.pool.unwrap_or(0));
    }
    w.u8(u8::from(c.conv_bias));
    w.len(c.fc_units.len());
    for &u in &c.fc_units {
        w.len(u);
    }
    w.len(c.class_count);
    w.len(c.class_names.len());
    for name in &c.class_names {
        w.len(name.len());
        w.bytes(name.as_bytes());
    }
    w.f64(c.dropout_prob);
    w.f64(c.init_stddev);
    w.u64(c.seed);
}

fn read_config(r: &mut Reader) -> Result<ModelConfig> {
    let input_length = r.len()?;
    let n = r.len()?;
    let mut chars = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let v = r.u32()?;
        chars.push(
            char::from_u32(v)
                .ok_or_else(|| Error::Checkpoint(format!("invalid alphabet scalar {v:#x}")))?,
        );
    }
    let alphabet = Alphabet::new(chars).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let truncation = match r.u8()? {
        0 => Truncation::KeepFirst,
        1 => Truncation::KeepLast,
        other => return Err(Error::Checkpoint(format!("bad truncation tag {other}"))),
    };
    let n = r.len()?;
    let mut conv_layers = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let frames = r.len()?;
        let kernel = r.len()?;
        let stride = r.len()?;
        let pool = r.len()?;
        conv_layers.push(ConvLayerSpec {
            frames,
            kernel,
            stride,
            pool: (pool > 0).then_some(pool),
        });
    }
    let conv_bias = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(Error::Checkpoint(format!("bad conv-bias flag {other}"))),
    };
    let n = r.len()?;
    let mut fc_units = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        fc_units.push(r.len()?);
    }
    let class_count = r.len()?;
    let n = r.len()?;
    let mut class_names = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let len = r.len()?;
        let raw = r.take(len)?;
        class_names.push(
            String::from_utf8(raw.to_vec())
                .map_err(|_| Error::Checkpoint("class name is not UTF-8".into()))?,
        );
    }
    Ok(ModelConfig {
        input_length,
        alphabet,
        truncation,
        conv_layers,
        fc_units,
        class_count,
        class_names,
        dropout_prob: r.f64()?,
        init_stddev: r.f64()?,
        conv_bias,
        seed: r.u64()?,
    })
}

fn write_params(w: &mut Writer, p: &Params<f32>) {
    for tensor in p.slices() {
        for &v in tensor {
            w.bytes(&v.to_le_bytes());
        }
    }
}

fn read_params(r: &mut Reader, p: &mut Params<f32>) -> Result<()> {
    for tensor in p.slices_mut() {
        let raw = r.take(tensor.len() * 4)?;
        for (v, chunk) in tensor.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        }
    }
    Ok(())
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn len(&mut self, v: usize) {
        self.u32(u32::try_from(v).expect("dimension fits in u32"));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::Checkpoint(format!(
                "truncated file: needed {n} bytes at offset {}, {} available",
                self.pos,
                self.bytes.len() - self.pos
            ))),
        }
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn len(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }
}
