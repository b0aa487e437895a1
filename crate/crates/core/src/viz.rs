//! Grayscale renderings of first-layer convolution kernels.
//!
//! Each chosen kernel becomes a block of `k` rows (taps) by `m` columns
//! (input frames, i.e. alphabet characters). Blocks are laid out
//! `columns` per row, separated by `GAP` pixels of mid-gray:
//!
//! ```text
//! height = rows·k + (rows − 1)·GAP     rows = ceil(count / columns)
//! width  = cols·m + (cols − 1)·GAP     cols = min(columns, count)
//! ```
//!
//! Weights are scaled by the largest magnitude among the chosen kernels:
//! black is the most negative value, white the most positive, and
//! 128 is zero. Unused grid cells are mid-gray as well.

use std::path::Path;

use rand::seq::index;

use crate::model::Model;
use crate::tensor_ops::ConvKernel;
use crate::{seeded_rng, Error, Real, Result};

pub const GAP: usize = 1;
pub const MID_GRAY: u8 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Binary PGM (P5) bytes.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// `(width, height)` of a grid of `count` kernels with `taps` rows and
/// `in_frames` columns each.
pub fn grid_size(count: usize, columns: usize, taps: usize, in_frames: usize) -> (usize, usize) {
    if count == 0 || columns == 0 {
        return (0, 0);
    }
    let cols = columns.min(count);
    let rows = count.div_ceil(columns);
    (
        cols * in_frames + (cols - 1) * GAP,
        rows * taps + (rows - 1) * GAP,
    )
}

fn gray(value: f64, scale: f64) -> u8 {
    if scale == 0.0 {
        return MID_GRAY;
    }
    let v = (value / scale).clamp(-1.0, 1.0);
    (127.5 * (v + 1.0)).round() as u8
}

/// Draws the kernels of output frames `chosen`, in order.
pub fn render_kernels<T: Real>(kernel: &ConvKernel<T>, chosen: &[usize], columns: usize) -> Result<GrayImage> {
    if columns == 0 {
        return Err(Error::Config("image needs at least one block per row".into()));
    }
    if let Some(&bad) = chosen.iter().find(|&&j| j >= kernel.out_frames()) {
        return Err(Error::Config(format!(
            "kernel {bad} requested but the layer has {}",
            kernel.out_frames()
        )));
    }
    let (k, m) = (kernel.width(), kernel.in_frames());
    let (width, height) = grid_size(chosen.len(), columns, k, m);
    let mut img = GrayImage::filled(width, height, MID_GRAY);
    let scale = chosen
        .iter()
        .flat_map(|&j| (0..m).flat_map(move |i| kernel.taps(j, i).iter().map(|w| w.as_f64().abs())))
        .fold(0.0, f64::max);
    for (b, &j) in chosen.iter().enumerate() {
        let top = (b / columns) * (k + GAP);
        let left = (b % columns) * (m + GAP);
        for i in 0..m {
            for (tap, w) in kernel.taps(j, i).iter().enumerate() {
                img.pixels[(top + tap) * width + left + i] = gray(w.as_f64(), scale);
            }
        }
    }
    Ok(img)
}

/// `count` distinct output frames of the first layer, drawn with `seed`
/// and sorted.
pub fn choose_kernels(total: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut chosen = index::sample(&mut seeded_rng(seed), total, count.min(total)).into_vec();
    chosen.sort_unstable();
    chosen
}

/// Renders `count` randomly chosen first-layer kernels of `model`.
pub fn first_layer_image<T: Real>(model: &Model<T>, count: usize, columns: usize, seed: u64) -> Result<GrayImage> {
    let kernel = &model.params().conv[0].kernel;
    render_kernels(kernel, &choose_kernels(kernel.out_frames(), count, seed), columns)
}
