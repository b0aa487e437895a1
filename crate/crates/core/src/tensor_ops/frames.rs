use crate::{Error, Real, Result};

/// A `frames × length` matrix stored frame-major: row `i` is frame `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeq<T> {
    frames: usize,
    length: usize,
    data: Vec<T>,
}

impl<T: Real> FrameSeq<T> {
    /// All-zero sequence. Panics if either dimension is zero.
    pub fn zeros(frames: usize, length: usize) -> Self {
        assert!(frames >= 1 && length >= 1, "FrameSeq dimensions must be >= 1");
        FrameSeq {
            frames,
            length,
            data: vec![T::zero(); frames * length],
        }
    }

    pub fn from_vec(frames: usize, length: usize, data: Vec<T>) -> Result<Self> {
        if frames == 0 || length == 0 {
            return Err(Error::shape(
                "FrameSeq::from_vec",
                "frames >= 1 and length >= 1",
                format!("{frames}x{length}"),
            ));
        }
        if data.len() != frames * length {
            return Err(Error::shape(
                "FrameSeq::from_vec",
                format!("{} values for {frames}x{length}", frames * length),
                data.len(),
            ));
        }
        Ok(FrameSeq {
            frames,
            length,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let frames = rows.len();
        let length = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != length) {
            return Err(Error::shape(
                "FrameSeq::from_rows",
                "rows of equal length",
                "ragged rows",
            ));
        }
        Self::from_vec(frames, length, rows.concat())
    }

    /// Single-frame sequence, handy for 1-D tests.
    pub fn from_signal(values: &[T]) -> Result<Self> {
        Self::from_vec(1, values.len(), values.to_vec())
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn length(&self) -> usize {
        self.length
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.length)
    }

    #[inline]
    pub fn row(&self, frame: usize) -> &[T] {
        &self.data[frame * self.length..(frame + 1) * self.length]
    }

    #[inline]
    pub fn row_mut(&mut self, frame: usize) -> &mut [T] {
        &mut self.data[frame * self.length..(frame + 1) * self.length]
    }

    #[inline]
    pub fn get(&self, frame: usize, pos: usize) -> T {
        self.data[frame * self.length + pos]
    }

    #[inline]
    pub fn set(&mut self, frame: usize, pos: usize, value: T) {
        self.data[frame * self.length + pos] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        FrameSeq {
            frames: self.frames,
            length: self.length,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn shape_string(&self) -> String {
        format!("{}x{}", self.frames, self.length)
    }

    pub(crate) fn expect_shape(&self, context: &str, frames: usize, length: usize) -> Result<()> {
        if self.shape() != (frames, length) {
            return Err(Error::shape(
                context,
                format!("{frames}x{length}"),
                self.shape_string(),
            ));
        }
        Ok(())
    }
}
