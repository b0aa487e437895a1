use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::Float;

/// Element type of every activation, weight and gradient.
///
/// Implemented for `f32` (training and inference) and `f64` (gradient checks).
pub trait Real:
    Float
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(value: f64) -> Self;
    fn as_f64(self) -> f64;

    /// `c ← a·b + beta·c` where `a` is `m×k`, `b` is `k×n` and `c` is a
    /// row-major `m×n` buffer. `a` and `b` are read through (row, column)
    /// strides, so transposed views cost nothing.
    fn gemm(a: Strided<'_, Self>, b: Strided<'_, Self>, beta: Self, c: &mut [Self]);
}

/// A matrix view over a slice: element `(r, c)` lives at `r·rows + c·cols`.
#[derive(Debug, Clone, Copy)]
pub struct Strided<'a, T> {
    pub data: &'a [T],
    pub shape: (usize, usize),
    pub strides: (usize, usize),
}

impl<'a, T> Strided<'a, T> {
    pub fn row_major(data: &'a [T], rows: usize, cols: usize) -> Self {
        Self { data, shape: (rows, cols), strides: (cols, 1) }
    }

    pub fn transposed(self) -> Self {
        Self {
            data: self.data,
            shape: (self.shape.1, self.shape.0),
            strides: (self.strides.1, self.strides.0),
        }
    }

    fn check(&self) {
        let (r, c) = self.shape;
        if r > 0 && c > 0 {
            assert!((r - 1) * self.strides.0 + (c - 1) * self.strides.1 < self.data.len(), "strided view out of bounds");
        }
    }
}

fn check_gemm<T>(a: &Strided<'_, T>, b: &Strided<'_, T>, c: &[T]) -> (usize, usize, usize) {
    a.check();
    b.check();
    assert_eq!(a.shape.1, b.shape.0, "gemm inner dimensions");
    assert_eq!(c.len(), a.shape.0 * b.shape.1, "gemm output size");
    (a.shape.0, a.shape.1, b.shape.1)
}

impl Real for f32 {
    fn gemm(a: Strided<'_, Self>, b: Strided<'_, Self>, beta: Self, c: &mut [Self]) {
        let (m, k, n) = check_gemm(&a, &b, c);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: check_gemm verified that every index reached through the
        // strides lies inside the slices, and `c` is exclusively borrowed.
        unsafe {
            matrixmultiply::sgemm(
                m, k, n, 1.0,
                a.data.as_ptr(), a.strides.0 as isize, a.strides.1 as isize,
                b.data.as_ptr(), b.strides.0 as isize, b.strides.1 as isize,
                beta,
                c.as_mut_ptr(), n as isize, 1,
            );
        }
    }

    #[inline]
    fn from_f64(value: f64) -> Self {
        value as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn gemm(a: Strided<'_, Self>, b: Strided<'_, Self>, beta: Self, c: &mut [Self]) {
        let (m, k, n) = check_gemm(&a, &b, c);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: check_gemm verified that every index reached through the
        // strides lies inside the slices, and `c` is exclusively borrowed.
        unsafe {
            matrixmultiply::dgemm(
                m, k, n, 1.0,
                a.data.as_ptr(), a.strides.0 as isize, a.strides.1 as isize,
                b.data.as_ptr(), b.strides.0 as isize, b.strides.1 as isize,
                beta,
                c.as_mut_ptr(), n as isize, 1,
            );
        }
    }

    #[inline]
    fn from_f64(value: f64) -> Self {
        value
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
