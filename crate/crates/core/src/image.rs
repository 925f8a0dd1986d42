//! Image containers.
//!
//! Both containers are row-major. `RgbImage` enforces `[0, 1]` on every
//! channel; `GrayMap` carries arbitrary finite scalars and leaves range
//! checks to the code that produces it.

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(Error::BadDimensions { width, height, len });
    }
    Ok(())
}

/// H×W×3 image with every channel in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        for (index, px) in data.iter().enumerate() {
            for &value in px {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::OutOfRange { index, value });
                }
            }
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image from already-clamped values. Callers guarantee the
    /// `[0, 1]` invariant.
    pub(crate) fn from_clamped(width: usize, height: usize, data: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(width, height, alloc::vec![rgb; width.saturating_mul(height)])
    }

    /// Evaluates `f(x, y)` for every pixel. Fails if any value leaves `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<[f64; 3]> {
        self.data
    }

    pub(crate) fn ensure_same_dims(&self, other_dims: (usize, usize)) -> Result<()> {
        if self.dims() != other_dims {
            return Err(Error::DimensionMismatch { expected: self.dims(), found: other_dims });
        }
        Ok(())
    }
}

/// H×W scalar field: dark channels, transmission maps, K-maps, haze intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, alloc::vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    /// Applies `f` to every value, keeping dimensions.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> GrayMap {
        GrayMap::from_raw(self.width, self.height, self.data.iter().copied().map(f).collect())
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        crate::math::mean(self.data.iter().copied())
    }

    pub(crate) fn ensure_same_dims(&self, other_dims: (usize, usize)) -> Result<()> {
        if self.dims() != other_dims {
            return Err(Error::DimensionMismatch { expected: self.dims(), found: other_dims });
        }
        Ok(())
    }
}
