//! Visible edges and the gradient-based metrics `e` and `r̄`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::{channel_mean, min_filter};
use crate::image::{GrayMap, RgbImage};
use crate::math::mean;

/// Half-width of the local contrast window (5×5).
pub const CONTRAST_RADIUS: usize = 2;
/// Floor on the hazy gradient in the `r̄` ratio.
pub const RATIO_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeParams {
    /// Michelson contrast a 5×5 neighbourhood must exceed.
    pub contrast_threshold: f64,
    /// Gradient magnitude a visible pixel must exceed.
    pub min_gradient: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self { contrast_threshold: 0.05, min_gradient: 0.01 }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.contrast_threshold > 0.0) {
            return Err(Error::InvalidParameter {
                name: "contrast_threshold",
                value: self.contrast_threshold,
                expected: "> 0",
            });
        }
        if !(self.min_gradient >= 0.0) {
            return Err(Error::InvalidParameter { name: "min_gradient", value: self.min_gradient, expected: ">= 0" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    width: usize,
    height: usize,
    visible: Vec<bool>,
    gradient: GrayMap,
}

impl EdgeMask {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn visible(&self) -> &[bool] {
        &self.visible
    }

    pub fn gradient(&self) -> &GrayMap {
        &self.gradient
    }

    pub fn count(&self) -> usize {
        self.visible.iter().filter(|&&v| v).count()
    }
}

/// Central-difference gradient magnitude of a scalar map; neighbours beyond
/// the border are replaced by the border pixel.
pub fn gradient_magnitude(lum: &GrayMap) -> GrayMap {
    let (w, h) = lum.dims();
    GrayMap::from_fn(w, h, |x, y| {
        let gx = (lum.get((x + 1).min(w - 1), y) - lum.get(x.saturating_sub(1), y)) / 2.0;
        let gy = (lum.get(x, (y + 1).min(h - 1)) - lum.get(x, y.saturating_sub(1))) / 2.0;
        libm::sqrt(gx * gx + gy * gy)
    })
    .expect("dimensions come from a valid map")
}

/// Pixels whose luminance gradient exceeds `min_gradient` and whose 5×5
/// neighbourhood has Michelson contrast `(max − min)/(max + min)` above
/// `contrast_threshold`.
pub fn visible_edges(img: &RgbImage, params: &EdgeParams) -> Result<EdgeMask> {
    params.validate()?;
    let lum = channel_mean(img);
    let gradient = gradient_magnitude(&lum);
    let lo = min_filter(&lum, CONTRAST_RADIUS);
    let hi = min_filter(&lum.map(|v| -v), CONTRAST_RADIUS).map(|v| -v);
    let visible = lo
        .values()
        .iter()
        .zip(hi.values())
        .zip(gradient.values())
        .map(|((&lo, &hi), &g)| {
            let sum = hi + lo;
            let contrast = if sum > 0.0 { (hi - lo) / sum } else { 0.0 };
            contrast > params.contrast_threshold && g > params.min_gradient
        })
        .collect();
    Ok(EdgeMask { width: img.width(), height: img.height(), visible, gradient })
}

/// Rate of newly visible edges `(n_r − n_o)/n_o`. `None` when the hazy image
/// has no visible edge.
pub fn metric_e(hazy: &RgbImage, dehazed: &RgbImage, params: &EdgeParams) -> Result<Option<f64>> {
    hazy.ensure_same_dims(dehazed.dims())?;
    let n_o = visible_edges(hazy, params)?.count();
    let n_r = visible_edges(dehazed, params)?.count();
    if n_o == 0 {
        return Ok(None);
    }
    Ok(Some((n_r as f64 - n_o as f64) / n_o as f64))
}

/// Geometric mean, over the dehazed image's visible edges, of the gradient
/// ratio dehazed/hazy. `None` when the dehazed image has no visible edge.
pub fn metric_rbar(hazy: &RgbImage, dehazed: &RgbImage, params: &EdgeParams) -> Result<Option<f64>> {
    hazy.ensure_same_dims(dehazed.dims())?;
    let g_hazy = gradient_magnitude(&channel_mean(hazy));
    let edges = visible_edges(dehazed, params)?;
    let logs: Vec<f64> = edges
        .visible()
        .iter()
        .zip(edges.gradient().values().iter().zip(g_hazy.values()))
        .filter(|(&v, _)| v)
        .map(|(_, (&gd, &gh))| libm::log(gd / gh.max(RATIO_EPSILON)))
        .collect();
    if logs.is_empty() {
        return Ok(None);
    }
    Ok(Some(libm::exp(mean(logs))))
}
