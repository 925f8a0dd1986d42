//! No-reference haze-removal metrics.
//!
//! Classical gradient metrics (`e`, `r̄`, `σ`) plus two haze-aware scores:
//! `alpha_dc`, the mean squared change of the dark channel, and `beta_hl`,
//! the mean squared change of per-haze-line magnitude spread.

mod edges;
mod haze_lines;

pub use edges::{
    gradient_magnitude, metric_e, metric_rbar, visible_edges, EdgeMask, EdgeParams, CONTRAST_RADIUS, RATIO_EPSILON,
};
pub use haze_lines::{
    beta_from_deviations, cluster_deviations, cluster_haze_lines, cluster_haze_lines_with, fibonacci_directions,
    from_angles, metric_beta_hl, to_spherical, ClusterDeviations, DirectionIndex, HazeLineClustering, NULL_RADIUS,
};

use crate::dcp::{dark_channel, estimate_airlight_dcp, Airlight};
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::math::mean;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub edges: EdgeParams,
    /// Dark channel patch radius for `alpha_dc` and for the airlight estimate.
    pub patch_radius: usize,
    pub n_directions: usize,
    pub min_cluster: usize,
    /// Airlight selection fraction for the haze-line metric.
    pub top_fraction: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self { edges: EdgeParams::default(), patch_radius: 4, n_directions: 1000, min_cluster: 20, top_fraction: 0.001 }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        self.edges.validate()?;
        if self.n_directions < 2 {
            return Err(Error::InvalidParameter {
                name: "n_directions",
                value: self.n_directions as f64,
                expected: ">= 2",
            });
        }
        if self.min_cluster < 2 {
            return Err(Error::InvalidParameter {
                name: "min_cluster",
                value: self.min_cluster as f64,
                expected: ">= 2",
            });
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 0.05) {
            return Err(Error::InvalidParameter {
                name: "top_fraction",
                value: self.top_fraction,
                expected: "in (0, 0.05]",
            });
        }
        Ok(())
    }
}

/// Scores for one (hazy, dehazed) pair. Undefined scores are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricReport {
    pub e: Option<f64>,
    pub r_bar: Option<f64>,
    /// Percent of pixels newly saturated.
    pub sigma: f64,
    pub alpha_dc: f64,
    pub beta_hl: Option<f64>,
    pub neglected_term: Option<f64>,
}

#[inline]
fn quantize(v: f64) -> u8 {
    libm::round(v.clamp(0.0, 1.0) * 255.0) as u8
}

fn saturated(p: &[f64; 3]) -> bool {
    p.iter().any(|&c| matches!(quantize(c), 0 | 255))
}

/// Percentage of pixels that are black or white in some channel (after
/// 8-bit quantization) in `dehazed` but not in `hazy`.
pub fn metric_sigma(hazy: &RgbImage, dehazed: &RgbImage) -> Result<f64> {
    hazy.ensure_same_dims(dehazed.dims())?;
    let newly = hazy
        .pixels()
        .iter()
        .zip(dehazed.pixels())
        .filter(|(h, d)| saturated(d) && !saturated(h))
        .count();
    Ok(100.0 * newly as f64 / hazy.len() as f64)
}

/// Mean squared difference of the two dark channels.
pub fn metric_alpha_dc(hazy: &RgbImage, dehazed: &RgbImage, patch_radius: usize) -> Result<f64> {
    hazy.ensure_same_dims(dehazed.dims())?;
    let d = dark_channel(hazy, patch_radius);
    let d_hat = dark_channel(dehazed, patch_radius);
    Ok(mean(d.values().iter().zip(d_hat.values()).map(|(a, b)| (a - b) * (a - b))))
}

/// Airlight used by the haze-line metric, estimated from the hazy image.
pub fn metric_airlight(hazy: &RgbImage, params: &MetricParams) -> Result<Airlight> {
    estimate_airlight_dcp(hazy, &dark_channel(hazy, params.patch_radius), params.top_fraction)
}

/// All five scores for one pair.
pub fn assess(hazy: &RgbImage, dehazed: &RgbImage, params: &MetricParams) -> Result<MetricReport> {
    params.validate()?;
    hazy.ensure_same_dims(dehazed.dims())?;
    let airlight = metric_airlight(hazy, params)?;
    Ok(MetricReport {
        e: metric_e(hazy, dehazed, &params.edges)?,
        r_bar: metric_rbar(hazy, dehazed, &params.edges)?,
        sigma: metric_sigma(hazy, dehazed)?,
        alpha_dc: metric_alpha_dc(hazy, dehazed, params.patch_radius)?,
        beta_hl: metric_beta_hl(hazy, dehazed, &airlight, params.n_directions, params.min_cluster)?,
        neglected_term: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_examples() {
        let gray = RgbImage::filled(4, 4, [0.5; 3]).unwrap();
        let white = RgbImage::filled(4, 4, [1.0; 3]).unwrap();
        assert_eq!(metric_sigma(&gray, &gray).unwrap(), 0.0);
        assert_eq!(metric_sigma(&gray, &white).unwrap(), 100.0);
        let quarter = RgbImage::from_fn(4, 4, |x, _| if x == 0 { [0.0, 0.4, 0.4] } else { [0.5; 3] }).unwrap();
        assert_eq!(metric_sigma(&gray, &quarter).unwrap(), 25.0);
        // already-saturated hazy pixels do not count
        assert_eq!(metric_sigma(&white, &white).unwrap(), 0.0);
    }

    #[test]
    fn sigma_judged_after_quantization() {
        let gray = RgbImage::filled(2, 1, [0.5; 3]).unwrap();
        let near_white = RgbImage::filled(2, 1, [0.999, 0.5, 0.5]).unwrap();
        assert_eq!(metric_sigma(&gray, &near_white).unwrap(), 100.0);
    }

    #[test]
    fn alpha_dc_of_constant_dark_channels() {
        let a = RgbImage::filled(5, 5, [0.5, 0.7, 0.9]).unwrap();
        let b = RgbImage::filled(5, 5, [0.6, 0.3, 0.8]).unwrap();
        assert!((metric_alpha_dc(&a, &b, 2).unwrap() - 0.04).abs() < 1e-15);
        assert_eq!(metric_alpha_dc(&a, &a, 2).unwrap(), 0.0);
    }

    #[test]
    fn params_validation() {
        let ok = MetricParams::default();
        assert!(ok.validate().is_ok());
        assert!(MetricParams { n_directions: 1, ..ok }.validate().is_err());
        assert!(MetricParams { min_cluster: 1, ..ok }.validate().is_err());
    }
}
