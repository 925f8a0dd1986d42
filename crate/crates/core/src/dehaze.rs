//! Airlight-coefficient dehazing.
//!
//! The hazy image is modelled as `I = J·t + K·(1 − t)` where `K` is a
//! per-pixel airlight coefficient (the local haze level) rather than one
//! global airlight colour. `K` is estimated from a brightened grayscale of
//! the input, smoothed with a box mean and a guided filter and floored at
//! `k_floor`. The transmission comes from the patch minimum of
//! `min_c(I_c)/K`, normalized by the mean colour spread of the image.

use alloc::vec::Vec;

use crate::dcp::Airlight;
use crate::error::{Error, Result};
use crate::filter::{box_mean_filter, channel_mean, guided_filter, min_filter, FilterParams};
use crate::image::{GrayMap, RgbImage};
use crate::math::{clamp01, mean};

/// Upper bound applied to the transmission normalizer so `1 − β` stays positive.
pub const NORMALIZER_MAX: f64 = 0.9;

/// Which minimum the transmission estimate takes over `min_c(I_c)/K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransmissionWindow {
    /// Minimum over the `(2·patch_radius + 1)²` window around each pixel.
    #[default]
    Patch,
    /// Per-pixel channel minimum only.
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DehazeParams {
    /// Haze retention factor in `(0, 1)`.
    pub omega: f64,
    /// Transmission patch radius; a side of 9 is radius 4.
    pub patch_radius: usize,
    /// Lower bound on the K-map, in `[0.5, 1)`.
    pub k_floor: f64,
    /// Lower bound on the transmission used for recovery, in `(0, 0.5)`.
    pub t_floor: f64,
    /// Guided filter applied to the averaged haze intensity.
    pub guided: FilterParams,
    /// Box mean radius for the haze intensity.
    pub avg_radius: usize,
    pub window: TransmissionWindow,
}

impl Default for DehazeParams {
    fn default() -> Self {
        Self {
            omega: 0.95,
            patch_radius: 4,
            k_floor: 0.8,
            t_floor: 0.1,
            guided: FilterParams::default(),
            avg_radius: 15,
            window: TransmissionWindow::Patch,
        }
    }
}

impl DehazeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParameter { name: "omega", value: self.omega, expected: "in (0, 1)" });
        }
        if !(0.5..1.0).contains(&self.k_floor) {
            return Err(Error::InvalidParameter { name: "k_floor", value: self.k_floor, expected: "in [0.5, 1)" });
        }
        if !(self.t_floor > 0.0 && self.t_floor < 0.5) {
            return Err(Error::InvalidParameter { name: "t_floor", value: self.t_floor, expected: "in (0, 0.5)" });
        }
        if self.patch_radius < 1 {
            return Err(Error::InvalidParameter {
                name: "patch_radius",
                value: self.patch_radius as f64,
                expected: ">= 1",
            });
        }
        if self.avg_radius < 1 {
            return Err(Error::InvalidParameter {
                name: "avg_radius",
                value: self.avg_radius as f64,
                expected: ">= 1",
            });
        }
        self.guided.validate()
    }
}

/// Global colour offset `alpha = mu_i − mu_mc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayOffset {
    pub alpha: f64,
    /// Mean over all pixels and channels.
    pub mu_i: f64,
    /// Mean of the per-pixel channel minimum.
    pub mu_mc: f64,
}

pub fn estimate_gray_offset(img: &RgbImage) -> GrayOffset {
    let mu_i = mean(img.pixels().iter().flat_map(|p| p.iter().copied()));
    let mu_mc = mean(img.pixels().iter().map(|p| p[0].min(p[1]).min(p[2])));
    // mean ≥ min pixelwise; only rounding can push the difference below zero
    let alpha = (mu_i - mu_mc).max(0.0);
    GrayOffset { alpha, mu_i, mu_mc }
}

/// `C(x) = channel_mean(x) + alpha`, clamped to `[0, 1]`.
pub fn haze_intensity(img: &RgbImage, offset: &GrayOffset) -> GrayMap {
    channel_mean(img).map(|v| clamp01(v + offset.alpha))
}

fn k_map_from_intensity(img: &RgbImage, intensity: &GrayMap, params: &DehazeParams) -> Result<GrayMap> {
    let guide = channel_mean(img);
    let averaged = box_mean_filter(intensity, params.avg_radius);
    let refined = guided_filter(&guide, &averaged, params.guided)?;
    let floor = params.k_floor;
    Ok(refined.map(|k| k.max(floor).min(1.0)))
}

/// K-map in `[k_floor, 1]`.
pub fn estimate_k_map(img: &RgbImage, params: &DehazeParams) -> Result<GrayMap> {
    params.validate()?;
    let offset = estimate_gray_offset(img);
    k_map_from_intensity(img, &haze_intensity(img, &offset), params)
}

/// Global mean of `channel_mean(x) − min_channel(x)`.
///
/// By linearity this equals [`GrayOffset::alpha`] up to rounding.
pub fn transmission_normalizer(img: &RgbImage) -> f64 {
    mean(img.pixels().iter().map(|p| (p[0] + p[1] + p[2]) / 3.0 - p[0].min(p[1]).min(p[2]))).max(0.0)
}

/// Transmission from the K-map: `t = (1 − ω·min_Ω(min_c(I_c)/K)) / (1 − β)`,
/// clamped to `[t_floor, 1]`.
pub fn estimate_transmission(img: &RgbImage, k_map: &GrayMap, params: &DehazeParams) -> Result<GrayMap> {
    params.validate()?;
    img.ensure_same_dims(k_map.dims())?;
    if let Some((index, &value)) = k_map.values().iter().enumerate().find(|(_, &k)| !(k > 0.0)) {
        return Err(Error::NonPositive { name: "k_map", index, value });
    }
    let beta = transmission_normalizer(img).min(NORMALIZER_MAX);
    transmission_with_normalizer(img, k_map, params, beta)
}

/// Unnormalized, unclamped transmission `1 − ω·min(min_c(I_c)/K)` with the
/// minimum taken over `params.window`.
pub fn raw_transmission(img: &RgbImage, k_map: &GrayMap, params: &DehazeParams) -> Result<GrayMap> {
    img.ensure_same_dims(k_map.dims())?;
    let omega = params.omega;
    Ok(min_ratio(img, k_map, params)?.map(|m| 1.0 - omega * m))
}

fn min_ratio(img: &RgbImage, k_map: &GrayMap, params: &DehazeParams) -> Result<GrayMap> {
    let ratio: Vec<f64> = img
        .pixels()
        .iter()
        .zip(k_map.values())
        .map(|(p, &k)| p[0].min(p[1]).min(p[2]) / k)
        .collect();
    let ratio = GrayMap::new(img.width(), img.height(), ratio)?;
    Ok(match params.window {
        TransmissionWindow::Patch => min_filter(&ratio, params.patch_radius),
        TransmissionWindow::Pixel => ratio,
    })
}

fn transmission_with_normalizer(img: &RgbImage, k_map: &GrayMap, params: &DehazeParams, beta: f64) -> Result<GrayMap> {
    let ratio = min_ratio(img, k_map, params)?;
    let scale = 1.0 / (1.0 - beta);
    let (omega, t_floor) = (params.omega, params.t_floor);
    Ok(ratio.map(|m| ((1.0 - omega * m) * scale).clamp(t_floor, 1.0)))
}

/// Inverts the haze model with a per-pixel K:
/// `J_c = (I_c − K·(1 − t)) / max(t, t_floor)`, clamped to `[0, 1]`.
pub fn recover_radiance(img: &RgbImage, t: &GrayMap, k: &GrayMap, t_floor: f64) -> Result<RgbImage> {
    img.ensure_same_dims(t.dims())?;
    img.ensure_same_dims(k.dims())?;
    if !(t_floor > 0.0) {
        return Err(Error::InvalidParameter { name: "t_floor", value: t_floor, expected: "> 0" });
    }
    let data = img
        .pixels()
        .iter()
        .zip(t.values().iter().zip(k.values()))
        .map(|(p, (&t, &k))| {
            let denom = t.max(t_floor);
            let haze = k * (1.0 - t);
            [
                clamp01((p[0] - haze) / denom),
                clamp01((p[1] - haze) / denom),
                clamp01((p[2] - haze) / denom),
            ]
        })
        .collect();
    Ok(RgbImage::from_clamped(img.width(), img.height(), data))
}

/// A scalar broadcast to every pixel, or a per-pixel map.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(f64),
    Map(GrayMap),
}

impl Field {
    fn at(&self, i: usize) -> f64 {
        match self {
            Field::Scalar(v) => *v,
            Field::Map(m) => m.values()[i],
        }
    }

    fn check(&self, name: &'static str, dims: (usize, usize)) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        match self {
            Field::Scalar(v) if !in_unit(*v) => {
                Err(Error::InvalidParameter { name, value: *v, expected: "in (0, 1]" })
            }
            Field::Scalar(_) => Ok(()),
            Field::Map(m) => {
                if m.dims() != dims {
                    return Err(Error::DimensionMismatch { expected: dims, found: m.dims() });
                }
                match m.values().iter().find(|&&v| !in_unit(v)) {
                    Some(&v) => Err(Error::InvalidParameter { name, value: v, expected: "in (0, 1]" }),
                    None => Ok(()),
                }
            }
        }
    }

    /// Renders the field as a map of the given size.
    pub fn to_map(&self, width: usize, height: usize) -> Result<GrayMap> {
        match self {
            Field::Scalar(v) => GrayMap::filled(width, height, *v),
            Field::Map(m) => {
                if m.dims() != (width, height) {
                    return Err(Error::DimensionMismatch { expected: (width, height), found: m.dims() });
                }
                Ok(m.clone())
            }
        }
    }
}

/// Forward haze model parameters: transmission `t` and airlight coefficient `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct HazeSynthesisParams {
    pub transmission: Field,
    pub airlight_k: Field,
}

impl HazeSynthesisParams {
    pub fn uniform(t: f64, k: f64) -> Self {
        Self { transmission: Field::Scalar(t), airlight_k: Field::Scalar(k) }
    }

    /// `t = exp(−scatter·depth)` per pixel. Depth and scatter must be non-negative.
    pub fn from_depth(depth: &GrayMap, scatter: f64, airlight_k: Field) -> Result<Self> {
        if !(scatter >= 0.0) || !scatter.is_finite() {
            return Err(Error::InvalidParameter { name: "scatter", value: scatter, expected: ">= 0" });
        }
        if let Some(&d) = depth.values().iter().find(|&&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter { name: "depth", value: d, expected: ">= 0" });
        }
        // exp of a non-positive argument; underflow to 0 is caught by validate
        let t = depth.map(|d| libm::exp(-scatter * d));
        Ok(Self { transmission: Field::Map(t), airlight_k })
    }

    pub fn validate(&self, dims: (usize, usize)) -> Result<()> {
        self.transmission.check("transmission", dims)?;
        self.airlight_k.check("airlight_k", dims)
    }
}

/// `I_c = J_c·t + K·(1 − t)`.
pub fn synthesize_haze(clean: &RgbImage, p: &HazeSynthesisParams) -> Result<RgbImage> {
    p.validate(clean.dims())?;
    let data = clean
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, px)| {
            let t = p.transmission.at(i);
            let haze = p.airlight_k.at(i) * (1.0 - t);
            // convex combination of values in [0, 1]; clamp only absorbs rounding
            [clamp01(px[0] * t + haze), clamp01(px[1] * t + haze), clamp01(px[2] * t + haze)]
        })
        .collect();
    Ok(RgbImage::from_clamped(clean.width(), clean.height(), data))
}

/// Every intermediate of a dehazing run.
#[derive(Debug, Clone, PartialEq)]
pub struct DehazeResult {
    pub radiance: RgbImage,
    pub transmission: GrayMap,
    /// K-map for the airlight-coefficient method; the dark channel baseline
    /// stores its airlight's channel mean broadcast over the image.
    pub k_map: GrayMap,
    /// Haze intensity `C(x)`; the dark channel baseline stores its dark channel.
    pub haze_intensity: GrayMap,
    pub gray_offset: GrayOffset,
    /// Transmission normalizer `β`; zero for the dark channel baseline.
    pub normalizer: f64,
    /// Global airlight, only set by the dark channel baseline.
    pub airlight: Option<Airlight>,
}

/// Full airlight-coefficient pipeline.
pub fn dehaze_pipeline(img: &RgbImage, params: &DehazeParams) -> Result<DehazeResult> {
    params.validate()?;
    let gray_offset = estimate_gray_offset(img);
    let haze_intensity = haze_intensity(img, &gray_offset);
    let k_map = k_map_from_intensity(img, &haze_intensity, params)?;
    let normalizer = transmission_normalizer(img);
    let transmission = transmission_with_normalizer(img, &k_map, params, normalizer.min(NORMALIZER_MAX))?;
    let radiance = recover_radiance(img, &transmission, &k_map, params.t_floor)?;
    Ok(DehazeResult {
        radiance,
        transmission,
        k_map,
        haze_intensity,
        gray_offset,
        normalizer,
        airlight: None,
    })
}

/// Mean of `min_c(clean_c)(x)·t(x)`: the term dropped when deriving the
/// transmission estimate.
pub fn neglected_term_score(clean: &RgbImage, t: &GrayMap) -> Result<f64> {
    clean.ensure_same_dims(t.dims())?;
    Ok(mean(clean.pixels().iter().zip(t.values()).map(|(p, &t)| p[0].min(p[1]).min(p[2]) * t)))
}
