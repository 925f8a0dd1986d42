//! Dark channel prior baseline.
//!
//! Supplies the dark channel used by the dark-channel metric, the top
//! fraction airlight estimator used by the haze-line metric, and a complete
//! baseline dehazer (guided-filter refinement in place of soft matting).

use alloc::vec::Vec;

use crate::dehaze::{estimate_gray_offset, DehazeResult};
use crate::error::{Error, Result};
use crate::filter::{channel_mean, guided_filter, min_channel, min_filter, FilterParams};
use crate::image::{GrayMap, RgbImage};
use crate::math::clamp01;

/// Global airlight colour, every component in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airlight {
    rgb: [f64; 3],
}

impl Airlight {
    pub fn new(rgb: [f64; 3]) -> Result<Self> {
        for &c in &rgb {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::InvalidParameter { name: "airlight", value: c, expected: "in (0, 1]" });
            }
        }
        Ok(Self { rgb })
    }

    pub fn rgb(&self) -> [f64; 3] {
        self.rgb
    }

    pub fn mean(&self) -> f64 {
        (self.rgb[0] + self.rgb[1] + self.rgb[2]) / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcpParams {
    pub patch_radius: usize,
    pub omega: f64,
    pub t_floor: f64,
    /// Fraction of brightest dark-channel pixels considered for the airlight, in `(0, 0.05]`.
    pub top_fraction: f64,
    pub guided: FilterParams,
}

impl Default for DcpParams {
    fn default() -> Self {
        Self { patch_radius: 4, omega: 0.95, t_floor: 0.1, top_fraction: 0.001, guided: FilterParams::default() }
    }
}

impl DcpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParameter { name: "omega", value: self.omega, expected: "in (0, 1)" });
        }
        if !(self.t_floor > 0.0 && self.t_floor < 0.5) {
            return Err(Error::InvalidParameter { name: "t_floor", value: self.t_floor, expected: "in (0, 0.5)" });
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 0.05) {
            return Err(Error::InvalidParameter {
                name: "top_fraction",
                value: self.top_fraction,
                expected: "in (0, 0.05]",
            });
        }
        if self.patch_radius < 1 {
            return Err(Error::InvalidParameter {
                name: "patch_radius",
                value: self.patch_radius as f64,
                expected: ">= 1",
            });
        }
        self.guided.validate()
    }
}

/// Patch minimum of the channel minimum.
pub fn dark_channel(img: &RgbImage, patch_radius: usize) -> GrayMap {
    min_filter(&min_channel(img), patch_radius)
}

/// Picks the brightest pixel (by channel sum) among the `ceil(top_fraction·N)`
/// pixels with the highest dark channel. Ties go to the lowest row-major index
/// at both stages.
pub fn estimate_airlight_dcp(img: &RgbImage, dark: &GrayMap, top_fraction: f64) -> Result<Airlight> {
    img.ensure_same_dims(dark.dims())?;
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::InvalidParameter { name: "top_fraction", value: top_fraction, expected: "in (0, 1]" });
    }
    let n = img.len();
    let count = (libm::ceil(top_fraction * n as f64) as usize).clamp(1, n);

    let d = dark.values();
    let mut order: Vec<usize> = (0..n).collect();
    // total order: dark value descending, then index ascending
    let by_dark = |a: &usize, b: &usize| d[*b].total_cmp(&d[*a]).then(a.cmp(b));
    if count < n {
        order.select_nth_unstable_by(count - 1, by_dark);
    }
    let pixels = img.pixels();
    let best = order[..count]
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let sa = pixels[a][0] + pixels[a][1] + pixels[a][2];
            let sb = pixels[b][0] + pixels[b][1] + pixels[b][2];
            sa.total_cmp(&sb).then(b.cmp(&a))
        })
        .expect("count >= 1");
    // an all-black candidate would give a zero airlight; keep it strictly positive
    let rgb = pixels[best].map(|c| c.max(f64::MIN_POSITIVE));
    Airlight::new(rgb)
}

/// Raw transmission `1 − ω·min_Ω min_c(I_c/A_c)` before refinement.
pub fn dcp_raw_transmission(img: &RgbImage, a: &Airlight, patch_radius: usize, omega: f64) -> GrayMap {
    let [ar, ag, ab] = a.rgb();
    let normalized: Vec<f64> =
        img.pixels().iter().map(|p| (p[0] / ar).min(p[1] / ag).min(p[2] / ab)).collect();
    let normalized = GrayMap::new(img.width(), img.height(), normalized).expect("same dims as image");
    min_filter(&normalized, patch_radius).map(|m| 1.0 - omega * m)
}

/// Raw transmission refined with the guided filter (gray guide) and clamped
/// to `[t_floor, 1]`.
pub fn dcp_transmission(img: &RgbImage, a: &Airlight, params: &DcpParams) -> Result<GrayMap> {
    params.validate()?;
    let raw = dcp_raw_transmission(img, a, params.patch_radius, params.omega);
    let refined = guided_filter(&channel_mean(img), &raw, params.guided)?;
    let t_floor = params.t_floor;
    Ok(refined.map(|t| t.clamp(t_floor, 1.0)))
}

/// `J_c = (I_c − A_c·(1 − t)) / max(t, t_floor)`, clamped to `[0, 1]`.
pub fn recover_radiance_rgb(img: &RgbImage, t: &GrayMap, a: &Airlight, t_floor: f64) -> Result<RgbImage> {
    img.ensure_same_dims(t.dims())?;
    let ar = a.rgb();
    let data = img
        .pixels()
        .iter()
        .zip(t.values())
        .map(|(p, &t)| {
            let denom = t.max(t_floor);
            core::array::from_fn(|c| clamp01((p[c] - ar[c] * (1.0 - t)) / denom))
        })
        .collect();
    Ok(RgbImage::from_clamped(img.width(), img.height(), data))
}

/// Dark channel prior dehazing.
pub fn dcp_dehaze(img: &RgbImage, params: &DcpParams) -> Result<DehazeResult> {
    params.validate()?;
    let dark = dark_channel(img, params.patch_radius);
    let airlight = estimate_airlight_dcp(img, &dark, params.top_fraction)?;
    let transmission = dcp_transmission(img, &airlight, params)?;
    let radiance = recover_radiance_rgb(img, &transmission, &airlight, params.t_floor)?;
    let k_map = GrayMap::filled(img.width(), img.height(), airlight.mean())?;
    Ok(DehazeResult {
        radiance,
        transmission,
        k_map,
        haze_intensity: dark,
        gray_offset: estimate_gray_offset(img),
        normalizer: 0.0,
        airlight: Some(airlight),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_image_dark_channel_is_one() {
        let img = RgbImage::filled(6, 6, [1.0; 3]).unwrap();
        assert!(dark_channel(&img, 2).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn black_pixel_zeroes_its_window() {
        let img = RgbImage::from_fn(9, 9, |x, y| if (x, y) == (4, 4) { [0.0, 0.5, 0.5] } else { [0.8; 3] }).unwrap();
        let dark = dark_channel(&img, 2);
        for y in 2..=6 {
            for x in 2..=6 {
                assert_eq!(dark.get(x, y), 0.0);
            }
        }
        assert_eq!(dark.get(0, 0), 0.8);
    }

    #[test]
    fn uniform_image_airlight_is_its_colour() {
        let img = RgbImage::filled(10, 10, [0.3, 0.6, 0.9]).unwrap();
        let dark = dark_channel(&img, 4);
        let a = estimate_airlight_dcp(&img, &dark, 0.001).unwrap();
        assert_eq!(a.rgb(), [0.3, 0.6, 0.9]);
    }

    #[test]
    fn bright_sky_region_wins() {
        let img = RgbImage::from_fn(40, 40, |x, y| if y < 8 && x < 20 { [0.95; 3] } else { [0.1, 0.2, 0.05] }).unwrap();
        let dark = dark_channel(&img, 4);
        let a = estimate_airlight_dcp(&img, &dark, 0.001).unwrap();
        assert_eq!(a.rgb(), [0.95; 3]);
    }

    #[test]
    fn airlight_equal_to_image_gives_one_minus_omega() {
        let img = RgbImage::filled(8, 8, [0.7, 0.8, 0.9]).unwrap();
        let a = Airlight::new([0.7, 0.8, 0.9]).unwrap();
        let raw = dcp_raw_transmission(&img, &a, 4, 0.95);
        assert!(raw.values().iter().all(|&t| (t - 0.05).abs() < 1e-12));
        let black = RgbImage::filled(8, 8, [0.0; 3]).unwrap();
        let t = dcp_transmission(&black, &a, &DcpParams::default()).unwrap();
        assert!(t.values().iter().all(|&t| (t - 1.0).abs() < 1e-12));
    }

    #[test]
    fn airlight_rejects_zero() {
        assert!(Airlight::new([0.0, 0.5, 0.5]).is_err());
        assert!(Airlight::new([0.5, 1.5, 0.5]).is_err());
    }

    #[test]
    fn params_validation() {
        let ok = DcpParams::default();
        assert!(ok.validate().is_ok());
        assert!(DcpParams { top_fraction: 0.1, ..ok }.validate().is_err());
        assert!(DcpParams { top_fraction: 0.0, ..ok }.validate().is_err());
        assert!(DcpParams { omega: 0.0, ..ok }.validate().is_err());
    }
}
