//! Per-pixel channel reductions and windowed filters.
//!
//! Every windowed filter uses a square window of side `2·radius + 1`
//! intersected with the image; nothing outside the image is invented, so
//! border windows are simply smaller.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{GrayMap, RgbImage};

/// Guided filter radius used when no other value is configured.
pub const DEFAULT_GUIDED_RADIUS: usize = 30;
/// Guided filter regularizer used when no other value is configured.
pub const DEFAULT_GUIDED_EPSILON: f64 = 1e-3;

/// Window radius and regularizer for the guided filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub radius: usize,
    pub epsilon: f64,
}

impl FilterParams {
    pub fn new(radius: usize, epsilon: f64) -> Result<Self> {
        let p = Self { radius, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius < 1 {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: self.radius as f64,
                expected: ">= 1",
            });
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter { name: "epsilon", value: self.epsilon, expected: "> 0" });
        }
        Ok(())
    }
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { radius: DEFAULT_GUIDED_RADIUS, epsilon: DEFAULT_GUIDED_EPSILON }
    }
}

/// `min(r, g, b)` per pixel.
pub fn min_channel(img: &RgbImage) -> GrayMap {
    let data = img.pixels().iter().map(|p| p[0].min(p[1]).min(p[2])).collect();
    GrayMap::from_raw(img.width(), img.height(), data)
}

/// `(r + g + b) / 3` per pixel.
pub fn channel_mean(img: &RgbImage) -> GrayMap {
    let data = img.pixels().iter().map(|p| (p[0] + p[1] + p[2]) / 3.0).collect();
    GrayMap::from_raw(img.width(), img.height(), data)
}

#[inline]
fn window(i: usize, radius: usize, n: usize) -> (usize, usize) {
    (i.saturating_sub(radius), (i + radius).min(n - 1))
}

/// Sliding minimum over a 1-D line with a clamped window, O(n) via a
/// monotone deque of candidate indices.
fn sliding_min_line(src: &[f64], radius: usize, dst: &mut [f64], deque: &mut VecDeque<usize>) {
    let n = src.len();
    deque.clear();
    let mut next = 0usize;
    for (i, out) in dst.iter_mut().enumerate() {
        let (lo, hi) = window(i, radius, n);
        while next <= hi {
            while let Some(&back) = deque.back() {
                if src[back] >= src[next] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        while let Some(&front) = deque.front() {
            if front < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        *out = src[*deque.front().expect("window is never empty")];
    }
}

/// Windowed mean over a 1-D line with a clamped window, via prefix sums.
fn sliding_mean_line(src: &[f64], radius: usize, dst: &mut [f64], prefix: &mut Vec<f64>) {
    let n = src.len();
    prefix.clear();
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in src {
        acc += v;
        prefix.push(acc);
    }
    for (i, out) in dst.iter_mut().enumerate() {
        let (lo, hi) = window(i, radius, n);
        *out = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
    }
}

/// Runs a 1-D line filter along rows, then along columns. Valid for any
/// reduction that factorizes over a rectangle (min, and mean because the
/// clamped window is a product of two intervals).
fn separable<S: Default>(
    map: &GrayMap,
    radius: usize,
    line: impl Fn(&[f64], usize, &mut [f64], &mut S),
) -> GrayMap {
    let (w, h) = map.dims();
    let src = map.values();
    let mut scratch = S::default();

    let mut rows = vec![0.0; w * h];
    for (src_row, dst_row) in src.chunks_exact(w).zip(rows.chunks_exact_mut(w)) {
        line(src_row, radius, dst_row, &mut scratch);
    }

    let mut out = vec![0.0; w * h];
    let mut col_in = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col_in[y] = rows[y * w + x];
        }
        line(&col_in, radius, &mut col_out, &mut scratch);
        for y in 0..h {
            out[y * w + x] = col_out[y];
        }
    }
    GrayMap::from_raw(w, h, out)
}

/// Minimum over the clamped `(2·radius + 1)²` window. `radius = 0` is the identity.
pub fn min_filter(map: &GrayMap, radius: usize) -> GrayMap {
    separable::<VecDeque<usize>>(map, radius, sliding_min_line)
}

/// Mean over the clamped `(2·radius + 1)²` window, normalized by the number
/// of pixels actually covered.
pub fn box_mean_filter(map: &GrayMap, radius: usize) -> GrayMap {
    separable::<Vec<f64>>(map, radius, sliding_mean_line)
}

fn zip_map(a: &GrayMap, b: &GrayMap, f: impl Fn(f64, f64) -> f64) -> GrayMap {
    let data = a.values().iter().zip(b.values()).map(|(&x, &y)| f(x, y)).collect();
    GrayMap::from_raw(a.width(), a.height(), data)
}

/// Single-channel guided filter.
///
/// Fits `input ≈ a·guide + b` in every window, then averages the
/// coefficients of all windows covering a pixel:
/// `q = mean(a)·guide + mean(b)`.
pub fn guided_filter(guide: &GrayMap, input: &GrayMap, params: FilterParams) -> Result<GrayMap> {
    params.validate()?;
    guide.ensure_same_dims(input.dims())?;
    let r = params.radius;

    let mean_i = box_mean_filter(guide, r);
    let mean_p = box_mean_filter(input, r);
    let corr_ii = box_mean_filter(&zip_map(guide, guide, |g, _| g * g), r);
    let corr_ip = box_mean_filter(&zip_map(guide, input, |g, p| g * p), r);

    let n = guide.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        let mi = mean_i.values()[k];
        let mp = mean_p.values()[k];
        let var = corr_ii.values()[k] - mi * mi;
        let cov = corr_ip.values()[k] - mi * mp;
        let ak = cov / (var + params.epsilon);
        a.push(ak);
        b.push(mp - ak * mi);
    }
    let (w, h) = guide.dims();
    let mean_a = box_mean_filter(&GrayMap::from_raw(w, h, a), r);
    let mean_b = box_mean_filter(&GrayMap::from_raw(w, h, b), r);

    let data = guide
        .values()
        .iter()
        .zip(mean_a.values().iter().zip(mean_b.values()))
        .map(|(&g, (&ma, &mb))| ma * g + mb)
        .collect();
    Ok(GrayMap::from_raw(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, f: impl FnMut(usize, usize) -> f64) -> GrayMap {
        GrayMap::from_fn(w, h, f).unwrap()
    }

    #[test]
    fn min_channel_picks_smallest() {
        let img = RgbImage::new(1, 1, vec![[0.9, 0.2, 0.7]]).unwrap();
        assert_eq!(min_channel(&img).values(), &[0.2]);
    }

    #[test]
    fn channel_mean_arithmetic() {
        let img = RgbImage::new(1, 1, vec![[0.3, 0.6, 0.9]]).unwrap();
        assert!((channel_mean(&img).values()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn constant_maps_are_fixed_points() {
        let m = GrayMap::filled(7, 5, 0.37).unwrap();
        assert_eq!(min_filter(&m, 2), m);
        for v in box_mean_filter(&m, 3).values() {
            assert!((v - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn min_filter_erodes_a_point() {
        let m = gray(7, 7, |x, y| if (x, y) == (3, 3) { 0.0 } else { 1.0 });
        let out = min_filter(&m, 1);
        for y in 0..7 {
            for x in 0..7 {
                let inside = (2..=4).contains(&x) && (2..=4).contains(&y);
                assert_eq!(out.get(x, y), if inside { 0.0 } else { 1.0 }, "({x},{y})");
            }
        }
    }

    #[test]
    fn box_mean_spreads_an_impulse() {
        let m = gray(7, 7, |x, y| if (x, y) == (3, 3) { 1.0 } else { 0.0 });
        let out = box_mean_filter(&m, 1);
        for y in 0..7 {
            for x in 0..7 {
                let inside = (2..=4).contains(&x) && (2..=4).contains(&y);
                let expect = if inside { 1.0 / 9.0 } else { 0.0 };
                assert!((out.get(x, y) - expect).abs() < 1e-15, "({x},{y})");
            }
        }
    }

    #[test]
    fn box_mean_border_uses_covered_area() {
        // corner window with radius 1 covers 4 pixels
        let m = gray(3, 3, |x, y| (x + 3 * y) as f64);
        let out = box_mean_filter(&m, 1);
        assert!((out.get(0, 0) - (0.0 + 1.0 + 3.0 + 4.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn guided_filter_keeps_constant_input() {
        let guide = gray(16, 12, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0);
        let input = GrayMap::filled(16, 12, 0.42).unwrap();
        let out = guided_filter(&guide, &input, FilterParams::new(3, 1e-3).unwrap()).unwrap();
        for v in out.values() {
            assert!((v - 0.42).abs() < 1e-12);
        }
    }

    #[test]
    fn guided_filter_self_guidance_limit() {
        let m = gray(20, 20, |x, y| ((x * 13 + y * 7) % 17) as f64 / 16.0);
        let out = guided_filter(&m, &m, FilterParams::new(2, 1e-9).unwrap()).unwrap();
        for (a, b) in out.values().iter().zip(m.values()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn guided_filter_rejects_mismatch_and_bad_params() {
        let a = GrayMap::filled(4, 4, 0.5).unwrap();
        let b = GrayMap::filled(4, 5, 0.5).unwrap();
        assert!(matches!(
            guided_filter(&a, &b, FilterParams::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(FilterParams::new(0, 1e-3).is_err());
        assert!(FilterParams::new(2, 0.0).is_err());
        let bad = FilterParams { radius: 2, epsilon: -1.0 };
        assert!(guided_filter(&a, &a, bad).is_err());
    }

    #[test]
    fn min_channel_below_mean() {
        let img = RgbImage::from_fn(5, 4, |x, y| [(x as f64) / 5.0, (y as f64) / 4.0, 0.5]).unwrap();
        let mc = min_channel(&img);
        let cm = channel_mean(&img);
        for (a, b) in mc.values().iter().zip(cm.values()) {
            assert!(a <= b);
        }
    }
}
