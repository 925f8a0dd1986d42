#![allow(dead_code)]

use dehaze_core::{GrayMap, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> RgbImage {
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

pub fn random_map(rng: &mut impl Rng, w: usize, h: usize) -> GrayMap {
    GrayMap::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Haze-free, outdoor-like scene: blocky regions of saturated but fairly dark
/// colours, each with one channel near zero, plus mild texture.
pub fn outdoor_scene(rng: &mut impl Rng, w: usize, h: usize, block: usize) -> RgbImage {
    let bw = w.div_ceil(block);
    let bh = h.div_ceil(block);
    let palette: Vec<[f64; 3]> = (0..bw * bh)
        .map(|_| {
            let dark = rng.gen_range(0..3);
            let mut c = [0.0; 3];
            for (i, v) in c.iter_mut().enumerate() {
                *v = if i == dark { rng.gen_range(0.0..0.04) } else { rng.gen_range(0.08..0.4) };
            }
            c
        })
        .collect();
    let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-0.02..0.02)).collect();
    RgbImage::from_fn(w, h, |x, y| {
        let c = palette[(y / block) * bw + x / block];
        let n = noise[y * w + x];
        c.map(|v| (v + n).clamp(0.0, 1.0))
    })
    .unwrap()
}

pub fn mae(a: &RgbImage, b: &RgbImage) -> f64 {
    let s: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(p, q)| (0..3).map(|c| (p[c] - q[c]).abs()).sum::<f64>())
        .sum();
    s / (3 * a.len()) as f64
}

/// Clamped window `[i − r, i + r] ∩ [0, n)`.
pub fn span(i: usize, r: usize, n: usize) -> std::ops::RangeInclusive<usize> {
    i.saturating_sub(r)..=(i + r).min(n - 1)
}

pub fn naive_min(m: &GrayMap, r: usize) -> GrayMap {
    let (w, h) = m.dims();
    GrayMap::from_fn(w, h, |x, y| {
        let mut best = f64::INFINITY;
        for yy in span(y, r, h) {
            for xx in span(x, r, w) {
                best = best.min(m.get(xx, yy));
            }
        }
        best
    })
    .unwrap()
}

pub fn naive_mean(m: &GrayMap, r: usize) -> GrayMap {
    let (w, h) = m.dims();
    GrayMap::from_fn(w, h, |x, y| {
        let (mut s, mut n) = (0.0, 0usize);
        for yy in span(y, r, h) {
            for xx in span(x, r, w) {
                s += m.get(xx, yy);
                n += 1;
            }
        }
        s / n as f64
    })
    .unwrap()
}

/// Guided filter by direct per-window least squares: fit `p ≈ a·I + b` in
/// every window, then average the coefficients of all windows covering each
/// pixel.
pub fn naive_guided(guide: &GrayMap, input: &GrayMap, r: usize, eps: f64) -> GrayMap {
    let (w, h) = guide.dims();
    let mut a = vec![0.0; w * h];
    let mut b = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut pts = Vec::new();
            for yy in span(y, r, h) {
                for xx in span(x, r, w) {
                    pts.push((guide.get(xx, yy), input.get(xx, yy)));
                }
            }
            let n = pts.len() as f64;
            let mi = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let mp = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let var = pts.iter().map(|p| (p.0 - mi) * (p.0 - mi)).sum::<f64>() / n;
            let cov = pts.iter().map(|p| (p.0 - mi) * (p.1 - mp)).sum::<f64>() / n;
            let ak = cov / (var + eps);
            a[y * w + x] = ak;
            b[y * w + x] = mp - ak * mi;
        }
    }
    GrayMap::from_fn(w, h, |x, y| {
        let (mut sa, mut sb, mut n) = (0.0, 0.0, 0usize);
        for yy in span(y, r, h) {
            for xx in span(x, r, w) {
                sa += a[yy * w + xx];
                sb += b[yy * w + xx];
                n += 1;
            }
        }
        (sa / n as f64) * guide.get(x, y) + sb / n as f64
    })
    .unwrap()
}

/// Dark channel by a triple loop over window and channels.
pub fn naive_dark(img: &RgbImage, r: usize) -> GrayMap {
    let (w, h) = img.dims();
    GrayMap::from_fn(w, h, |x, y| {
        let mut best = f64::INFINITY;
        for yy in span(y, r, h) {
            for xx in span(x, r, w) {
                for c in img.get(xx, yy) {
                    best = best.min(c);
                }
            }
        }
        best
    })
    .unwrap()
}
