//! Haze-line clustering and the cluster-deviation metric `β`.
//!
//! Pixels are shifted by the airlight, expressed in spherical coordinates
//! around it, and grouped by direction: each group is one haze line. After
//! good haze removal the spread of colour-vector magnitudes along each line
//! changes, and `β` measures that change.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::dcp::Airlight;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::math::{compensated_sum, mean};

/// Pixels closer than this to the airlight have no direction.
pub const NULL_RADIUS: f64 = 1e-9;

/// `n` unit vectors on a golden-angle (Fibonacci) spiral.
pub fn fibonacci_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - libm::sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let phi = golden * i as f64;
            [r * libm::cos(phi), r * libm::sin(phi), z]
        })
        .collect()
}

/// `(r, φ, θ)` of a vector: magnitude, azimuth in `(−π, π]`, polar angle in `[0, π]`.
pub fn to_spherical(v: [f64; 3]) -> (f64, f64, f64) {
    let r = libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if r == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let phi = libm::atan2(v[1], v[0]);
    let theta = libm::acos((v[2] / r).clamp(-1.0, 1.0));
    (r, phi, theta)
}

pub fn from_angles(phi: f64, theta: f64) -> [f64; 3] {
    let s = libm::sin(theta);
    [s * libm::cos(phi), s * libm::sin(phi), libm::cos(theta)]
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone, Copy)]
struct Node {
    point: u32,
    axis: u8,
    left: Option<u32>,
    right: Option<u32>,
}

/// Static kd-tree over unit directions. Queries return the direction with
/// the largest dot product, ties to the lowest index.
#[derive(Debug, Clone)]
pub struct DirectionIndex {
    directions: Vec<[f64; 3]>,
    nodes: Vec<Node>,
    root: Option<u32>,
}

// plane-distance pruning slack against rounding in the chord distance
const PRUNE_SLACK: f64 = 1e-12;

impl DirectionIndex {
    pub fn new(directions: Vec<[f64; 3]>) -> Self {
        let mut order: Vec<u32> = (0..directions.len() as u32).collect();
        let mut nodes = Vec::with_capacity(directions.len());
        let root = Self::build(&directions, &mut order, &mut nodes);
        Self { directions, nodes, root }
    }

    #[allow(clippy::needless_range_loop)] // `a` indexes the coordinate, not `dirs`
    fn build(dirs: &[[f64; 3]], idx: &mut [u32], nodes: &mut Vec<Node>) -> Option<u32> {
        if idx.is_empty() {
            return None;
        }
        let mut axis = 0usize;
        let mut widest = f64::NEG_INFINITY;
        for a in 0..3 {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = dirs[i as usize][a];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            dirs[a as usize][axis].total_cmp(&dirs[b as usize][axis]).then(a.cmp(&b))
        });
        let slot = nodes.len();
        nodes.push(Node { point: idx[mid], axis: axis as u8, left: None, right: None });
        let (lower, rest) = idx.split_at_mut(mid);
        let left = Self::build(dirs, lower, nodes);
        let right = Self::build(dirs, &mut rest[1..], nodes);
        nodes[slot].left = left;
        nodes[slot].right = right;
        Some(slot as u32)
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    /// Index of the nearest direction to the unit vector `u`.
    pub fn nearest(&self, u: [f64; 3]) -> Option<usize> {
        let root = self.root?;
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        self.search(root, u, &mut best);
        Some(best.1)
    }

    fn search(&self, node: u32, u: [f64; 3], best: &mut (f64, usize)) {
        let n = self.nodes[node as usize];
        let p = self.directions[n.point as usize];
        let d = dot(u, p);
        let idx = n.point as usize;
        if d > best.0 || (d == best.0 && idx < best.1) {
            *best = (d, idx);
        }
        let diff = u[n.axis as usize] - p[n.axis as usize];
        let (near, far) = if diff < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        if let Some(c) = near {
            self.search(c, u, best);
        }
        if let Some(c) = far {
            let chord2 = (2.0 - 2.0 * best.0).max(0.0);
            if diff * diff <= chord2 + PRUNE_SLACK {
                self.search(c, u, best);
            }
        }
    }
}

/// Pixel→haze-line assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct HazeLineClustering {
    /// Cluster centres, unit vectors.
    pub directions: Vec<[f64; 3]>,
    /// Cluster of each pixel; `None` for pixels at the airlight itself.
    pub assignment: Vec<Option<u32>>,
    /// Pixels per cluster.
    pub counts: Vec<usize>,
}

impl HazeLineClustering {
    /// Builds a clustering from an explicit assignment, recomputing counts.
    pub fn from_assignment(directions: Vec<[f64; 3]>, assignment: Vec<Option<u32>>) -> Result<Self> {
        let mut counts = vec![0usize; directions.len()];
        for a in assignment.iter().flatten() {
            let slot = counts.get_mut(*a as usize).ok_or(Error::InvalidParameter {
                name: "assignment",
                value: *a as f64,
                expected: "< number of directions",
            })?;
            *slot += 1;
        }
        Ok(Self { directions, assignment, counts })
    }

    pub fn null_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }
}

/// Clusters pixels of `hazy` by the direction of `I − A`, using explicit
/// cluster centres.
pub fn cluster_haze_lines_with(hazy: &RgbImage, a: &Airlight, directions: Vec<[f64; 3]>) -> Result<HazeLineClustering> {
    if directions.is_empty() {
        return Err(Error::InvalidParameter { name: "n_directions", value: 0.0, expected: ">= 1" });
    }
    let index = DirectionIndex::new(directions);
    let ar = a.rgb();
    let assignment = hazy
        .pixels()
        .iter()
        .map(|p| {
            let shifted = [p[0] - ar[0], p[1] - ar[1], p[2] - ar[2]];
            let (r, phi, theta) = to_spherical(shifted);
            if r < NULL_RADIUS {
                return None;
            }
            index.nearest(from_angles(phi, theta)).map(|i| i as u32)
        })
        .collect();
    let DirectionIndex { directions, .. } = index;
    HazeLineClustering::from_assignment(directions, assignment)
}

/// Clusters over `n_directions` Fibonacci-lattice directions.
pub fn cluster_haze_lines(hazy: &RgbImage, a: &Airlight, n_directions: usize) -> Result<HazeLineClustering> {
    if n_directions < 2 {
        return Err(Error::InvalidParameter {
            name: "n_directions",
            value: n_directions as f64,
            expected: ">= 2",
        });
    }
    cluster_haze_lines_with(hazy, a, fibonacci_directions(n_directions))
}

/// Per-cluster standard deviations of `‖I − A‖` and `‖J − A‖` over the
/// clusters with at least `min_cluster` pixels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterDeviations {
    pub clusters: Vec<usize>,
    pub hazy: Vec<f64>,
    pub dehazed: Vec<f64>,
}

fn population_std(values: &[f64]) -> f64 {
    let m = mean(values.iter().copied());
    let ss = compensated_sum(values.iter().map(|v| (v - m) * (v - m)));
    libm::sqrt(ss / values.len() as f64)
}

pub fn cluster_deviations(
    hazy: &RgbImage,
    dehazed: &RgbImage,
    a: &Airlight,
    clustering: &HazeLineClustering,
    min_cluster: usize,
) -> Result<ClusterDeviations> {
    hazy.ensure_same_dims(dehazed.dims())?;
    if clustering.assignment.len() != hazy.len() {
        return Err(Error::InvalidParameter {
            name: "assignment",
            value: clustering.assignment.len() as f64,
            expected: "one entry per pixel",
        });
    }
    let ar = a.rgb();
    let norm = |p: [f64; 3]| {
        let d = [p[0] - ar[0], p[1] - ar[1], p[2] - ar[2]];
        libm::sqrt(dot(d, d))
    };
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); clustering.directions.len()];
    for (i, c) in clustering.assignment.iter().enumerate() {
        if let Some(c) = c {
            members[*c as usize].push(i);
        }
    }
    let mut out = ClusterDeviations::default();
    let mut mi = Vec::new();
    let mut mj = Vec::new();
    for (c, idx) in members.iter().enumerate() {
        if idx.len() < min_cluster.max(1) {
            continue;
        }
        mi.clear();
        mj.clear();
        mi.extend(idx.iter().map(|&i| norm(hazy.pixels()[i])));
        mj.extend(idx.iter().map(|&i| norm(dehazed.pixels()[i])));
        out.clusters.push(c);
        out.hazy.push(population_std(&mi));
        out.dehazed.push(population_std(&mj));
    }
    Ok(out)
}

/// Mean squared difference of paired deviations; `None` for an empty set.
pub fn beta_from_deviations(dev: &ClusterDeviations) -> Option<f64> {
    if dev.hazy.is_empty() {
        return None;
    }
    Some(mean(dev.hazy.iter().zip(&dev.dehazed).map(|(i, j)| (i - j) * (i - j))))
}

/// Haze-line metric `β` for a given airlight and cluster layout.
pub fn metric_beta_hl(
    hazy: &RgbImage,
    dehazed: &RgbImage,
    a: &Airlight,
    n_directions: usize,
    min_cluster: usize,
) -> Result<Option<f64>> {
    if min_cluster < 2 {
        return Err(Error::InvalidParameter {
            name: "min_cluster",
            value: min_cluster as f64,
            expected: ">= 2",
        });
    }
    hazy.ensure_same_dims(dehazed.dims())?;
    let clustering = cluster_haze_lines(hazy, a, n_directions)?;
    let dev = cluster_deviations(hazy, dehazed, a, &clustering, min_cluster)?;
    Ok(beta_from_deviations(&dev))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_directions_are_unit() {
        for d in fibonacci_directions(1000) {
            assert!((libm::sqrt(dot(d, d)) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn spherical_round_trip() {
        let v = [0.3, -0.4, 0.5];
        let (r, phi, theta) = to_spherical(v);
        let u = from_angles(phi, theta);
        for c in 0..3 {
            assert!((u[c] * r - v[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_image_is_one_cluster() {
        let img = RgbImage::filled(6, 6, [0.2, 0.3, 0.1]).unwrap();
        let a = Airlight::new([0.9, 0.9, 0.9]).unwrap();
        let cl = cluster_haze_lines(&img, &a, 500).unwrap();
        assert_eq!(cl.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(cl.counts.iter().sum::<usize>(), 36);
    }

    #[test]
    fn antipodal_populations_split() {
        let a = Airlight::new([0.5, 0.5, 0.5]).unwrap();
        let img = RgbImage::from_fn(4, 4, |x, _| if x < 2 { [0.8, 0.8, 0.8] } else { [0.2, 0.2, 0.2] }).unwrap();
        let s = 1.0 / libm::sqrt(3.0);
        let cl = cluster_haze_lines_with(&img, &a, vec![[s, s, s], [-s, -s, -s]]).unwrap();
        for (i, c) in cl.assignment.iter().enumerate() {
            assert_eq!(*c, Some(if i % 4 < 2 { 0 } else { 1 }));
        }
        assert_eq!(cl.counts, vec![8, 8]);
    }

    #[test]
    fn airlight_pixels_go_to_null_cluster() {
        let a = Airlight::new([0.5, 0.6, 0.7]).unwrap();
        let img = RgbImage::from_fn(3, 1, |x, _| if x == 1 { [0.5, 0.6, 0.7] } else { [0.1, 0.1, 0.1] }).unwrap();
        let cl = cluster_haze_lines(&img, &a, 10).unwrap();
        assert_eq!(cl.assignment[1], None);
        assert_eq!(cl.null_count(), 1);
    }

    #[test]
    fn beta_single_cluster_arithmetic() {
        let dev = ClusterDeviations { clusters: vec![0], hazy: vec![0.2], dehazed: vec![0.1] };
        assert!((beta_from_deviations(&dev).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(beta_from_deviations(&ClusterDeviations::default()), None);
    }

    #[test]
    fn parameter_checks() {
        let img = RgbImage::filled(4, 4, [0.2; 3]).unwrap();
        let a = Airlight::new([0.9; 3]).unwrap();
        assert!(cluster_haze_lines(&img, &a, 1).is_err());
        assert!(metric_beta_hl(&img, &img, &a, 100, 1).is_err());
        assert!(HazeLineClustering::from_assignment(vec![[1.0, 0.0, 0.0]], vec![Some(3)]).is_err());
    }
}
