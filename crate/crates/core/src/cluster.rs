//! Histogram clustering baseline: color histograms, k-means with k-means++
//! seeding, and variance-of-Laplacian sharpness to pick cluster
//! representatives.

use alloc::vec;
use alloc::vec::Vec;

use crate::frame::Frame;
use crate::rng::SplitMix64;

/// Bins per channel; the histogram has `BINS^3` cells.
pub const BINS: usize = 8;
pub const HISTOGRAM_LEN: usize = BINS * BINS * BINS;
pub const MAX_ITERATIONS: usize = 50;
pub const CONVERGENCE_SHIFT: f64 = 1e-6;

/// L1-normalized 8x8x8 RGB histogram. An empty frame yields all zeros.
pub fn color_histogram(frame: &Frame) -> Vec<f64> {
    let mut counts = vec![0u32; HISTOGRAM_LEN];
    for px in frame.pixels.chunks_exact(3) {
        let bin = (px[0] as usize >> 5) * BINS * BINS + (px[1] as usize >> 5) * BINS + (px[2] as usize >> 5);
        counts[bin] += 1;
    }
    let total = frame.pixel_count();
    if total == 0 {
        return vec![0.0; HISTOGRAM_LEN];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Variance of the 4-neighbour Laplacian response over interior pixels of
/// the grayscale frame. Frames smaller than 3x3 score 0.
pub fn laplacian_variance(frame: &Frame) -> f64 {
    let (w, h) = (frame.width as usize, frame.height as usize);
    if w < 3 || h < 3 {
        return 0.0;
    }
    let gray = frame.luma();
    let n = ((w - 2) * (h - 2)) as f64;
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let c = y * w + x;
            let r = gray[c - w] + gray[c + w] + gray[c - 1] + gray[c + 1] - 4.0 * gray[c];
            sum += r;
            sum_sq += r * r;
        }
    }
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// k-means++ seeding: the first center is uniform, later ones are drawn with
/// probability proportional to squared distance from the nearest chosen
/// center. When every point coincides with a center the draw is uniform.
fn seed_centers(points: &[Vec<f64>], k: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let n = points.len() as u64;
    let mut centers = vec![points[rng.below(n) as usize].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            rng.below(n) as usize
        };
        let c = points[pick].clone();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Lloyd iterations from k-means++ seeds. Returns the cluster of each point.
pub fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut SplitMix64) -> Vec<usize> {
    if points.is_empty() || k == 0 {
        return Vec::new();
    }
    let dim = points[0].len();
    let mut centers = seed_centers(points, k.min(points.len()), rng);
    for _ in 0..MAX_ITERATIONS {
        let labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        let mut sums = vec![vec![0.0f64; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut shift = 0.0f64;
        for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
            if count == 0 {
                continue;
            }
            let updated: Vec<f64> = sum.into_iter().map(|s| s / count as f64).collect();
            shift = shift.max(libm::sqrt(sq_dist(center, &updated)));
            *center = updated;
        }
        if shift < CONVERGENCE_SHIFT {
            break;
        }
    }
    points.iter().map(|p| nearest(p, &centers)).collect()
}

/// Positions (into `frames`) chosen by the clustering baseline, ascending.
///
/// Each non-empty cluster contributes its sharpest frame. If fewer than `k`
/// clusters are populated the remaining slots go to the sharpest frames not
/// yet chosen. Sharpness ties resolve to the earlier frame.
pub fn cluster_positions(frames: &[Frame], k: usize, seed: u64) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    if frames.len() <= k {
        return (0..frames.len()).collect();
    }
    let histograms: Vec<Vec<f64>> = frames.iter().map(color_histogram).collect();
    let sharpness: Vec<f64> = frames.iter().map(laplacian_variance).collect();
    let mut rng = SplitMix64::new(seed);
    let labels = kmeans(&histograms, k, &mut rng);

    let sharper = |a: usize, b: usize| sharpness[a] > sharpness[b];
    let mut best: Vec<Option<usize>> = vec![None; k];
    for (pos, &label) in labels.iter().enumerate() {
        match best[label] {
            Some(cur) if !sharper(pos, cur) => {}
            _ => best[label] = Some(pos),
        }
    }
    let mut chosen: Vec<usize> = best.into_iter().flatten().collect();
    if chosen.len() < k {
        let mut rest: Vec<usize> = (0..frames.len()).filter(|p| !chosen.contains(p)).collect();
        rest.sort_by(|&a, &b| sharpness[b].total_cmp(&sharpness[a]).then(a.cmp(&b)));
        chosen.extend(rest.into_iter().take(k - chosen.len()));
    }
    chosen.sort_unstable();
    chosen
}
