//! Weighted k-means over geographic points.
//!
//! Points are projected to an equirectangular plane (longitude scaled by the
//! cosine of the mean latitude) so plain Euclidean distance approximates
//! ground distance over island-sized extents.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seeding::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointTag {
    Destination,
    RoadSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint<T> {
    pub lat: T,
    pub lon: T,
    pub weight: T,
    pub tag: PointTag,
}

impl<T: Real> WeightedPoint<T> {
    pub fn new(lat: T, lon: T, weight: T, tag: PointTag) -> Self {
        WeightedPoint { lat, lon, weight, tag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions<T> {
    pub max_iter: usize,
    /// Stop once no centroid moves more than this (projected degrees).
    pub tol: T,
}

impl<T: Real> Default for KMeansOptions<T> {
    fn default() -> Self {
        KMeansOptions { max_iter: 100, tol: T::lit(1e-6) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult<T> {
    /// (lat, lon) degrees.
    pub centroids: Vec<(T, T)>,
    pub labels: Vec<usize>,
    pub iterations: usize,
    /// Weighted within-cluster sum of squares after each iteration.
    pub objective_trace: Vec<T>,
}

impl<T: Real> KMeansResult<T> {
    pub fn objective(&self) -> T {
        self.objective_trace.last().copied().unwrap_or_else(T::zero)
    }
}

struct Plane<T> {
    lon_scale: T,
}

impl<T: Real> Plane<T> {
    fn for_points(points: &[WeightedPoint<T>]) -> Self {
        let n = T::from_usize(points.len()).unwrap_or_else(T::one);
        let mean_lat = points.iter().fold(T::zero(), |a, p| a + p.lat) / n;
        Plane { lon_scale: mean_lat.to_radians().cos() }
    }

    fn project(&self, p: &WeightedPoint<T>) -> [T; 2] {
        [p.lon * self.lon_scale, p.lat]
    }

    fn unproject(&self, c: [T; 2]) -> (T, T) {
        (c[1], c[0] / self.lon_scale)
    }
}

fn sq_dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn nearest<T: Real>(p: [T; 2], centroids: &[[T; 2]]) -> (usize, T) {
    let mut best = (0, sq_dist(p, centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(p, *c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn sample_weighted<T: Real, R: Rng>(weights: &[T], rng: &mut R) -> usize {
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    let mut target = T::lit(rng.random::<f64>()) * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    weights.iter().rposition(|w| *w > T::zero()).unwrap_or(0)
}

fn distinct_count<T: Real>(xy: &[[T; 2]]) -> usize {
    let mut v: Vec<[T; 2]> = xy.to_vec();
    v.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    v.dedup();
    v.len()
}

/// Lloyd iterations from a weighted k-means++ start.
///
/// A cluster that loses all its members is re-seeded at the point farthest
/// from its current centroid.
pub fn kmeans<T: Real>(points: &[WeightedPoint<T>], k: usize, seed: u64, opts: &KMeansOptions<T>) -> Result<KMeansResult<T>> {
    if k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    if let Some(p) = points.iter().find(|p| !(p.weight > T::zero())) {
        return Err(Error::Input(format!("point weights must be positive, got {}", p.weight)));
    }
    let plane = Plane::for_points(points);
    let xy: Vec<[T; 2]> = points.iter().map(|p| plane.project(p)).collect();
    if distinct_count(&xy) < k {
        return Err(Error::Input(format!("k = {k} exceeds the number of distinct points")));
    }
    let w: Vec<T> = points.iter().map(|p| p.weight).collect();
    let mut rng = rng_from_seed(seed);

    // k-means++ with weights: P(i) ∝ w_i * D(i)^2.
    let mut centroids = vec![xy[sample_weighted(&w, &mut rng)]];
    while centroids.len() < k {
        let scores: Vec<T> = xy.iter().zip(&w).map(|(p, &wi)| wi * nearest(*p, &centroids).1).collect();
        centroids.push(xy[sample_weighted(&scores, &mut rng)]);
    }

    let mut labels = vec![0; points.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        for (i, p) in xy.iter().enumerate() {
            labels[i] = nearest(*p, &centroids).0;
        }
        let mut sums = vec![[T::zero(); 2]; k];
        let mut mass = vec![T::zero(); k];
        for (i, p) in xy.iter().enumerate() {
            let j = labels[i];
            sums[j][0] += w[i] * p[0];
            sums[j][1] += w[i] * p[1];
            mass[j] += w[i];
        }
        let mut shift = T::zero();
        for j in 0..k {
            let next = if mass[j] > T::zero() {
                [sums[j][0] / mass[j], sums[j][1] / mass[j]]
            } else {
                let far = (0..xy.len())
                    .max_by(|&a, &b| sq_dist(xy[a], centroids[labels[a]]).partial_cmp(&sq_dist(xy[b], centroids[labels[b]])).unwrap())
                    .expect("points are non-empty");
                labels[far] = j;
                xy[far]
            };
            shift = shift.max(sq_dist(next, centroids[j]).sqrt());
            centroids[j] = next;
        }
        let objective = xy.iter().zip(&w).zip(&labels).fold(T::zero(), |a, ((p, &wi), &l)| a + wi * sq_dist(*p, centroids[l]));
        trace.push(objective);
        if shift < opts.tol {
            break;
        }
    }
    // Final labels agree with the final centroids.
    for (i, p) in xy.iter().enumerate() {
        labels[i] = nearest(*p, &centroids).0;
    }

    Ok(KMeansResult {
        centroids: centroids.into_iter().map(|c| plane.unproject(c)).collect(),
        labels,
        iterations,
        objective_trace: trace,
    })
}

/// Best of `restarts` independent runs (seeds derived from `seed`), by final
/// objective. Ties keep the earliest restart.
pub fn kmeans_restarts<T: Real>(
    points: &[WeightedPoint<T>],
    k: usize,
    seed: u64,
    restarts: usize,
    opts: &KMeansOptions<T>,
) -> Result<KMeansResult<T>> {
    let mut best: Option<KMeansResult<T>> = None;
    for r in 0..restarts.max(1) {
        let run = kmeans(points, k, derive_seed(seed, r as u64), opts)?;
        if best.as_ref().is_none_or(|b| run.objective() < b.objective()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Weighted within-cluster sum of squares in the projected plane, for any labelling.
pub fn partition_objective<T: Real>(points: &[WeightedPoint<T>], labels: &[usize], k: usize) -> T {
    let plane = Plane::for_points(points);
    let xy: Vec<[T; 2]> = points.iter().map(|p| plane.project(p)).collect();
    let mut sums = vec![[T::zero(); 2]; k];
    let mut mass = vec![T::zero(); k];
    for (i, p) in xy.iter().enumerate() {
        sums[labels[i]][0] += points[i].weight * p[0];
        sums[labels[i]][1] += points[i].weight * p[1];
        mass[labels[i]] += points[i].weight;
    }
    let centers: Vec<[T; 2]> = (0..k)
        .map(|j| if mass[j] > T::zero() { [sums[j][0] / mass[j], sums[j][1] / mass[j]] } else { [T::zero(); 2] })
        .collect();
    xy.iter().zip(labels).zip(points).fold(T::zero(), |a, ((p, &l), pt)| a + pt.weight * sq_dist(*p, centers[l]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(lat: f64, lon: f64, w: f64) -> WeightedPoint<f64> {
        WeightedPoint::new(lat, lon, w, PointTag::RoadSample)
    }

    #[test]
    fn single_cluster_is_weighted_mean() {
        let pts = vec![pt(18.0, -66.0, 1.0), pt(18.2, -66.4, 3.0), pt(18.1, -66.1, 2.0)];
        let r = kmeans(&pts, 1, 1, &KMeansOptions::default()).unwrap();
        let (lat, lon) = r.centroids[0];
        assert!((lat - (18.0 * 1.0 + 18.2 * 3.0 + 18.1 * 2.0) / 6.0).abs() < 1e-12);
        assert!((lon - (-66.0 * 1.0 - 66.4 * 3.0 - 66.1 * 2.0) / 6.0).abs() < 1e-9);
        assert!(r.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn separated_clouds_split_cleanly() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(pt(18.0 + 0.001 * i as f64, -66.0, 1.0));
            pts.push(pt(18.5 + 0.001 * i as f64, -65.0, 1.0));
        }
        let r = kmeans(&pts, 2, 3, &KMeansOptions::default()).unwrap();
        for i in (0..10).step_by(2) {
            assert_eq!(r.labels[i], r.labels[0]);
            assert_ne!(r.labels[i + 1], r.labels[0]);
        }
    }

    #[test]
    fn too_many_clusters_is_rejected() {
        let pts = vec![pt(18.0, -66.0, 1.0), pt(18.0, -66.0, 2.0)];
        assert!(kmeans(&pts, 2, 0, &KMeansOptions::default()).is_err());
        assert!(kmeans(&pts, 0, 0, &KMeansOptions::default()).is_err());
        assert!(kmeans(&[pt(18.0, -66.0, 0.0)], 1, 0, &KMeansOptions::default()).is_err());
    }

    #[test]
    fn works_in_f32() {
        let pts: Vec<WeightedPoint<f32>> =
            (0..20).map(|i| WeightedPoint::new(18.0 + (i % 2) as f32, -66.0, 1.0, PointTag::RoadSample)).collect();
        let r = kmeans(&pts, 2, 5, &KMeansOptions::default()).unwrap();
        let mut lats: Vec<f32> = r.centroids.iter().map(|c| c.0).collect();
        lats.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((lats[0] - 18.0).abs() < 1e-5 && (lats[1] - 19.0).abs() < 1e-5);
    }

    fn cloud() -> impl Strategy<Value = Vec<WeightedPoint<f64>>> {
        proptest::collection::vec((17.9f64..18.6, -67.3f64..-65.6, 0.1f64..10.0), 6..40)
            .prop_map(|v| v.into_iter().map(|(a, b, w)| pt(a, b, w)).collect())
    }

    proptest! {
        #[test]
        fn objective_never_increases(pts in cloud(), k in 1usize..5, seed in any::<u64>()) {
            let r = kmeans(&pts, k, seed, &KMeansOptions::default()).unwrap();
            for w in r.objective_trace.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
            }
        }

        #[test]
        fn scaling_all_weights_changes_nothing(pts in cloud(), k in 1usize..4, seed in any::<u64>(), e in -6i32..6) {
            let scale = 2f64.powi(e);
            let scaled: Vec<_> = pts.iter().map(|p| pt(p.lat, p.lon, p.weight * scale)).collect();
            let a = kmeans(&pts, k, seed, &KMeansOptions::default()).unwrap();
            let b = kmeans(&scaled, k, seed, &KMeansOptions::default()).unwrap();
            prop_assert_eq!(&a.labels, &b.labels);
            prop_assert_eq!(&a.centroids, &b.centroids);
        }

        #[test]
        fn fixed_seed_is_bit_identical(pts in cloud(), k in 1usize..4, seed in any::<u64>()) {
            let a = kmeans(&pts, k, seed, &KMeansOptions::default()).unwrap();
            let b = kmeans(&pts, k, seed, &KMeansOptions::default()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
