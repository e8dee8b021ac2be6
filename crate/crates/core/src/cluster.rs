//! K-means with k-means++ seeding and multiple restarts.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iter: 300,
            tol: 1e-10,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub centroids: Matrix,
    /// Sum of squared distances to the assigned centroid.
    pub objective: f64,
    pub restarts_used: usize,
    pub seed: u64,
    /// Clusters that ended with no members.
    pub empty_clusters: Vec<usize>,
    /// Objective after each assignment step of the winning restart.
    pub history: Vec<f64>,
}

fn sq_dist(points: &Matrix, i: usize, centroids: &Matrix, c: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..points.ncols() {
        let d = points[(i, j)] - centroids[(c, j)];
        s += d * d;
    }
    s
}

fn plus_plus_init(points: &Matrix, k: usize, rng: &mut rng::Rng) -> Matrix {
    let (n, d) = points.shape();
    let mut centroids = Matrix::zeros(k, d);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from(&points.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in closest.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from(&points.row(pick));
        for (i, best) in closest.iter_mut().enumerate() {
            *best = best.min(sq_dist(points, i, &centroids, c));
        }
    }
    centroids
}

fn assign(points: &Matrix, centroids: &Matrix, labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let k = centroids.nrows();
    let mut total = 0.0;
    for i in 0..points.nrows() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let d = sq_dist(points, i, centroids, c);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
        total += best_d;
    }
    total
}

// Recompute means; an empty cluster is moved onto the point farthest from its
// current centroid.
fn update(points: &Matrix, labels: &[usize], dists: &mut [f64], centroids: &mut Matrix) {
    let (k, d) = centroids.shape();
    let mut counts = vec![0usize; k];
    let mut sums = Matrix::zeros(k, d);
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for j in 0..d {
            sums[(c, j)] += points[(i, j)];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..d {
                centroids[(c, j)] = sums[(c, j)] / counts[c] as f64;
            }
        } else {
            let far = (0..dists.len())
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                .unwrap_or(0);
            centroids.row_mut(c).copy_from(&points.row(far));
            dists[far] = 0.0;
        }
    }
}

struct Run {
    labels: Vec<usize>,
    centroids: Matrix,
    objective: f64,
    history: Vec<f64>,
}

fn lloyd(points: &Matrix, k: usize, cfg: &KMeansConfig, restart: usize) -> Run {
    let n = points.nrows();
    let mut rng = rng::stream(cfg.seed, &[restart as u64]);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![0; n];
    let mut prev_labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..cfg.max_iter.max(1) {
        let obj = assign(points, &centroids, &mut labels, &mut dists);
        let stalled = history
            .last()
            .is_some_and(|prev: &f64| prev - obj <= cfg.tol * prev.max(1.0));
        history.push(obj);
        let unchanged = labels == prev_labels;
        update(points, &labels, &mut dists, &mut centroids);
        if unchanged || stalled {
            break;
        }
        prev_labels.clone_from(&labels);
    }
    let objective = (0..n)
        .map(|i| sq_dist(points, i, &centroids, labels[i]))
        .sum();
    Run {
        labels,
        centroids,
        objective,
        history,
    }
}

/// Best of `cfg.restarts` k-means++ seeded Lloyd runs. The winner is the
/// lowest objective, ties going to the lowest restart index.
pub fn kmeans(points: &Matrix, k: usize, cfg: &KMeansConfig) -> Result<ClusteringResult> {
    let (n, d) = points.shape();
    if d == 0 {
        return Err(Error::EmptyInput("points have zero dimensions"));
    }
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    if cfg.restarts == 0 {
        return Err(Error::Config("k-means needs at least one restart".into()));
    }
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| lloyd(points, k, cfg, r))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.objective < a.objective { b } else { a })
        .expect("at least one restart");
    let mut counts = vec![0usize; k];
    for &l in &best.labels {
        counts[l] += 1;
    }
    Ok(ClusteringResult {
        empty_clusters: (0..k).filter(|&c| counts[c] == 0).collect(),
        labels: best.labels,
        centroids: best.centroids,
        objective: best.objective,
        restarts_used: cfg.restarts,
        seed: cfg.seed,
        history: best.history,
    })
}

/// Index of the nearest centroid (ties to the lowest index).
pub fn nearest_centroid(point: &[f64], centroids: &Matrix) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for c in 0..centroids.nrows() {
        let d: f64 = point
            .iter()
            .enumerate()
            .map(|(j, x)| (x - centroids[(c, j)]).powi(2))
            .sum();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_force_two_partition(points: &Matrix) -> f64 {
        let n = points.nrows();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << (n - 1)) {
            let mut obj = 0.0;
            for side in [true, false] {
                let members: Vec<usize> =
                    (0..n).filter(|i| ((mask >> i) & 1 == 1) == side).collect();
                if members.is_empty() {
                    continue;
                }
                for j in 0..points.ncols() {
                    let mean =
                        members.iter().map(|&i| points[(i, j)]).sum::<f64>() / members.len() as f64;
                    obj += members
                        .iter()
                        .map(|&i| (points[(i, j)] - mean).powi(2))
                        .sum::<f64>();
                }
            }
            best = best.min(obj);
        }
        best
    }

    #[test]
    fn separated_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 40;
        let points = Matrix::from_fn(n, 2, |i, _| {
            let centre = if i < n / 2 { 0.0 } else { 100.0 };
            centre + rng.random_range(-0.07..0.07)
        });
        let r = kmeans(&points, 2, &KMeansConfig::default()).unwrap();
        assert!(r.objective < n as f64 * 0.01);
        for i in 0..n {
            assert_eq!(r.labels[i] == r.labels[0], i < n / 2);
        }
        assert!(r.empty_clusters.is_empty());
    }

    #[test]
    fn identical_points_flag_empty_cluster() {
        let points = Matrix::from_element(6, 2, 1.5);
        let r = kmeans(&points, 2, &KMeansConfig::default()).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.empty_clusters.len(), 1);
    }

    #[test]
    fn matches_exhaustive_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let points = Matrix::from_fn(8, 2, |_, _| rng.random_range(-1.0..1.0));
        let r = kmeans(&points, 2, &KMeansConfig::default()).unwrap();
        assert!((r.objective - brute_force_two_partition(&points)).abs() < 1e-10);
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let points = Matrix::from_fn(120, 3, |_, _| rng.random_range(-1.0..1.0));
        let r = kmeans(
            &points,
            5,
            &KMeansConfig {
                restarts: 5,
                ..Default::default()
            },
        )
        .unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(r.objective <= *r.history.last().unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points = Matrix::from_fn(50, 2, |_, _| rng.random_range(-1.0..1.0));
        let cfg = KMeansConfig {
            restarts: 7,
            seed: 99,
            ..Default::default()
        };
        let a = kmeans(&points, 4, &cfg).unwrap();
        let b = kmeans(&points, 4, &cfg).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn errors() {
        let p = Matrix::zeros(3, 2);
        assert!(matches!(
            kmeans(&p, 4, &KMeansConfig::default()),
            Err(Error::TooManyClusters { .. })
        ));
        assert!(kmeans(&Matrix::zeros(3, 0), 2, &KMeansConfig::default()).is_err());
        let cfg = KMeansConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(kmeans(&p, 2, &cfg).is_err());
    }
}
