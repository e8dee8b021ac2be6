//! Joint embedding of the per-layer spherical embeddings and the full DC-MASE
//! pipeline, plus scree-plot rank selection.

use rayon::prelude::*;

use crate::cluster::{kmeans, nearest_centroid, ClusteringResult, KMeansConfig};
use crate::embed::{scale_eigenvectors, spherical, EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, top_eigenpairs, truncated_svd, Matrix, SYMMETRY_TOL};

/// Embedding rank of each layer in stage one.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum LayerRanks {
    /// Use the number of communities for every layer.
    #[default]
    MatchK,
    /// Pick each layer's rank at the elbow of its eigenvalue scree plot.
    Auto,
    Uniform(usize),
    PerLayer(Vec<usize>),
}

/// Dimension of the joint embedding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum JointRank {
    #[default]
    MatchK,
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Default)]
pub struct DcMaseConfig {
    pub layer_ranks: LayerRanks,
    pub joint_rank: JointRank,
    pub kmeans: KMeansConfig,
    /// Number of leading eigen/singular values inspected by the elbow rule;
    /// `None` means `max(3K, 6)`.
    pub scree_len: Option<usize>,
}

impl DcMaseConfig {
    fn scree_len(&self, k: usize) -> usize {
        self.scree_len.unwrap_or((3 * k).max(6))
    }
}

/// Leading left singular vectors of the concatenated spherical embeddings.
#[derive(Debug, Clone)]
pub struct JointEmbedding {
    pub u: EmbeddingMatrix,
    pub singular: Vec<f64>,
    pub per_layer_ranks: Vec<usize>,
    pub k_tilde: usize,
}

/// Horizontal concatenation of embeddings sharing the same row count.
pub fn concatenate(parts: &[EmbeddingMatrix]) -> Result<Matrix> {
    let first = parts.first().ok_or(Error::EmptyInput("no embeddings"))?;
    let n = first.n();
    if let Some(bad) = parts.iter().position(|p| p.n() != n) {
        return Err(Error::DimensionMismatch(format!(
            "embedding {bad} has {} rows, expected {n}",
            parts[bad].n()
        )));
    }
    let width = parts.iter().map(|p| p.dim()).sum();
    let mut out = Matrix::zeros(n, width);
    let mut col = 0;
    for p in parts {
        out.columns_mut(col, p.dim()).copy_from(&p.rows);
        col += p.dim();
    }
    Ok(out)
}

/// Top-`k_tilde` left singular vectors of `[Y^(1) … Y^(L)]`.
pub fn joint_embed(ys: &[EmbeddingMatrix], k_tilde: usize) -> Result<JointEmbedding> {
    let concat = concatenate(ys)?;
    let svd = truncated_svd(&concat, k_tilde)?;
    Ok(JointEmbedding {
        u: EmbeddingMatrix::new(svd.left, EmbeddingKind::JointU),
        singular: svd.singular,
        per_layer_ranks: ys.iter().map(|y| y.dim()).collect(),
        k_tilde,
    })
}

/// Within-segment sum of squares of `values[..q]` and `values[q..]`.
fn two_segment_ss(values: &[f64], q: usize) -> f64 {
    let ss = |seg: &[f64]| {
        if seg.is_empty() {
            return 0.0;
        }
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        seg.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
    };
    ss(&values[..q]) + ss(&values[q..])
}

/// Elbow of a scree plot by profile likelihood: the values are split into a
/// leading and a trailing segment, each Gaussian with its own mean and a shared
/// variance, and the split maximizing the likelihood wins. With a shared
/// variance this is the split minimizing the pooled within-segment sum of
/// squares. Ties go to the smallest rank, so a flat profile selects 1. The
/// result is capped at `max_rank`.
pub fn select_rank_elbow(values: &[f64], max_rank: usize) -> Result<usize> {
    if values.len() < 2 {
        return Err(Error::EmptyInput(
            "elbow selection needs at least two values",
        ));
    }
    let mut best = 1;
    let mut best_ss = two_segment_ss(values, 1);
    for q in 2..values.len() {
        let ss = two_segment_ss(values, q);
        if ss < best_ss {
            best_ss = ss;
            best = q;
        }
    }
    Ok(best.min(max_rank.max(1)))
}

/// Per-layer output of stage one.
#[derive(Debug, Clone)]
pub struct LayerEmbedding {
    pub scaled: EmbeddingMatrix,
    pub spherical: EmbeddingMatrix,
    pub eigenvalues: Vec<f64>,
}

/// Result of a DC-MASE fit.
#[derive(Debug, Clone)]
pub struct DcMaseFit {
    /// Cluster index in `0..K` per vertex.
    pub labels: Vec<usize>,
    pub joint: JointEmbedding,
    pub layers: Vec<LayerEmbedding>,
    pub clustering: ClusteringResult,
    /// Vertices with a zero joint row, assigned after clustering.
    pub isolated: Vec<usize>,
    pub warnings: Vec<String>,
}

fn resolve_layer_ranks(choice: &LayerRanks, layers: usize, k: usize) -> Result<Option<Vec<usize>>> {
    Ok(match choice {
        LayerRanks::MatchK => Some(vec![k; layers]),
        LayerRanks::Auto => None,
        LayerRanks::Uniform(r) => Some(vec![*r; layers]),
        LayerRanks::PerLayer(r) => {
            if r.len() != layers {
                return Err(Error::DimensionMismatch(format!(
                    "{} per-layer ranks for {layers} layers",
                    r.len()
                )));
            }
            Some(r.clone())
        }
    })
}

pub(crate) fn check_layers(layers: &[Matrix]) -> Result<usize> {
    let first = layers.first().ok_or(Error::EmptyInput("no layers"))?;
    let n = first.nrows();
    for (l, a) in layers.iter().enumerate() {
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "layer {l} is {}x{}, expected {n}x{n}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_symmetric(a, SYMMETRY_TOL)?;
    }
    Ok(n)
}

/// Stage one for one layer: scaled embedding of rank `rank`, or of the
/// elbow-selected rank among the leading `scree_len` eigenvalues.
pub fn embed_layer(a: &Matrix, rank: Option<usize>, scree_len: usize) -> Result<LayerEmbedding> {
    let n = a.nrows();
    let d = match rank {
        Some(r) => top_eigenpairs(a, r)?,
        None => {
            let window = scree_len.clamp(2, n.max(2)).min(n);
            let full = top_eigenpairs(a, window)?;
            let mags: Vec<f64> = full.values.iter().map(|v| v.abs()).collect();
            let r = if mags.len() < 2 {
                1
            } else {
                select_rank_elbow(&mags, window)?
            };
            top_eigenpairs(a, r)?
        }
    };
    let scaled = EmbeddingMatrix::new(scale_eigenvectors(&d), EmbeddingKind::ScaledX);
    let spherical = spherical(&scaled);
    Ok(LayerEmbedding {
        scaled,
        spherical,
        eigenvalues: d.values,
    })
}

/// Cluster the rows of `points` into `k` groups, leaving the rows listed in
/// `excluded` out of k-means and attaching each to its nearest centroid.
pub fn cluster_rows(
    points: &Matrix,
    k: usize,
    excluded: &[usize],
    cfg: &KMeansConfig,
) -> Result<(Vec<usize>, ClusteringResult)> {
    let n = points.nrows();
    let keep: Vec<usize> = (0..n)
        .filter(|i| excluded.binary_search(i).is_err())
        .collect();
    if keep.len() < k {
        // Not enough informative rows; cluster everything.
        let res = kmeans(points, k, cfg)?;
        return Ok((res.labels.clone(), res));
    }
    let sub = points.select_rows(&keep);
    let res = kmeans(&sub, k, cfg)?;
    let mut labels = vec![0; n];
    for (pos, &i) in keep.iter().enumerate() {
        labels[i] = res.labels[pos];
    }
    for &i in excluded {
        let row: Vec<f64> = points.row(i).iter().cloned().collect();
        labels[i] = nearest_centroid(&row, &res.centroids);
    }
    Ok((labels, res))
}

/// Degree-corrected multiple adjacency spectral embedding followed by k-means
/// on the rows of the joint embedding.
pub fn dcmase(layers: &[Matrix], k: usize, cfg: &DcMaseConfig) -> Result<DcMaseFit> {
    let n = check_layers(layers)?;
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let ranks = resolve_layer_ranks(&cfg.layer_ranks, layers.len(), k)?;
    let scree_len = cfg.scree_len(k);
    let stage1 = layers
        .par_iter()
        .enumerate()
        .map(|(l, a)| embed_layer(a, ranks.as_ref().map(|r| r[l]), scree_len))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<EmbeddingMatrix> = stage1.iter().map(|s| s.spherical.clone()).collect();
    let width: usize = ys.iter().map(|y| y.dim()).sum();
    let max_joint = width.min(n);

    let mut warnings = Vec::new();
    let k_tilde = match cfg.joint_rank {
        JointRank::MatchK => k.min(max_joint),
        JointRank::Fixed(r) => r,
        JointRank::Auto => {
            let full = truncated_svd(&concatenate(&ys)?, max_joint)?;
            let window = scree_len.min(full.singular.len());
            if window < 2 {
                1
            } else {
                select_rank_elbow(&full.singular[..window], window)?
            }
        }
    };
    if k_tilde < k {
        warnings.push(format!(
            "joint rank {k_tilde} is below the number of communities {k}"
        ));
    }
    let joint = joint_embed(&ys, k_tilde)?;

    // Vertices whose rows vanish in every layer carry no direction.
    let isolated: Vec<usize> = (0..n)
        .filter(|i| ys.iter().all(|y| y.zero_rows.contains(i)))
        .collect();
    if !isolated.is_empty() {
        warnings.push(format!(
            "{} vertices have zero embedding rows",
            isolated.len()
        ));
    }
    let (labels, clustering) = cluster_rows(&joint.u.rows, k, &isolated, &cfg.kmeans)?;
    Ok(DcMaseFit {
        labels,
        joint,
        layers: stage1,
        clustering,
        isolated,
        warnings,
    })
}
