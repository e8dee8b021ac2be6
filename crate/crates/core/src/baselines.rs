//! Competing spectral embeddings for multilayer community detection and the
//! method registry shared by the harness and the CLI.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::KMeansConfig;
use crate::embed::{scaled_embedding, spherical, EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::joint::{
    check_layers, cluster_rows, concatenate, dcmase, embed_layer, DcMaseConfig, JointRank,
    LayerRanks,
};
use crate::linalg::{truncated_svd, Matrix};

/// Embedding of the average adjacency matrix `(1/L) Σ A^(l)`.
pub fn mean_adjacency_embed(layers: &[Matrix], k: usize) -> Result<EmbeddingMatrix> {
    check_layers(layers)?;
    let mut mean = layers[0].clone();
    for a in &layers[1..] {
        mean += a;
    }
    mean /= layers.len() as f64;
    scaled_embedding(&mean, k)
}

/// `Σ_l [(A^(l))² − D^(l)]`, where `D^(l)` holds the row sums of `A^(l)`.
pub fn bias_adjusted_sos_matrix(layers: &[Matrix]) -> Result<Matrix> {
    let n = check_layers(layers)?;
    let squares: Vec<Matrix> = layers
        .par_iter()
        .map(|a| {
            let mut sq = a * a;
            for i in 0..n {
                sq[(i, i)] -= a.row(i).sum();
            }
            sq
        })
        .collect();
    let mut total = Matrix::zeros(n, n);
    for s in squares {
        total += s;
    }
    // A² is symmetric in exact arithmetic; make it so bitwise.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (total[(i, j)] + total[(j, i)]);
            total[(i, j)] = v;
            total[(j, i)] = v;
        }
    }
    Ok(total)
}

pub fn bias_adjusted_sos_embed(layers: &[Matrix], k: usize) -> Result<EmbeddingMatrix> {
    scaled_embedding(&bias_adjusted_sos_matrix(layers)?, k)
}

/// Scaled MASE: leading left singular vectors of the concatenated per-layer
/// scaled embeddings, without row normalization.
pub fn mase_embed(
    layers: &[Matrix],
    per_layer_ranks: &LayerRanks,
    k: usize,
) -> Result<EmbeddingMatrix> {
    check_layers(layers)?;
    let ranks: Vec<Option<usize>> = match per_layer_ranks {
        LayerRanks::MatchK => vec![Some(k); layers.len()],
        LayerRanks::Auto => vec![None; layers.len()],
        LayerRanks::Uniform(r) => vec![Some(*r); layers.len()],
        LayerRanks::PerLayer(r) => {
            if r.len() != layers.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} per-layer ranks for {} layers",
                    r.len(),
                    layers.len()
                )));
            }
            r.iter().map(|x| Some(*x)).collect()
        }
    };
    let scree = (3 * k).max(6);
    let xs = layers
        .par_iter()
        .zip(ranks)
        .map(|(a, r)| embed_layer(a, r, scree).map(|e| e.scaled))
        .collect::<Result<Vec<_>>>()?;
    let svd = truncated_svd(&concatenate(&xs)?, k)?;
    Ok(EmbeddingMatrix::new(svd.left, EmbeddingKind::JointU))
}

/// Optional spherical normalization followed by k-means. Zero rows are left
/// out of k-means and attached to the nearest centroid.
pub fn baseline_cluster(
    embedding: &EmbeddingMatrix,
    k: usize,
    normalize: bool,
    cfg: &KMeansConfig,
) -> Result<Vec<usize>> {
    let (points, excluded) = if normalize {
        let y = spherical(embedding);
        let ex: Vec<usize> = y.zero_rows.iter().copied().collect();
        (y.rows, ex)
    } else {
        (embedding.rows.clone(), Vec::new())
    };
    Ok(cluster_rows(&points, k, &excluded, cfg)?.0)
}

/// Registered community-detection methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "dcmase")]
    DcMase,
    #[serde(rename = "mean_adj")]
    MeanAdj,
    #[serde(rename = "sos")]
    Sos,
    #[serde(rename = "mase")]
    Mase,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DcMase, Method::MeanAdj, Method::Sos, Method::Mase];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DcMase => "dcmase",
            Method::MeanAdj => "mean_adj",
            Method::Sos => "sos",
            Method::Mase => "mase",
        }
    }

    /// Estimate `k` communities from `layers`. Baselines embed into the joint
    /// rank of `cfg` (default `k`) and normalize rows when `normalize` is set.
    pub fn fit(
        self,
        layers: &[Matrix],
        k: usize,
        cfg: &DcMaseConfig,
        normalize: bool,
    ) -> Result<MethodFit> {
        if self == Method::DcMase {
            let fit = dcmase(layers, k, cfg)?;
            return Ok(MethodFit {
                labels: fit.labels,
                embedding: fit.joint.u,
            });
        }
        let n = check_layers(layers)?;
        if k == 0 || k > n {
            return Err(Error::TooManyClusters { k, n });
        }
        let dim = match cfg.joint_rank {
            JointRank::Fixed(d) => d,
            JointRank::MatchK | JointRank::Auto => k,
        };
        let embedding = match self {
            Method::MeanAdj => mean_adjacency_embed(layers, dim)?,
            Method::Sos => bias_adjusted_sos_embed(layers, dim)?,
            Method::Mase => mase_embed(layers, &cfg.layer_ranks, dim)?,
            Method::DcMase => unreachable!(),
        };
        let labels = baseline_cluster(&embedding, k, normalize, &cfg.kmeans)?;
        Ok(MethodFit { labels, embedding })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct MethodFit {
    pub labels: Vec<usize>,
    pub embedding: EmbeddingMatrix,
}
