//! Plug-in parameter estimates given community memberships, and the
//! leave-one-layer-out reconstruction error used to compare memberships.
//!
//! Degree corrections are normalized so that they sum to the community size
//! within every community and layer. Under that constraint the expected
//! degrees determine `θ` and the block averages of the expectation determine
//! `B`; the estimator plugs the observed adjacency matrices into the same
//! identities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::Method;
use crate::error::{Error, Result};
use crate::joint::{check_layers, DcMaseConfig};
use crate::linalg::Matrix;
use crate::model::CommunityAssignment;

#[derive(Debug, Clone)]
pub struct FittedParameters {
    pub assignment: CommunityAssignment,
    pub theta: Vec<Vec<f64>>,
    pub blocks: Vec<Matrix>,
}

/// JSON export of [`FittedParameters`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedParametersJson {
    pub labels: Vec<usize>,
    pub k: usize,
    pub theta: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<f64>>>,
}

impl FittedParameters {
    pub fn layers(&self) -> usize {
        self.blocks.len()
    }

    pub fn to_json(&self) -> FittedParametersJson {
        FittedParametersJson {
            labels: self.assignment.labels().to_vec(),
            k: self.assignment.k(),
            theta: self.theta.clone(),
            b: self
                .blocks
                .iter()
                .map(|b| b.row_iter().map(|r| r.iter().cloned().collect()).collect())
                .collect(),
        }
    }

    /// Re-express the parameters with unit block diagonals
    /// (`B_rr = 1`), moving `√B_rr` into the degree corrections.
    pub fn to_unit_diagonal(&self) -> Result<Self> {
        let z = self.assignment.labels();
        let mut theta = self.theta.clone();
        let mut blocks = self.blocks.clone();
        for (l, b) in blocks.iter_mut().enumerate() {
            let diag: Vec<f64> = (0..b.nrows()).map(|r| b[(r, r)]).collect();
            if let Some(r) = diag.iter().position(|d| *d <= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "layer {l}: B[{r},{r}] must be positive for a unit-diagonal form"
                )));
            }
            let s: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    b[(r, c)] /= s[r] * s[c];
                }
            }
            for (i, t) in theta[l].iter_mut().enumerate() {
                *t *= s[z[i]];
            }
        }
        Ok(Self {
            assignment: self.assignment.clone(),
            theta,
            blocks,
        })
    }

    /// Rescale so degree corrections sum to the community size in every
    /// community, absorbing the factors into `B`.
    pub fn to_community_sums(&self) -> Self {
        let z = self.assignment.labels();
        let sizes = self.assignment.sizes();
        let k = self.assignment.k();
        let mut theta = self.theta.clone();
        let mut blocks = self.blocks.clone();
        for (l, b) in blocks.iter_mut().enumerate() {
            let mut mean = vec![0.0; k];
            for (i, t) in theta[l].iter().enumerate() {
                mean[z[i]] += t;
            }
            for r in 0..k {
                mean[r] /= sizes[r] as f64;
            }
            for (i, t) in theta[l].iter_mut().enumerate() {
                *t /= mean[z[i]];
            }
            for r in 0..k {
                for c in 0..k {
                    b[(r, c)] *= mean[r] * mean[c];
                }
            }
        }
        Self {
            assignment: self.assignment.clone(),
            theta,
            blocks,
        }
    }
}

fn check_assignment(n: usize, assignment: &CommunityAssignment) -> Result<()> {
    if assignment.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {n} vertices",
            assignment.n()
        )));
    }
    Ok(())
}

fn layer_estimates(
    a: &Matrix,
    layer: usize,
    assignment: &CommunityAssignment,
) -> Result<(Vec<f64>, Matrix)> {
    let n = a.nrows();
    let k = assignment.k();
    let z = assignment.labels();
    let sizes = assignment.sizes();
    let degrees: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    let mut community_degree = vec![0.0; k];
    let mut block_sum = Matrix::zeros(k, k);
    for i in 0..n {
        community_degree[z[i]] += degrees[i];
        for j in 0..n {
            block_sum[(z[i], z[j])] += a[(i, j)];
        }
    }
    if let Some(r) = community_degree.iter().position(|d| *d <= 0.0) {
        return Err(Error::ZeroDegreeCommunity {
            layer,
            community: r,
        });
    }
    let theta = (0..n)
        .map(|i| degrees[i] * sizes[z[i]] as f64 / community_degree[z[i]])
        .collect();
    let blocks = Matrix::from_fn(k, k, |r, s| {
        block_sum[(r, s)] / (sizes[r] * sizes[s]) as f64
    });
    Ok((theta, blocks))
}

/// Plug-in estimates of every layer's degree corrections and block matrix.
pub fn plugin_estimates(
    layers: &[Matrix],
    assignment: &CommunityAssignment,
) -> Result<FittedParameters> {
    let n = check_layers(layers)?;
    check_assignment(n, assignment)?;
    for (l, a) in layers.iter().enumerate() {
        if a.iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidModel(format!(
                "layer {l} has negative entries"
            )));
        }
    }
    let (theta, blocks) = layers
        .par_iter()
        .enumerate()
        .map(|(l, a)| layer_estimates(a, l, assignment))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(FittedParameters {
        assignment: assignment.clone(),
        theta,
        blocks,
    })
}

/// `P̂ = Θ̂ Z B̂ Zᵀ Θ̂` for layer `l`.
pub fn reconstruct_expectation(params: &FittedParameters, l: usize) -> Result<Matrix> {
    if l >= params.layers() {
        return Err(Error::DimensionMismatch(format!(
            "layer {l} requested from {} fitted layers",
            params.layers()
        )));
    }
    let z = params.assignment.labels();
    let t = &params.theta[l];
    let b = &params.blocks[l];
    let n = z.len();
    Ok(Matrix::from_fn(n, n, |i, j| t[i] * t[j] * b[(z[i], z[j])]))
}

/// `(1/n²) ‖A − P̂‖²_F` where `P̂` is the plug-in reconstruction of `a` under
/// `assignment`.
pub fn reconstruction_mse(a: &Matrix, assignment: &CommunityAssignment) -> Result<f64> {
    let params = plugin_estimates(std::slice::from_ref(a), assignment)?;
    let p = reconstruct_expectation(&params, 0)?;
    let n = a.nrows() as f64;
    Ok((a - p).norm_squared() / (n * n))
}

/// Out-of-sample error of layer `held_out`: memberships are fitted with
/// `method` on the remaining layers, then used to reconstruct the held-out one.
pub fn oos_mse(
    layers: &[Matrix],
    method: Method,
    k: usize,
    held_out: usize,
    cfg: &DcMaseConfig,
    normalize: bool,
) -> Result<f64> {
    check_layers(layers)?;
    if layers.len() < 2 {
        return Err(Error::Config(
            "out-of-sample error needs at least two layers".into(),
        ));
    }
    if held_out >= layers.len() {
        return Err(Error::DimensionMismatch(format!(
            "held-out layer {held_out} of {}",
            layers.len()
        )));
    }
    let training: Vec<Matrix> = layers
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != held_out)
        .map(|(_, a)| a.clone())
        .collect();
    // A layered config with explicit ranks would be misaligned after removal.
    let mut cfg = cfg.clone();
    if let crate::joint::LayerRanks::PerLayer(r) = &cfg.layer_ranks {
        let kept = r
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != held_out)
            .map(|(_, x)| *x)
            .collect();
        cfg.layer_ranks = crate::joint::LayerRanks::PerLayer(kept);
    }
    let fit = method.fit(&training, k, &cfg, normalize)?;
    let assignment = CommunityAssignment::from_raw_labels(&fit.labels)?;
    reconstruction_mse(&layers[held_out], &assignment)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OosRecord {
    pub k: usize,
    pub layer: usize,
    pub mse: f64,
}

/// The full `MSE(K, l)` table over `k_grid` and every layer.
pub fn oos_mse_table(
    layers: &[Matrix],
    method: Method,
    k_grid: &[usize],
    cfg: &DcMaseConfig,
    normalize: bool,
) -> Result<Vec<OosRecord>> {
    let cells: Vec<(usize, usize)> = k_grid
        .iter()
        .flat_map(|&k| (0..layers.len()).map(move |l| (k, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(k, layer)| {
            oos_mse(layers, method, k, layer, cfg, normalize).map(|mse| OosRecord { k, layer, mse })
        })
        .collect()
}
