//! The multilayer degree-corrected stochastic blockmodel.
//!
//! Layer `l` has expectation `P = Θ Z B Zᵀ Θ` where `Θ = diag(theta[l])`, `Z` is
//! the shared membership matrix and `B = blocks[l]`. Self-loops are part of the
//! model, so the diagonal of `P` is populated as well.

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, symmetric_eigen, top_eigenpairs, Matrix};
use crate::rng;

/// Relative eigenvalue threshold for the numerical rank of a block matrix.
pub const RANK_TOL: f64 = 1e-8;

/// Default minimum row distance for [`check_identifiability`].
pub const IDENTIFIABILITY_TOL: f64 = 1e-6;

/// Community labels `0..k` for each vertex; every community is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AssignmentRepr", into = "AssignmentRepr")]
pub struct CommunityAssignment {
    labels: Vec<usize>,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct AssignmentRepr {
    labels: Vec<usize>,
    k: usize,
}

impl TryFrom<AssignmentRepr> for CommunityAssignment {
    type Error = Error;
    fn try_from(r: AssignmentRepr) -> Result<Self> {
        Self::new(r.labels, r.k)
    }
}

impl From<CommunityAssignment> for AssignmentRepr {
    fn from(a: CommunityAssignment) -> Self {
        AssignmentRepr {
            labels: a.labels,
            k: a.k,
        }
    }
}

impl CommunityAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput("assignment has no vertices"));
        }
        let mut seen = vec![false; k];
        for (i, &z) in labels.iter().enumerate() {
            if z >= k {
                return Err(Error::InvalidModel(format!(
                    "vertex {i} has label {z} outside 0..{k}"
                )));
            }
            seen[z] = true;
        }
        if let Some(r) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidModel(format!("community {r} is empty")));
        }
        Ok(Self { labels, k })
    }

    /// Relabel arbitrary ids to `0..k` in order of first appearance.
    pub fn from_raw_labels(raw: &[usize]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|z| {
                let next = map.len();
                *map.entry(*z).or_insert(next)
            })
            .collect();
        let k = map.len();
        Self::new(labels, k)
    }

    /// Contiguous blocks with the given sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let labels = sizes
            .iter()
            .enumerate()
            .flat_map(|(r, &s)| std::iter::repeat_n(r, s))
            .collect();
        Self::new(labels, sizes.len())
    }

    /// `n` vertices split into `k` contiguous, nearly equal blocks.
    pub fn balanced(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::TooManyClusters { k, n });
        }
        let sizes: Vec<usize> = (0..k).map(|r| n / k + usize::from(r < n % k)).collect();
        Self::from_sizes(&sizes)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &z in &self.labels {
            s[z] += 1;
        }
        s
    }

    pub fn members(&self, r: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.labels[i] == r).collect()
    }

    /// Binary `n x k` membership matrix `Z`.
    pub fn membership_matrix(&self) -> Matrix {
        let mut z = Matrix::zeros(self.n(), self.k);
        for (i, &r) in self.labels.iter().enumerate() {
            z[(i, r)] = 1.0;
        }
        z
    }
}

/// Edge distribution of a sampled layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMode {
    /// Binary edges; every expectation must lie in `[0, 1]`.
    #[default]
    Bernoulli,
    /// Integer edge counts with the expectation as mean.
    Poisson,
    /// Binary edges with probability `min(P, 1)`; expectations above one are
    /// allowed in the model and saturate when sampled.
    ClippedBernoulli,
}

impl EdgeMode {
    fn name(self) -> &'static str {
        match self {
            EdgeMode::Bernoulli => "bernoulli",
            EdgeMode::Poisson => "poisson",
            EdgeMode::ClippedBernoulli => "clipped_bernoulli",
        }
    }
}

/// Parameters of a multilayer DCSBM.
#[derive(Debug, Clone)]
pub struct MultilayerModel {
    assignment: CommunityAssignment,
    theta: Vec<Vec<f64>>,
    blocks: Vec<Matrix>,
    edge_mode: EdgeMode,
}

impl MultilayerModel {
    pub fn new(
        assignment: CommunityAssignment,
        theta: Vec<Vec<f64>>,
        blocks: Vec<Matrix>,
        edge_mode: EdgeMode,
    ) -> Result<Self> {
        let (n, k) = (assignment.n(), assignment.k());
        if theta.is_empty() {
            return Err(Error::InvalidModel("model has no layers".into()));
        }
        if theta.len() != blocks.len() {
            return Err(Error::InvalidModel(format!(
                "{} degree-correction vectors but {} block matrices",
                theta.len(),
                blocks.len()
            )));
        }
        for (l, t) in theta.iter().enumerate() {
            if t.len() != n {
                return Err(Error::InvalidModel(format!(
                    "layer {l}: theta has length {} (n = {n})",
                    t.len()
                )));
            }
            if let Some(i) = t.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidModel(format!(
                    "layer {l}: theta[{i}] = {} is not positive",
                    t[i]
                )));
            }
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.shape() != (k, k) {
                return Err(Error::InvalidModel(format!(
                    "layer {l}: block matrix is {}x{} (K = {k})",
                    b.nrows(),
                    b.ncols()
                )));
            }
            check_symmetric(b, 1e-12)?;
            if b.iter().any(|x| *x <= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "layer {l}: block matrix entries must be positive"
                )));
            }
        }
        let model = Self {
            assignment,
            theta,
            blocks,
            edge_mode,
        };
        if edge_mode == EdgeMode::Bernoulli {
            for l in 0..model.layers() {
                model.expected_matrix(l)?;
            }
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.assignment.n()
    }

    pub fn k(&self) -> usize {
        self.assignment.k()
    }

    pub fn layers(&self) -> usize {
        self.blocks.len()
    }

    pub fn assignment(&self) -> &CommunityAssignment {
        &self.assignment
    }

    pub fn theta(&self, l: usize) -> &[f64] {
        &self.theta[l]
    }

    pub fn block(&self, l: usize) -> &Matrix {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn edge_mode(&self) -> EdgeMode {
        self.edge_mode
    }

    /// Same parameters under a different edge distribution.
    pub fn with_edge_mode(self, edge_mode: EdgeMode) -> Result<Self> {
        Self::new(self.assignment, self.theta, self.blocks, edge_mode)
    }

    fn expectation_unchecked(&self, l: usize) -> Matrix {
        let z = self.assignment.labels();
        let t = &self.theta[l];
        let b = &self.blocks[l];
        Matrix::from_fn(self.n(), self.n(), |i, j| t[i] * t[j] * b[(z[i], z[j])])
    }

    /// Expected adjacency matrix of layer `l`, diagonal included.
    pub fn expected_matrix(&self, l: usize) -> Result<Matrix> {
        if l >= self.layers() {
            return Err(Error::DimensionMismatch(format!(
                "layer {l} requested from a {}-layer model",
                self.layers()
            )));
        }
        let p = self.expectation_unchecked(l);
        if self.edge_mode == EdgeMode::Bernoulli {
            check_means(&p, l, EdgeMode::Bernoulli)?;
        }
        Ok(p)
    }

    pub fn expected_matrices(&self) -> Result<Vec<Matrix>> {
        (0..self.layers())
            .map(|l| self.expected_matrix(l))
            .collect()
    }

    /// Mean expected degree (row sum) of layer `l`.
    pub fn mean_degree(&self, l: usize) -> f64 {
        let p = self.expectation_unchecked(l);
        p.sum() / self.n() as f64
    }

    /// Scale every layer so its mean expected degree equals `target`. The
    /// per-layer factor `α` enters each degree correction as `√α`.
    pub fn rescale_to_average_degree(&self, target: f64) -> Result<Self> {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::InvalidModel(format!(
                "target degree {target} must be positive"
            )));
        }
        let theta = (0..self.layers())
            .map(|l| {
                let alpha = target / self.mean_degree(l);
                let s = alpha.sqrt();
                self.theta[l].iter().map(|t| t * s).collect()
            })
            .collect();
        Self::new(
            self.assignment.clone(),
            theta,
            self.blocks.clone(),
            self.edge_mode,
        )
    }

    /// Independent draws of every layer; layer `l` of replication `rep` is
    /// seeded from `(seed, rep, l)`.
    pub fn sample(&self, seed: u64, rep: u64) -> Result<Vec<Matrix>> {
        (0..self.layers())
            .into_par_iter()
            .map(|l| {
                let p = self.expectation_unchecked(l);
                sample_layer(&p, self.edge_mode, rng::derive_seed(seed, &[rep, l as u64]))
            })
            .collect()
    }

    pub fn to_descriptor(&self) -> ModelDescriptor {
        ModelDescriptor {
            n: self.n(),
            k: self.k(),
            l: self.layers(),
            labels: self.assignment.labels().to_vec(),
            theta: self.theta.clone(),
            b: self
                .blocks
                .iter()
                .map(|b| {
                    (0..b.nrows())
                        .map(|i| b.row(i).iter().cloned().collect())
                        .collect()
                })
                .collect(),
            edge_mode: self.edge_mode,
        }
    }

    pub fn from_descriptor(d: ModelDescriptor) -> Result<Self> {
        if d.labels.len() != d.n {
            return Err(Error::InvalidModel(format!(
                "labels has length {} (n = {})",
                d.labels.len(),
                d.n
            )));
        }
        if d.theta.len() != d.l || d.b.len() != d.l {
            return Err(Error::InvalidModel(format!(
                "expected {} layers of theta and b",
                d.l
            )));
        }
        let blocks =
            d.b.iter()
                .enumerate()
                .map(|(l, rows)| {
                    if rows.len() != d.k || rows.iter().any(|r| r.len() != d.k) {
                        return Err(Error::InvalidModel(format!(
                            "layer {l}: b must be {0}x{0}",
                            d.k
                        )));
                    }
                    Ok(Matrix::from_fn(d.k, d.k, |i, j| rows[i][j]))
                })
                .collect::<Result<Vec<_>>>()?;
        let assignment = CommunityAssignment::new(d.labels, d.k)?;
        Self::new(assignment, d.theta, blocks, d.edge_mode)
    }
}

/// JSON form of a [`MultilayerModel`]; labels are 0-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub labels: Vec<usize>,
    pub theta: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub edge_mode: EdgeMode,
}

fn check_means(p: &Matrix, layer: usize, mode: EdgeMode) -> Result<()> {
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            let v = p[(i, j)];
            let ok = match mode {
                EdgeMode::Bernoulli => (0.0..=1.0).contains(&v),
                EdgeMode::Poisson | EdgeMode::ClippedBernoulli => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(Error::InvalidProbability {
                    layer,
                    row: i,
                    col: j,
                    value: v,
                    mode: mode.name(),
                });
            }
        }
    }
    Ok(())
}

/// Draw one symmetric layer with independent entries on and above the
/// diagonal, mirrored below it.
pub fn sample_layer(p: &Matrix, mode: EdgeMode, seed: u64) -> Result<Matrix> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare {
            rows: p.nrows(),
            cols: p.ncols(),
        });
    }
    check_means(p, 0, mode)?;
    let n = p.nrows();
    let mut rng = rng::stream(seed, &[]);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mean = p[(i, j)];
            let x = match mode {
                EdgeMode::Bernoulli | EdgeMode::ClippedBernoulli => {
                    let u: f64 = rng.random();
                    if u < mean.min(1.0) {
                        1.0
                    } else {
                        0.0
                    }
                }
                EdgeMode::Poisson => {
                    if mean > 0.0 {
                        Poisson::new(mean)
                            .map_err(|e| Error::InvalidModel(e.to_string()))?
                            .sample(&mut rng)
                    } else {
                        0.0
                    }
                }
            };
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    Ok(a)
}

/// Outcome of the identifiability test.
#[derive(Debug, Clone)]
pub struct Identifiability {
    pub identifiable: bool,
    /// First pair of communities whose joint rows coincide.
    pub witness: Option<(usize, usize)>,
    /// Row-normalized concatenation `[Q^(1) … Q^(L)]`.
    pub q: Matrix,
    pub ranks: Vec<usize>,
}

/// Numerical rank and the eigenvectors spanning the column space of a
/// symmetric block matrix.
pub fn block_eigenbasis(b: &Matrix) -> Result<(usize, Matrix)> {
    let k = b.nrows();
    let d = top_eigenpairs(b, k)?;
    let lead = d.values[0].abs();
    let rank = d
        .values
        .iter()
        .filter(|v| v.abs() > RANK_TOL * lead)
        .count();
    Ok((rank, d.vectors.columns(0, rank).into_owned()))
}

/// Communities are identifiable iff the row-normalized joint eigenvector
/// matrix `Q` has pairwise distinct rows (distance above `tol`).
pub fn check_identifiability(blocks: &[Matrix], tol: f64) -> Result<Identifiability> {
    let first = blocks
        .first()
        .ok_or(Error::EmptyInput("no block matrices"))?;
    let k = first.nrows();
    let mut parts = Vec::with_capacity(blocks.len());
    let mut ranks = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "block matrices must all be {k}x{k}"
            )));
        }
        let (rank, mut v) = block_eigenbasis(b)?;
        for mut row in v.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        ranks.push(rank);
        parts.push(v);
    }
    let width: usize = ranks.iter().sum();
    let mut q = Matrix::zeros(k, width);
    let mut col = 0;
    for v in &parts {
        q.columns_mut(col, v.ncols()).copy_from(v);
        col += v.ncols();
    }
    let mut witness = None;
    'outer: for r in 0..k {
        for s in (r + 1)..k {
            if (q.row(r) - q.row(s)).norm() <= tol {
                witness = Some((r, s));
                break 'outer;
            }
        }
    }
    Ok(Identifiability {
        identifiable: witness.is_none(),
        witness,
        q,
        ranks,
    })
}

/// Population-level separation and error-scale quantities of a model.
#[derive(Debug, Clone, Serialize)]
pub struct PopulationDiagnostics {
    /// `|λ_K(B^(l))|` per layer.
    pub lambda_min: Vec<f64>,
    pub lambda_bar: f64,
    pub snr: Vec<f64>,
    pub err_ave: Vec<f64>,
    pub err_max: Vec<f64>,
}

/// Smallest-magnitude eigenvalue of a full-rank block matrix.
pub fn lambda_min(b: &Matrix, layer: usize) -> Result<f64> {
    let k = b.nrows();
    let (vals, _) = symmetric_eigen(b)?;
    let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let rank = mags.iter().filter(|m| **m > RANK_TOL * mags[0]).count();
    if rank < k {
        return Err(Error::RankDeficient { layer, rank, k });
    }
    Ok(mags[k - 1])
}

pub fn population_diagnostics(model: &MultilayerModel) -> Result<PopulationDiagnostics> {
    let layers = model.layers();
    let n = model.n();
    let lambda_min = (0..layers)
        .map(|l| lambda_min(model.block(l), l))
        .collect::<Result<Vec<_>>>()?;
    let lambda_bar = lambda_min.iter().sum::<f64>() / layers as f64;

    struct LayerStats {
        norm2: f64,
        cube_sum: f64,
        min: f64,
        max: f64,
    }
    let stats: Vec<LayerStats> = (0..layers)
        .map(|l| {
            let t = model.theta(l);
            LayerStats {
                norm2: t.iter().map(|x| x * x).sum::<f64>(),
                cube_sum: t.iter().map(|x| x * x * x).sum(),
                min: t.iter().cloned().fold(f64::INFINITY, f64::min),
                max: t.iter().cloned().fold(0.0, f64::max),
            }
        })
        .collect();

    let snr = stats
        .iter()
        .zip(&lambda_min)
        .map(|(s, lm)| (s.min / s.max).sqrt() * lm.sqrt() * s.norm2.sqrt())
        .collect();
    let mut err_ave = vec![0.0; n];
    let mut err_max = vec![0.0f64; n];
    for i in 0..n {
        for (l, s) in stats.iter().enumerate() {
            let ti = model.theta(l)[i];
            let lm = lambda_min[l];
            err_ave[i] += s.cube_sum / (ti * s.norm2 * s.norm2 * lm);
            err_max[i] = err_max[i].max(s.max / (ti * s.norm2 * lm.sqrt()));
        }
        err_ave[i] /= layers as f64;
    }
    Ok(PopulationDiagnostics {
        lambda_min,
        lambda_bar,
        snr,
        err_ave,
        err_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_block() -> Matrix {
        Matrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0])
    }

    #[test]
    fn assignment_validation() {
        assert!(CommunityAssignment::new(vec![0, 0, 2], 3).is_err());
        assert!(CommunityAssignment::new(vec![0, 3], 2).is_err());
        let a = CommunityAssignment::from_raw_labels(&[7, 7, 3, 9]).unwrap();
        assert_eq!(a.labels(), &[0, 0, 1, 2]);
        assert_eq!(
            CommunityAssignment::balanced(7, 3).unwrap().sizes(),
            vec![3, 2, 2]
        );
    }

    #[test]
    fn expected_matrix_examples() {
        let m = MultilayerModel::new(
            CommunityAssignment::new(vec![0, 0], 1).unwrap(),
            vec![vec![1.0, 1.0]],
            vec![Matrix::from_element(1, 1, 1.0)],
            EdgeMode::Bernoulli,
        )
        .unwrap();
        assert_eq!(
            m.expected_matrix(0).unwrap(),
            Matrix::from_element(2, 2, 1.0)
        );

        let m = MultilayerModel::new(
            CommunityAssignment::new(vec![0, 1], 2).unwrap(),
            vec![vec![0.5, 0.5]],
            vec![two_block()],
            EdgeMode::Bernoulli,
        )
        .unwrap();
        let p = m.expected_matrix(0).unwrap();
        let want = Matrix::from_row_slice(2, 2, &[0.25, 0.10, 0.10, 0.25]);
        assert!((p - want).amax() < 1e-15);
        assert!(m.expected_matrix(1).is_err());
    }

    #[test]
    fn bernoulli_rejects_large_means() {
        let r = MultilayerModel::new(
            CommunityAssignment::new(vec![0, 1], 2).unwrap(),
            vec![vec![2.0, 2.0]],
            vec![two_block()],
            EdgeMode::Bernoulli,
        );
        assert!(matches!(r, Err(Error::InvalidProbability { .. })));
        let ok = MultilayerModel::new(
            CommunityAssignment::new(vec![0, 1], 2).unwrap(),
            vec![vec![2.0, 2.0]],
            vec![two_block()],
            EdgeMode::Poisson,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        let a = CommunityAssignment::new(vec![0, 1], 2).unwrap();
        assert!(MultilayerModel::new(
            a.clone(),
            vec![vec![0.0, 0.5]],
            vec![two_block()],
            EdgeMode::Poisson
        )
        .is_err());
        let bad = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(
            MultilayerModel::new(a, vec![vec![0.5, 0.5]], vec![bad], EdgeMode::Poisson).is_err()
        );
    }

    #[test]
    fn rescale_halves_and_identity() {
        let m = MultilayerModel::new(
            CommunityAssignment::balanced(40, 2).unwrap(),
            vec![vec![1.0; 40]],
            vec![two_block()],
            EdgeMode::Poisson,
        )
        .unwrap();
        let d = m.mean_degree(0);
        let half = m.rescale_to_average_degree(d / 2.0).unwrap();
        let ratio = half
            .expected_matrix(0)
            .unwrap()
            .component_div(&m.expected_matrix(0).unwrap());
        assert!(ratio.iter().all(|r| (r - 0.5).abs() < 1e-12));
        let same = m.rescale_to_average_degree(d).unwrap();
        assert!((same.expected_matrix(0).unwrap() - m.expected_matrix(0).unwrap()).amax() < 1e-12);
        assert!(m.rescale_to_average_degree(-1.0).is_err());
    }

    #[test]
    fn rescale_infeasible_in_bernoulli() {
        let m = MultilayerModel::new(
            CommunityAssignment::balanced(4, 2).unwrap(),
            vec![vec![0.5; 4]],
            vec![two_block()],
            EdgeMode::Bernoulli,
        )
        .unwrap();
        assert!(matches!(
            m.rescale_to_average_degree(10.0),
            Err(Error::InvalidProbability { .. })
        ));
    }

    #[test]
    fn sampling_degenerate_cases() {
        let z = sample_layer(&Matrix::zeros(5, 5), EdgeMode::Bernoulli, 3).unwrap();
        assert_eq!(z, Matrix::zeros(5, 5));
        let ones = Matrix::from_element(5, 5, 1.0);
        assert_eq!(sample_layer(&ones, EdgeMode::Bernoulli, 3).unwrap(), ones);
        assert_eq!(
            sample_layer(&Matrix::zeros(3, 3), EdgeMode::Poisson, 1).unwrap(),
            Matrix::zeros(3, 3)
        );
        let over = Matrix::from_element(3, 3, 1.5);
        assert!(sample_layer(&over, EdgeMode::Bernoulli, 1).is_err());
        assert_eq!(
            sample_layer(&over, EdgeMode::ClippedBernoulli, 1).unwrap(),
            Matrix::from_element(3, 3, 1.0)
        );
        assert!(sample_layer(&Matrix::from_element(2, 2, -0.1), EdgeMode::Poisson, 1).is_err());
    }

    #[test]
    fn identifiability_examples() {
        let ones = Matrix::from_element(2, 2, 1.0);
        let r = check_identifiability(std::slice::from_ref(&ones), IDENTIFIABILITY_TOL).unwrap();
        assert!(!r.identifiable);
        assert_eq!(r.witness, Some((0, 1)));
        assert_eq!(r.ranks, vec![1]);

        let r = check_identifiability(&[two_block()], IDENTIFIABILITY_TOL).unwrap();
        assert!(r.identifiable);

        let r =
            check_identifiability(&[ones, Matrix::identity(2, 2)], IDENTIFIABILITY_TOL).unwrap();
        assert!(r.identifiable);
        assert_eq!(r.ranks, vec![1, 2]);
    }

    #[test]
    fn lambda_min_two_by_two() {
        let b = Matrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        assert_abs_diff_eq!(lambda_min(&b, 0).unwrap(), 0.4, epsilon = 1e-12);
        assert!(matches!(
            lambda_min(&Matrix::from_element(2, 2, 1.0), 3),
            Err(Error::RankDeficient {
                layer: 3,
                rank: 1,
                k: 2
            })
        ));
    }

    #[test]
    fn snr_collapses_for_constant_theta() {
        let (n, c) = (30, 0.3);
        let b = Matrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        let m = MultilayerModel::new(
            CommunityAssignment::balanced(n, 2).unwrap(),
            vec![vec![c; n]],
            vec![b],
            EdgeMode::Bernoulli,
        )
        .unwrap();
        let d = population_diagnostics(&m).unwrap();
        assert_abs_diff_eq!(
            d.snr[0],
            0.4f64.sqrt() * c * (n as f64).sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(d.lambda_bar, 0.4, epsilon = 1e-12);
        assert!(d.err_ave.iter().chain(&d.err_max).all(|e| *e > 0.0));
    }

    #[test]
    fn descriptor_round_trip() {
        let m = MultilayerModel::new(
            CommunityAssignment::new(vec![0, 1, 1], 2).unwrap(),
            vec![vec![0.5, 0.4, 0.3], vec![0.1, 0.2, 0.3]],
            vec![
                two_block(),
                Matrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.8]),
            ],
            EdgeMode::Poisson,
        )
        .unwrap();
        let json = serde_json::to_string(&m.to_descriptor()).unwrap();
        let back = MultilayerModel::from_descriptor(serde_json::from_str(&json).unwrap()).unwrap();
        for l in 0..2 {
            assert_eq!(
                back.expected_matrix(l).unwrap(),
                m.expected_matrix(l).unwrap()
            );
        }
        assert_eq!(back.edge_mode(), EdgeMode::Poisson);
        let bad = json.replace("\"n\"", "\"nn\"");
        assert!(serde_json::from_str::<ModelDescriptor>(&bad).is_err());
    }
}
