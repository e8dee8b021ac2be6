//! Multilayer degree-corrected stochastic blockmodels and joint spectral
//! community detection.
//!
//! The main entry point is [`joint::dcmase`]: each layer is embedded with its
//! leading eigenvectors scaled by `|λ|^{1/2}`, the rows are projected onto the
//! unit sphere to cancel degree heterogeneity, the per-layer embeddings are
//! concatenated and reduced with a truncated SVD, and k-means on the rows of
//! the joint embedding gives the communities.

pub mod baselines;
pub mod cluster;
pub mod embed;
pub mod error;
pub mod estimation;
pub mod io;
pub mod joint;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sim;

pub use baselines::Method;
pub use cluster::{kmeans, ClusteringResult, KMeansConfig};
pub use embed::{scaled_embedding, spherical_normalize, EmbeddingKind, EmbeddingMatrix};
pub use error::{Error, Result};
pub use joint::{
    dcmase, joint_embed, select_rank_elbow, DcMaseConfig, DcMaseFit, JointEmbedding, JointRank,
    LayerRanks,
};
pub use linalg::{top_eigenpairs, truncated_svd, Matrix, SpectralDecomposition, SvdResult};
pub use metrics::{ari, misclustering_rate};
pub use model::{CommunityAssignment, EdgeMode, MultilayerModel};
