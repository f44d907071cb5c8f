//! Cluster analysis by sampling random partitions.
//!
//! Partitions are drawn from the Ewens–Pitman attraction (EPA) distribution,
//! whose allocation probabilities favour subsets of items similar to the next
//! item. The draws are summarized in a pairwise similarity matrix, and a
//! greedy search finds the partition minimizing the expected Binder loss (or
//! a lower bound of the expected variation of information) under it. The
//! mass parameter is picked by maximizing the average silhouette over a
//! user-supplied range of cluster counts.
//!
//! ```
//! use caviarpd::{
//!     caviarpd_estimate, DistanceMatrix, EpaParams, MassSearchConfig, SearchConfig,
//! };
//!
//! let points = [0.0, 0.1, 0.2, 0.3, 5.0, 5.1, 5.2, 5.3];
//! let d = DistanceMatrix::from_points_1d(&points);
//! let msc = MassSearchConfig { k_min: 2, k_max: 3, samples_per_eval: 100, ..Default::default() };
//! let r = caviarpd_estimate(&d, &EpaParams::new(1.0), &msc, &SearchConfig::default()).unwrap();
//! assert_eq!(r.estimate.labels(), &[0, 0, 0, 0, 1, 1, 1, 1]);
//! ```

// NaN-rejecting checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod distance;
pub mod epa;
pub mod error;
pub mod loss;
pub mod mass;
pub mod parallel;
pub mod partition;
pub mod psm;
pub mod search;
pub mod seed;

#[cfg(feature = "cli")]
pub mod cli;

pub use baselines::{
    cut_dendrogram, hierarchical, pam, select_k_by_silhouette, BaselineMethod, Dendrogram, Linkage, PamResult,
};
pub use distance::{euclidean_distances, jaccard_distances, standardize, DataMatrix, DistanceMatrix};
pub use epa::{
    ddcrp_sample_many, epa_log_pmf, epa_sample_many, epa_sample_one, EpaParams, Permutation, SimilarityKind,
    SimilarityMatrix,
};
pub use error::{Error, Result};
pub use loss::{binder_between, expected_loss, vi_between, vi_between_base, LogBase, LossKind};
pub use mass::{
    average_silhouette, caviarpd_estimate, estimate_at_mass, mass_for_cluster_count, select_mass, CaviarResult,
    Distribution, MassSearchConfig,
};
pub use partition::Partition;
pub use psm::{pairwise_similarity, PairwiseSimilarityMatrix};
pub use search::{minimize_expected_loss, SearchConfig, SearchResult};
