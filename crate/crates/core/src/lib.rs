//! Comparison of crisp and fuzzy partitions.
//!
//! The crate covers the classical pair-counting indices (Rand, adjusted Rand,
//! Jaccard, Fowlkes-Mallows, Mirkin, Dice), the normalized degree of
//! concordance (NDC) between fuzzy partitions, and the adjusted concordance
//! index (ACI), which corrects the NDC for chance using its expectation under
//! a permutation null model. The clustering algorithms and simulation studies
//! needed to exercise these indices live in [`clustering`] and [`simulation`].
//!
//! ```
//! use concord_core::{aci, ExpectationConfig, FuzzyPartition};
//!
//! let p = FuzzyPartition::from_labels(&[0, 0, 1, 0]).unwrap();
//! let q = FuzzyPartition::from_labels(&[0, 1, 1, 0]).unwrap();
//! let res = aci(&p, &q, &ExpectationConfig::default()).unwrap();
//! assert!((res.ndc - 0.5).abs() < 1e-12);
//! assert!(res.aci.abs() < 1e-12);
//! ```

pub mod clustering;
pub mod concordance;
pub mod crisp;
mod error;
pub mod expectation;
pub mod io;
pub mod partition;
mod reduce;
pub mod rng;
pub mod simulation;

pub use clustering::{fcm, kmeans, pd_cluster, pd_membership, true_fuzzy_partition, ClusteringConfig, Dataset};
pub use concordance::{
    aci, cardinal_indices, concordance_degree, fuzzy_cardinals, ndc, CardinalIndices, ComparisonResult, PairCardinals,
    PerPairCardinals,
};
pub use crisp::{
    ari_cardinals, ari_contingency, pair_counts, pair_counts_scan, rand_index, related_indices, ContingencyTable,
    PairCounts,
};
pub use error::{Error, Result};
pub use expectation::{
    expected_ndc, expected_ndc_closed_form, expected_ndc_enumeration, expected_ndc_monte_carlo, ExpectationConfig,
    ExpectationMode, MonteCarloEstimate,
};
pub use partition::{
    equivalence_matrix, pair_count, pair_from_index, pair_index, CrispPartition, EquivalenceMatrix, FuzzyPartition,
    ROW_SUM_TOLERANCE,
};
pub use simulation::{gen_mixture, GaussianMixtureSpec, StudyResult};

/// Crate version embedded in serialized reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
