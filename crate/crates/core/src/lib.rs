//! Weighted three-hop link prediction for sparse, hub-dominated networks.
//!
//! The crate provides the H3 index (a path-by-path reference scorer and a
//! sparse-product pipeline that agrees with it), the classical two-hop and
//! L3 baselines, within-period and cross-period evaluation tasks with
//! ranking metrics, and the sensitivity-sweep orchestration.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod graph;
pub mod h3;
mod rows;
pub mod sweep;
pub mod synth;

pub use baselines::BaselineMethod;
pub use error::{Error, Result};
pub use eval::{EvalTask, Method, MetricsReport, TaskKind};
pub use graph::{
    candidate_pairs_from_counts, candidate_pairs_within_two_hops, two_hop_connector_counts,
    BuildReport, NodeIndex, NodePair, TwoHopConnectorCounts, WeightedGraph,
};
pub use h3::{
    explain_pair, h3_directed_score, h3_score_all, h3_symmetrized_score, H3Params, H3Scorer,
    PairExplanation, PathEvidence, ScoredPair,
};
