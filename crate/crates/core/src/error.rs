use thiserror::Error;

/// Errors raised by graph construction, scoring, and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge ({source_id}, {target_id}) has negative weight {weight}")]
    NegativeWeight {
        source_id: String,
        target_id: String,
        weight: f64,
    },

    #[error("edge ({source_id}, {target_id}) has non-finite weight")]
    NonFiniteWeight { source_id: String, target_id: String },

    #[error("node index {index} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },

    #[error("unknown node id {0:?}")]
    UnknownNode(String),

    #[error("node id {0:?} appears more than once")]
    DuplicateNodeId(String),

    #[error("pair ({0}, {0}) is not a pair of distinct nodes")]
    SelfPair(usize),

    #[error("connector counts were built from a different graph")]
    StaleConnectorCounts,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("graph has {0} edges; at least 2 are required to split")]
    TooFewEdges(usize),

    #[error("degenerate task: {0}")]
    DegenerateTask(String),

    #[error("ranking input must contain at least one positive and one negative")]
    SingleClass,

    #[error("no source node has a positive candidate")]
    NoSourcesWithPositives,

    #[error("stratification needs at least 3 networks, got {0}")]
    TooFewNetworks(usize),

    #[error("graph has no edges")]
    EmptyGraph,
}

impl Error {
    /// True for errors that describe an evaluation task with nothing to learn
    /// or measure, as opposed to malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTask(_) | Error::SingleClass | Error::NoSourcesWithPositives
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
