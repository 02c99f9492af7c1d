//! Exact rational arithmetic, finite metric spaces, isometry search and the
//! graph-distance encoding.

mod graph;
mod maps;
mod rational;
mod search;
mod space;

use thiserror::Error;

pub use graph::{graph_to_metric, SimpleGraph};
pub use maps::{PartialIsometry, Permutation};
pub use rational::{q, ParseRationalError, Rational};
pub use search::{find_embedding, find_isometry};
pub use space::{ball, med_set, sphere, validate_space, FiniteMetricSpace};

/// Errors from metric validation, isometry search and graph encoding. The
/// `Display` form is the report line printed by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("NotSquare row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("NonZeroDiagonal {0}")]
    NonZeroDiagonal(usize),
    #[error("AsymmetricMatrix {0} {1}")]
    AsymmetricMatrix(usize, usize),
    #[error("NegativeOrZeroOffDiagonal {0} {1}")]
    NegativeOrZeroOffDiagonal(usize, usize),
    #[error("TriangleViolation {0} {1} {2}")]
    TriangleViolation(usize, usize, usize),
    #[error("LabelCount expected {expected} got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("IndexOutOfRange {0}")]
    IndexOutOfRange(usize),
    #[error("NotInjective {0} {1}")]
    NotInjective(usize, usize),
    #[error("DistanceNotPreserved {0} {1}")]
    DistanceNotPreserved(usize, usize),
    #[error("NotFound")]
    NotFound,
    #[error("DisconnectedGraph")]
    DisconnectedGraph,
    #[error("SelfLoop {0}")]
    SelfLoop(usize),
}
