//! Streaming estimators for 4-clique and 5-clique counts in edge streams.
//!
//! The estimators keep a bounded edge sample (and, for the two-tier
//! variants, a bounded sample of observed triangles or 4-cliques) and
//! weight every detected clique by the inverse of its detection probability.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod oracle;
pub mod prob;
pub mod reservoir;
pub mod stream;
pub mod synth;

pub use error::{DomainError, Error, Result, StreamError};
pub use estimators::{build_estimator, CliqueEstimator, EstimatorKind, EstimatorSpec};
pub use reservoir::{joint_inclusion_prob, OfferOutcome, Reservoir};
pub use stream::{Edge, EdgeKey, RngHandle, VertexId};
