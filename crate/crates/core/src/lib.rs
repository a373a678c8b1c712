//! Community evolution prediction on temporal interaction graphs.
//!
//! The pipeline slices a timestamped edge stream into snapshots, detects
//! communities per snapshot, labels how each community evolves into the next
//! snapshot, extracts structural and friendship features, and trains a
//! two-stage model that predicts the evolution type and its extent.

pub mod communities;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod evolution;
pub mod features;
pub mod graph;
pub mod learners;
pub mod model;

pub use communities::{CommunityInstance, LpaConfig, Partition};
pub use config::RunConfig;
pub use dataset::Sample;
pub use error::{Error, Result};
pub use evolution::{EvolutionRecord, EvolutionType, LabeledSet};
pub use features::{FeatureVector, N_FEATURES};
pub use graph::{FriendshipGraph, Interaction, Snapshot, TemporalGraph};
pub use model::{LtsConfig, LtsModel, Prediction};
