//! Feature metalearning for binary classification.
//!
//! Problems that have already been solved are kept in a [`MetaDb`] together
//! with the features that worked for them. When a new problem arrives, its
//! nearest solved neighbours (square-root Jensen-Shannon distance between the
//! datasets' row-pattern distributions) vote on which of their features are
//! likely to be good here, and the winners seed a stochastic hill-climbing
//! feature search. The [`harness`] module measures how much that seeding
//! speeds the search up.

pub mod dataset;
pub mod error;
pub mod featsearch;
pub mod harness;
pub mod infomeasure;
pub mod learner;
pub mod metadb;
pub mod metricspace;
pub mod quality;
pub mod transfer;

pub use dataset::{Dataset, DatasetCollection, SynthSpec};
pub use error::{Error, Result};
pub use featsearch::{SearchConfig, SearchResult};
pub use infomeasure::{FeatureSet, FitnessConfig};
pub use learner::{CandidateRecord, LearnConfig, LearnOutcome, RuleModel};
pub use metadb::{MetaDb, MetaDbEntry, ScoredFeature};
pub use metricspace::{DistanceIndex, PatternDistribution};
pub use quality::{QualityConfig, QualitySource};
pub use transfer::TransferConfig;
