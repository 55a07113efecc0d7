//! Classification-tree training by moving-horizon differential evolution.
//!
//! The crate is organized bottom-up:
//!
//! * [`data`] turns CSV tables into scaled datasets, splits them and builds
//!   the per-feature threshold sets every optimizer searches over.
//! * [`tree`] holds the complete-binary-tree representation, routing and the
//!   penalized misclassification objective.
//! * [`codec`] maps real-valued DE individuals onto trees and back.
//! * [`fitness`] evaluates a whole population in one batched pass.
//! * [`de`] is the population-based DE optimizer over whole trees.
//! * [`greedy`] provides CART, exhaustive depth-1 search, the exact depth-2
//!   solver and the naive fitness oracle.
//! * [`mh`] drives the moving-horizon loop that grafts one node at a time.

pub mod codec;
pub mod data;
pub mod de;
pub mod error;
pub mod fitness;
pub mod greedy;
pub mod mh;
pub mod rng;
pub mod tree;

pub use codec::Individual;
pub use data::{Dataset, Encoder, RawTable, Schema, SplitSpec, ThresholdSets};
pub use de::{DeConfig, DeMode, DeResult, Population};
pub use error::{Error, Result};
pub use fitness::{Backend, ClassCountTensor, EvalConfig};
pub use greedy::{Impurity, SplitCandidate};
pub use mh::{MhConfig, MhReport, WarmStartPolicy};
pub use tree::{ModelArtifact, ObjectiveReport, TreeParams};
