//! Random forests with path-based adaptive tree weighting.
//!
//! Each tree's vote is reweighted by a lookup table keyed on the forest's
//! probability for the tree's predicted class, the flip pattern of the
//! node-majority labels along the tree's root-to-leaf path, and the
//! predicted class itself. The crate also carries the comparators (static
//! OOB weighting, KNORA-E/U), the applicability indicators (boundary mass
//! and spread), weight amplification, and the benchmark protocol with its
//! statistics.
//!
//! With the default `parallel` feature, forest fitting, batch voting and
//! repeat-level evaluation run on rayon; without it every loop runs
//! sequentially with identical results.

pub mod baselines;
pub mod bench;
pub mod cart;
pub mod data;
mod error;
pub mod exec;
pub mod forest;
pub mod pattern;
pub mod paw;
pub mod stats;

pub use error::{Error, Result};

pub use baselines::{KnoraModel, NeighborIndex, StaticWeights};
pub use cart::{Node, Split, TreeModel};
pub use data::{Dataset, SplitPlan, SyntheticKind};
pub use forest::{ForestConfig, ForestModel, VoteRecord};
pub use pattern::{FlipPattern, FlipStats};
pub use paw::{CvRecords, Indicators, WeightTable};
