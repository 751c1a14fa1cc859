//! Detection of dishonest recommendations for indirect trust.
//!
//! Recommendations in `[0, 1]` are binned into ten classes. The deviation
//! filter ranks classes by their squared distance from the median, scaled
//! down by frequency, and removes the prefix of that ranking that maximizes
//! the smoothing factor. Three statistical baselines, confusion metrics and a
//! seeded cluster-head simulator sit alongside it.

pub mod baseline;
pub mod cli;
pub mod deviation;
pub mod error;
pub mod filter;
pub mod metrics;
pub mod recommendation;
pub mod report;
pub mod sim;

pub use baseline::BaselineConfig;
pub use deviation::{detect_dishonest_classes, DeviationFilter, Reference};
pub use error::{Error, Result};
pub use filter::{FilterKind, FilterVerdict};
pub use metrics::{ConfusionCounts, FilterQuality, Label};
pub use recommendation::{ClassId, Recommendation, RecommendationSet};
