//! Common verdict type and dispatch over the four filters.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::baseline::{self, BaselineConfig};
use crate::deviation;
use crate::error::{Error, Result};
use crate::recommendation::{ClassId, RecommendationSet};

/// Outcome of running a filter over a recommendation set.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterVerdict {
    dishonest_classes: BTreeSet<ClassId>,
    removed_mask: Vec<bool>,
    surviving: RecommendationSet,
    removed: RecommendationSet,
    trust: Option<f64>,
}

impl FilterVerdict {
    /// Splits `input` by `removed_mask` (aligned with input order).
    pub(crate) fn from_mask(
        input: &RecommendationSet,
        removed_mask: Vec<bool>,
        dishonest_classes: BTreeSet<ClassId>,
    ) -> Self {
        debug_assert_eq!(input.len(), removed_mask.len());
        let (removed, surviving): (Vec<_>, Vec<_>) =
            input.iter().zip(&removed_mask).partition(|(_, &gone)| gone);
        let surviving: RecommendationSet = surviving.into_iter().map(|(r, _)| r).collect();
        let removed = removed.into_iter().map(|(r, _)| r).collect();
        let trust = aggregate_trust(&surviving);
        FilterVerdict {
            dishonest_classes,
            removed_mask,
            surviving,
            removed,
            trust,
        }
    }

    /// Classes declared dishonest. Empty for the baseline filters, which
    /// judge individual values rather than classes.
    pub fn dishonest_classes(&self) -> &BTreeSet<ClassId> {
        &self.dishonest_classes
    }

    /// `true` at position `i` when the `i`-th input recommendation was removed.
    pub fn removed_mask(&self) -> &[bool] {
        &self.removed_mask
    }

    pub fn surviving(&self) -> &RecommendationSet {
        &self.surviving
    }

    pub fn removed(&self) -> &RecommendationSet {
        &self.removed
    }

    /// Mean of the survivors; `None` when nothing survived.
    pub fn trust(&self) -> Option<f64> {
        self.trust
    }

    pub fn record(&self) -> VerdictRecord {
        VerdictRecord {
            dishonest_classes: self.dishonest_classes.iter().map(|c| c.value()).collect(),
            surviving: self.surviving.len(),
            removed: self.removed.len(),
            trust: self.trust.map(|t| format!("{t:.4}")),
        }
    }
}

/// Serializable summary of a verdict, trust fixed at four decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub dishonest_classes: Vec<f64>,
    pub surviving: usize,
    pub removed: usize,
    pub trust: Option<String>,
}

impl fmt::Display for VerdictRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dishonest classes: ")?;
        if self.dishonest_classes.is_empty() {
            write!(f, "(none)")?;
        } else {
            let parts: Vec<String> = self
                .dishonest_classes
                .iter()
                .map(|c| format!("{c:.1}"))
                .collect();
            write!(f, "{}", parts.join(" "))?;
        }
        writeln!(f)?;
        writeln!(f, "surviving: {}", self.surviving)?;
        writeln!(f, "removed: {}", self.removed)?;
        write!(f, "trust: {}", self.trust.as_deref().unwrap_or("(none)"))
    }
}

/// Unweighted mean of the surviving recommendations.
pub fn aggregate_trust(surviving: &RecommendationSet) -> Option<f64> {
    if surviving.is_empty() {
        return None;
    }
    Some(surviving.values().sum::<f64>() / surviving.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Deviation,
    Quartile,
    Chart,
    Iterative,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] = [
        FilterKind::Deviation,
        FilterKind::Quartile,
        FilterKind::Chart,
        FilterKind::Iterative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Deviation => "deviation",
            FilterKind::Quartile => "quartile",
            FilterKind::Chart => "chart",
            FilterKind::Iterative => "iterative",
        }
    }

    pub fn apply(self, recs: &RecommendationSet, config: &BaselineConfig) -> Result<FilterVerdict> {
        match self {
            FilterKind::Deviation => deviation::detect_dishonest_classes(recs),
            FilterKind::Quartile => baseline::quartile_filter(recs, config.quartile_q),
            FilterKind::Chart => baseline::control_chart_filter(recs, config.chart_k),
            FilterKind::Iterative => {
                baseline::iterative_filter(recs, config.iterative_s, config.iterative_max_rounds)
            }
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown filter {s:?}")))
    }
}
