//! Deviation-based detection of dishonest recommendation classes.
//!
//! The filter bins recommendations into ten classes and scores every
//! non-empty class by its dissimilarity from a reference point (by default
//! the median of the binned multiset):
//!
//! ```text
//! df(c) = |c - reference|^2 / f(c)
//! ```
//!
//! Classes are ranked by `df` descending and removed cumulatively. Removing
//! the first `j` classes gives the smoothing factor
//!
//! ```text
//! sf(j) = (recommendations left after removal) * (sum of df over removed classes)
//! ```
//!
//! and the prefix with the largest `sf` is declared dishonest. Every
//! recommendation that falls into one of those classes is removed and the
//! mean of the survivors is the aggregated trust.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::FilterVerdict;
use crate::recommendation::{
    bin_recommendations, build_domain, weighted_median, ClassHistogram, ClassId, DomainEntry,
    RecommendationSet,
};

/// Relative tolerance under which two smoothing factors count as tied.
pub const SF_TIE_TOLERANCE: f64 = 1e-9;

/// `|class_value - reference|^2 / frequency`.
pub fn dissimilarity(class_value: f64, frequency: usize, reference: f64) -> Result<f64> {
    if frequency == 0 {
        return Err(Error::ZeroFrequency);
    }
    let d = class_value - reference;
    Ok(d * d / frequency as f64)
}

/// A domain class annotated with its dissimilarity from `reference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissimilarityEntry {
    pub class: ClassId,
    pub frequency: usize,
    pub df: f64,
    pub reference: f64,
}

impl DissimilarityEntry {
    pub fn class_value(&self) -> f64 {
        self.class.value()
    }
}

/// Deviation of a class from the reference in twentieths, when the reference
/// sits on the 1/20 grid (always true for a median of class values).
fn grid_deviation(class: ClassId, reference: f64) -> Option<u64> {
    let r = reference * 20.0;
    let snapped = r.round();
    ((r - snapped).abs() < 1e-9).then(|| (class.index() as i64 * 2 - snapped as i64).unsigned_abs())
}

/// Orders two entries by df descending. Grid references compare the exact
/// rationals `d^2 / f` so that equal dissimilarities tie exactly.
fn cmp_df(a: &DissimilarityEntry, b: &DissimilarityEntry) -> Ordering {
    match (
        grid_deviation(a.class, a.reference),
        grid_deviation(b.class, b.reference),
    ) {
        (Some(da), Some(db)) => {
            let lhs = (db * db) as u128 * a.frequency as u128;
            let rhs = (da * da) as u128 * b.frequency as u128;
            lhs.cmp(&rhs)
        }
        _ => b.df.total_cmp(&a.df),
    }
}

/// Ranks the domain by dissimilarity, highest first. Equal dissimilarities
/// put the lower frequency first, then the higher class value.
pub fn rank_by_dissimilarity(
    domain: &[DomainEntry],
    reference: f64,
) -> Result<Vec<DissimilarityEntry>> {
    if domain.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut ranked = domain
        .iter()
        .map(|e| {
            Ok(DissimilarityEntry {
                class: e.class,
                frequency: e.frequency,
                df: dissimilarity(e.class_value(), e.frequency, reference)?,
                reference,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        cmp_df(a, b)
            .then(a.frequency.cmp(&b.frequency))
            .then(b.class.cmp(&a.class))
    });
    Ok(ranked)
}

/// Smoothing factor of removing `suspicious` from the ranked domain:
/// remaining recommendation count times the df removed.
pub fn smoothing_factor(
    domain: &[DissimilarityEntry],
    suspicious: &BTreeSet<ClassId>,
) -> Result<f64> {
    if let Some(c) = suspicious
        .iter()
        .find(|c| !domain.iter().any(|e| e.class == **c))
    {
        return Err(Error::InvalidArgument(format!(
            "suspicious class {c} is not in the domain"
        )));
    }
    if !domain.is_empty() && suspicious.len() == domain.len() {
        return Err(Error::InvalidArgument(
            "at least one class must remain outside the suspicious set".into(),
        ));
    }
    let (removed_df, remaining) = domain.iter().fold((0.0, 0usize), |(df, rem), e| {
        if suspicious.contains(&e.class) {
            (df + e.df, rem)
        } else {
            (df, rem + e.frequency)
        }
    });
    Ok(remaining as f64 * removed_df)
}

/// One step of the cumulative suspicious-set sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// First `j` classes of the ranking, in ranking order.
    pub suspicious_classes: Vec<ClassId>,
    pub suspicious_frequency: usize,
    pub remaining_frequency: usize,
    pub removed_df_sum: f64,
    pub sf: f64,
}

/// Rows for every proper prefix of the ranking (`m - 1` rows for `m`
/// classes; none for a single class).
pub fn sweep_suspicious_sets(ranked: &[DissimilarityEntry]) -> Vec<SweepRow> {
    let total: usize = ranked.iter().map(|e| e.frequency).sum();
    let mut rows = Vec::with_capacity(ranked.len().saturating_sub(1));
    let mut removed_df_sum = 0.0;
    let mut suspicious_frequency = 0;
    for j in 1..ranked.len() {
        let e = &ranked[j - 1];
        removed_df_sum += e.df;
        suspicious_frequency += e.frequency;
        let remaining_frequency = total - suspicious_frequency;
        rows.push(SweepRow {
            suspicious_classes: ranked[..j].iter().map(|e| e.class).collect(),
            suspicious_frequency,
            remaining_frequency,
            removed_df_sum,
            sf: remaining_frequency as f64 * removed_df_sum,
        });
    }
    rows
}

/// Index of the winning sweep row: maximal sf, then the least total
/// suspicious frequency, then the earliest row. `None` when the sweep is
/// empty or every sf is zero.
pub fn select_dishonest_row(rows: &[SweepRow]) -> Option<usize> {
    let max = rows.iter().map(|r| r.sf).fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    let floor = max * (1.0 - SF_TIE_TOLERANCE);
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.sf >= floor)
        .min_by_key(|(i, r)| (r.suspicious_frequency, *i))
        .map(|(i, _)| i)
}

/// Where deviations are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Reference {
    /// Median of the binned multiset.
    #[default]
    Median,
    Fixed(f64),
}

/// Every intermediate of one deviation-filter run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationAnalysis {
    pub histogram: ClassHistogram,
    pub domain: Vec<DomainEntry>,
    pub reference: f64,
    pub ranked: Vec<DissimilarityEntry>,
    pub sweep: Vec<SweepRow>,
    /// Winning row of `sweep`, if any class is dishonest.
    pub selected: Option<usize>,
}

impl DeviationAnalysis {
    pub fn dishonest_classes(&self) -> BTreeSet<ClassId> {
        self.selected
            .map(|i| self.sweep[i].suspicious_classes.iter().copied().collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeviationFilter {
    pub reference: Reference,
}

impl DeviationFilter {
    pub fn with_reference(reference: f64) -> Self {
        DeviationFilter {
            reference: Reference::Fixed(reference),
        }
    }

    pub fn analyze(&self, recs: &RecommendationSet) -> Result<DeviationAnalysis> {
        let histogram = bin_recommendations(recs)?;
        let domain = build_domain(&histogram)?;
        let reference = match self.reference {
            Reference::Median => weighted_median(&domain)?,
            Reference::Fixed(r) => crate::error::check_range("reference", r, 0.0, 1.0)?,
        };
        let ranked = rank_by_dissimilarity(&domain, reference)?;
        let sweep = sweep_suspicious_sets(&ranked);
        // A single class, or no deviation at all, is consensus: nothing to remove.
        let selected = if ranked.iter().all(|e| e.df == 0.0) {
            None
        } else {
            select_dishonest_row(&sweep)
        };
        Ok(DeviationAnalysis {
            histogram,
            domain,
            reference,
            ranked,
            sweep,
            selected,
        })
    }

    pub fn filter(&self, recs: &RecommendationSet) -> Result<FilterVerdict> {
        let analysis = self.analyze(recs)?;
        let dishonest = analysis.dishonest_classes();
        let mask = recs
            .iter()
            .map(|r| dishonest.contains(&r.class()))
            .collect();
        Ok(FilterVerdict::from_mask(recs, mask, dishonest))
    }
}

/// Runs the deviation filter with the median reference.
pub fn detect_dishonest_classes(recs: &RecommendationSet) -> Result<FilterVerdict> {
    DeviationFilter::default().filter(recs)
}
