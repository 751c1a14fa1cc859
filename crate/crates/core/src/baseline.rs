//! Comparison filters: quantile band, control-limit chart, and iterative
//! mean-threshold filtering.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterVerdict;
use crate::recommendation::RecommendationSet;

// Slack on bound comparisons so that float noise in a mean or quantile never
// evicts a value sitting exactly on a bound.
const BOUND_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub quartile_q: f64,
    pub chart_k: f64,
    pub iterative_s: f64,
    pub iterative_max_rounds: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            quartile_q: 0.25,
            chart_k: 1.0,
            iterative_s: 0.35,
            iterative_max_rounds: 100,
        }
    }
}

fn sorted_values(recs: &RecommendationSet) -> Vec<f64> {
    let mut xs: Vec<f64> = recs.values().collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Quantile by linear interpolation between the closest order statistics.
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn band_verdict(recs: &RecommendationSet, lower: f64, upper: f64) -> FilterVerdict {
    let mask = recs
        .values()
        .map(|v| v < lower - BOUND_EPS || v > upper + BOUND_EPS)
        .collect();
    FilterVerdict::from_mask(recs, mask, BTreeSet::new())
}

/// Keeps values inside the `[q, 1 - q]` quantile band.
pub fn quartile_filter(recs: &RecommendationSet, q: f64) -> Result<FilterVerdict> {
    recs.non_empty()?;
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "quantile q={q} not in (0, 0.5)"
        )));
    }
    let xs = sorted_values(recs);
    Ok(band_verdict(recs, quantile(&xs, q), quantile(&xs, 1.0 - q)))
}

pub(crate) fn mean_and_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Keeps values within `k` population standard deviations of the mean.
pub fn control_chart_filter(recs: &RecommendationSet, k: f64) -> Result<FilterVerdict> {
    recs.non_empty()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "chart multiplier k={k} must be positive"
        )));
    }
    let (mean, sd) = mean_and_sd(recs.values());
    Ok(band_verdict(recs, mean - k * sd, mean + k * sd))
}

/// Repeatedly drops every value further than `s` from the current mean
/// until a round removes nothing, `max_rounds` is reached, or a round would
/// remove every survivor (that round is skipped).
pub fn iterative_filter(
    recs: &RecommendationSet,
    s: f64,
    max_rounds: usize,
) -> Result<FilterVerdict> {
    Ok(iterate(recs, s, max_rounds)?.0)
}

/// Same as [`iterative_filter`], also returning the number of rounds run.
pub fn iterate(
    recs: &RecommendationSet,
    s: f64,
    max_rounds: usize,
) -> Result<(FilterVerdict, usize)> {
    recs.non_empty()?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "threshold s={s} not in [0, 1]"
        )));
    }
    if max_rounds == 0 {
        return Err(Error::InvalidArgument(
            "max_rounds must be at least 1".into(),
        ));
    }
    let values: Vec<f64> = recs.values().collect();
    let mut removed = vec![false; values.len()];
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let alive = || {
            values
                .iter()
                .zip(&removed)
                .filter(|(_, &r)| !r)
                .map(|(&v, _)| v)
        };
        let n_alive = alive().count();
        let mean = alive().sum::<f64>() / n_alive as f64;
        let drop: Vec<usize> = (0..values.len())
            .filter(|&i| !removed[i] && (values[i] - mean).abs() > s + BOUND_EPS)
            .collect();
        if drop.is_empty() || drop.len() == n_alive {
            break;
        }
        for i in drop {
            removed[i] = true;
        }
    }
    Ok((
        FilterVerdict::from_mask(recs, removed, BTreeSet::new()),
        rounds,
    ))
}
