//! Recommendations, their ten-bin class histogram, and the median reference
//! point used by the deviation filter.
//!
//! Bins are left-open and right-closed, `((i-1)/10, i/10]`, with the first
//! bin also closed at zero so that the ten bins partition `[0, 1]`.

use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Number of recommendation classes.
pub const NUM_CLASSES: usize = 10;

/// A single trust rating on the canonical `[0, 1]` scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Recommendation(f64);

impl Recommendation {
    pub fn new(value: f64) -> Result<Self> {
        check_range("recommendation", value, 0.0, 1.0).map(Recommendation)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn class(self) -> ClassId {
        ClassId::of(self.0)
    }
}

impl<'de> Deserialize<'de> for Recommendation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Recommendation::new(v).map_err(serde::de::Error::custom)
    }
}

/// Maps a raw feedback score on the 1..=10 interaction scale onto `[0, 1]`.
pub fn normalize_feedback(raw: f64) -> Result<f64> {
    check_range("feedback", raw, 1.0, 10.0).map(|r| r / 10.0)
}

/// One of the ten recommendation classes, stored as its 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(u8);

impl ClassId {
    /// Class for 1-based `index`; `None` outside `1..=10`.
    pub fn from_index(index: usize) -> Option<Self> {
        (1..=NUM_CLASSES)
            .contains(&index)
            .then_some(ClassId(index as u8))
    }

    /// Class containing `value`. Values are assumed to be in `[0, 1]`;
    /// anything above 1 lands in the last class.
    pub fn of(value: f64) -> Self {
        // i / 10.0 is the correctly rounded decimal, so literal boundaries
        // such as 0.3 compare equal to their bin edge.
        (1..NUM_CLASSES)
            .find(|&i| value <= i as f64 / 10.0)
            .map_or(ClassId(NUM_CLASSES as u8), |i| ClassId(i as u8))
    }

    /// Class whose representative value is `value` (e.g. 0.8 -> class 8).
    pub fn from_value(value: f64) -> Option<Self> {
        let idx = (value * 10.0).round();
        if (value * 10.0 - idx).abs() > 1e-9 {
            return None;
        }
        Self::from_index(idx as usize)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Representative value `i / 10`.
    pub fn value(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.value())
    }
}

impl Serialize for ClassId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// An ordered multiset of recommendations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecommendationSet {
    items: Vec<Recommendation>,
}

impl RecommendationSet {
    pub fn new(items: Vec<Recommendation>) -> Self {
        RecommendationSet { items }
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| Recommendation::new(v))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Reads one value per line. Blank lines and lines starting with `#`
    /// are skipped.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut items = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                line: n + 1,
                message: format!("not a number: {line:?}"),
            })?;
            let r = Recommendation::new(v).map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            items.push(r);
        }
        Ok(Self::new(items))
    }

    pub fn read_file(path: impl AsRef<Path>) -> std::io::Result<Result<Self>> {
        let f = std::fs::File::open(path)?;
        Ok(Self::read_from(std::io::BufReader::new(f)))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Recommendation] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = Recommendation> + Clone + '_ {
        self.items.iter().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.items.iter().map(|r| r.0)
    }

    pub(crate) fn non_empty(&self) -> Result<&Self> {
        if self.is_empty() {
            Err(Error::EmptyInput)
        } else {
            Ok(self)
        }
    }
}

impl FromIterator<Recommendation> for RecommendationSet {
    fn from_iter<I: IntoIterator<Item = Recommendation>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl Extend<Recommendation> for RecommendationSet {
    fn extend<I: IntoIterator<Item = Recommendation>>(&mut self, iter: I) {
        self.items.extend(iter);
    }
}

/// Frequency of each of the ten classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassHistogram {
    bins: [usize; NUM_CLASSES],
    total: usize,
}

impl ClassHistogram {
    /// Builds a histogram directly from per-class counts (index 0 is class 0.1).
    pub fn from_counts(bins: [usize; NUM_CLASSES]) -> Self {
        ClassHistogram {
            bins,
            total: bins.iter().sum(),
        }
    }

    pub fn bins(&self) -> &[usize; NUM_CLASSES] {
        &self.bins
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn frequency(&self, class: ClassId) -> usize {
        self.bins[class.index() - 1]
    }
}

pub fn bin_recommendations(recs: &RecommendationSet) -> Result<ClassHistogram> {
    recs.non_empty()?;
    let mut bins = [0usize; NUM_CLASSES];
    for r in recs.iter() {
        bins[r.class().index() - 1] += 1;
    }
    Ok(ClassHistogram::from_counts(bins))
}

/// A non-empty recommendation class and how many recommendations fell into it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DomainEntry {
    pub class: ClassId,
    pub frequency: usize,
}

impl DomainEntry {
    pub fn class_value(&self) -> f64 {
        self.class.value()
    }
}

/// Drops empty classes, keeping ascending class order.
pub fn build_domain(hist: &ClassHistogram) -> Result<Vec<DomainEntry>> {
    let domain: Vec<_> = hist
        .bins
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0)
        .map(|(i, &frequency)| DomainEntry {
            class: ClassId(i as u8 + 1),
            frequency,
        })
        .collect();
    if domain.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(domain)
}

/// Median of the multiset in which every class value appears `frequency`
/// times; an even count averages the two middle values.
pub fn weighted_median(domain: &[DomainEntry]) -> Result<f64> {
    let mut sorted: Vec<DomainEntry> = domain.iter().filter(|e| e.frequency > 0).copied().collect();
    if sorted.is_empty() {
        return Err(Error::EmptyInput);
    }
    sorted.sort_by_key(|e| e.class);
    let total: usize = sorted.iter().map(|e| e.frequency).sum();

    // value at 0-based position `k` of the expanded multiset
    let nth = |k: usize| {
        let mut seen = 0;
        for e in &sorted {
            seen += e.frequency;
            if k < seen {
                return e.class_value();
            }
        }
        unreachable!("position within total")
    };

    if total % 2 == 1 {
        Ok(nth(total / 2))
    } else {
        Ok((nth(total / 2 - 1) + nth(total / 2)) / 2.0)
    }
}
