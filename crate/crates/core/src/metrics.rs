//! Confusion counts and filter quality (MCC, FPR, FNR). The positive class is
//! a dishonest recommendation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterVerdict;

/// Ground truth for one recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Honest,
    Dishonest,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Pairs each recommendation's removal with its label.
pub fn confusion_from_labels(verdict: &FilterVerdict, truth: &[Label]) -> Result<ConfusionCounts> {
    let mask = verdict.removed_mask();
    if mask.len() != truth.len() {
        return Err(Error::LabelMismatch {
            labels: truth.len(),
            recommendations: mask.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&removed, &label) in mask.iter().zip(truth) {
        match (label, removed) {
            (Label::Dishonest, true) => c.tp += 1,
            (Label::Dishonest, false) => c.fn_ += 1,
            (Label::Honest, true) => c.fp += 1,
            (Label::Honest, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Matthews correlation coefficient. If any of the four marginal sums is
/// zero the denominator is taken as 1.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let sums = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    let denom = if sums.contains(&0.0) {
        1.0
    } else {
        sums.iter().product::<f64>().sqrt()
    };
    (tp * tn - fp * fn_) / denom
}

/// `fp / (fp + tn)`, 0 when there are no negatives.
pub fn fpr(c: &ConfusionCounts) -> f64 {
    ratio(c.fp, c.fp + c.tn)
}

/// `fn / (fn + tp)`, 0 when there are no positives.
pub fn fnr(c: &ConfusionCounts) -> f64 {
    ratio(c.fn_, c.fn_ + c.tp)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterQuality {
    pub counts: ConfusionCounts,
    pub mcc: f64,
    pub fpr: f64,
    pub fnr: f64,
}

impl From<ConfusionCounts> for FilterQuality {
    fn from(counts: ConfusionCounts) -> Self {
        FilterQuality {
            counts,
            mcc: mcc(&counts),
            fpr: fpr(&counts),
            fnr: fnr(&counts),
        }
    }
}

impl FilterQuality {
    pub fn evaluate(verdict: &FilterVerdict, truth: &[Label]) -> Result<Self> {
        confusion_from_labels(verdict, truth).map(Self::from)
    }

    /// Fraction of dishonest recommendations removed; 0 with none present.
    pub fn detection_rate(&self) -> f64 {
        ratio(self.counts.tp, self.counts.tp + self.counts.fn_)
    }
}
