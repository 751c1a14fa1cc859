use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recommender population bounds used unless a scenario opts out.
pub const RECOMMENDER_ENVELOPE: (usize, usize) = (10, 100);

/// Mean-offset levels L1..L4.
pub const OFFSET_LEVELS: [f64; 4] = [0.1, 0.2, 0.4, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Dishonest values uniform in `[0, 0.3]`.
    BadMouthing,
    /// Dishonest values uniform in `[0.8, 1.0]`.
    BallotStuffing,
    /// Each dishonest recommender picks `[0.1, 0.2]` or `[0.8, 1.0]` with equal odds.
    RandomOpinion,
    /// Dishonest values spread like honest ones around `true trust + offset`.
    MeanOffset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackProfile {
    pub kind: AttackKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl AttackProfile {
    pub const fn new(kind: AttackKind) -> Self {
        AttackProfile { kind, offset: None }
    }

    pub const fn mean_offset(offset: f64) -> Self {
        AttackProfile {
            kind: AttackKind::MeanOffset,
            offset: Some(offset),
        }
    }

    /// Short label used in result tables: `bm`, `bs`, `ro`, `offset:<level>`.
    pub fn label(&self) -> String {
        match self.kind {
            AttackKind::BadMouthing => "bm".into(),
            AttackKind::BallotStuffing => "bs".into(),
            AttackKind::RandomOpinion => "ro".into(),
            AttackKind::MeanOffset => format!("offset:{}", self.offset.unwrap_or(0.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.offset) {
            (AttackKind::MeanOffset, Some(o)) if o.is_finite() && (0.0..=1.0).contains(&o) => {
                Ok(())
            }
            (AttackKind::MeanOffset, Some(o)) => Err(Error::Scenario {
                field: "attack.offset",
                message: format!("{o} not in [0, 1]"),
            }),
            (AttackKind::MeanOffset, None) => Err(Error::Scenario {
                field: "attack.offset",
                message: "required for mean_offset".into(),
            }),
            (_, Some(_)) => Err(Error::Scenario {
                field: "attack.offset",
                message: "only valid for mean_offset".into(),
            }),
            (_, None) => Ok(()),
        }
    }
}

fn default_noise() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

/// A cluster with its cluster heads, recommender population and attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterScenario {
    pub num_cluster_heads: usize,
    /// Actual trustworthiness of each cluster head.
    pub true_trust: BTreeMap<NodeId, f64>,
    pub num_recommenders: usize,
    #[serde(default)]
    pub dishonest_fraction: f64,
    pub attack: AttackProfile,
    /// Half-width of the honest spread around the true trust.
    #[serde(default = "default_noise")]
    pub honest_noise: f64,
    pub seed: u64,
    /// Reject populations outside the 10..=100 envelope.
    #[serde(default = "default_true")]
    pub enforce_envelope: bool,
}

impl ClusterScenario {
    /// One cluster head with id 1 and true trust `trust`.
    pub fn single(trust: f64, num_recommenders: usize, attack: AttackProfile, seed: u64) -> Self {
        ClusterScenario {
            num_cluster_heads: 1,
            true_trust: [(NodeId(1), trust)].into(),
            num_recommenders,
            dishonest_fraction: 0.0,
            attack,
            honest_noise: default_noise(),
            seed,
            enforce_envelope: true,
        }
    }

    /// Four cluster heads; the first carries `target_trust`, the rest 0.6, 0.4, 0.2.
    /// Thirty recommenders with no attackers.
    pub fn four_heads(target_trust: f64, attack: AttackProfile, seed: u64) -> Self {
        ClusterScenario {
            num_cluster_heads: 4,
            true_trust: [
                (NodeId(1), target_trust),
                (NodeId(2), 0.6),
                (NodeId(3), 0.4),
                (NodeId(4), 0.2),
            ]
            .into(),
            num_recommenders: 30,
            dishonest_fraction: 0.0,
            attack,
            honest_noise: default_noise(),
            seed,
            enforce_envelope: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: ClusterScenario = serde_json::from_str(text).map_err(|e| Error::Scenario {
            field: "(document)",
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario {
            field: "(file)",
            message: format!("{}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let field_err = |field, message: String| Err(Error::Scenario { field, message });
        if self.true_trust.is_empty() {
            return field_err("true_trust", "at least one cluster head required".into());
        }
        if self.num_cluster_heads != self.true_trust.len() {
            return field_err(
                "num_cluster_heads",
                format!(
                    "{} does not match {} entries in true_trust",
                    self.num_cluster_heads,
                    self.true_trust.len()
                ),
            );
        }
        if let Some((id, t)) = self
            .true_trust
            .iter()
            .find(|(_, t)| !(t.is_finite() && (0.0..=1.0).contains(*t)))
        {
            return field_err(
                "true_trust",
                format!("trust {t} of cluster head {id} not in [0, 1]"),
            );
        }
        if self.num_recommenders == 0 {
            return field_err("num_recommenders", "must be positive".into());
        }
        let (lo, hi) = RECOMMENDER_ENVELOPE;
        if self.enforce_envelope && !(lo..=hi).contains(&self.num_recommenders) {
            return field_err(
                "num_recommenders",
                format!(
                    "{} outside [{lo}, {hi}] (set enforce_envelope to false to allow)",
                    self.num_recommenders
                ),
            );
        }
        if !(self.dishonest_fraction.is_finite() && (0.0..=1.0).contains(&self.dishonest_fraction))
        {
            return field_err(
                "dishonest_fraction",
                format!("{} not in [0, 1]", self.dishonest_fraction),
            );
        }
        if !(self.honest_noise.is_finite() && self.honest_noise >= 0.0) {
            return field_err(
                "honest_noise",
                format!("{} must be >= 0", self.honest_noise),
            );
        }
        self.attack.validate()
    }

    /// Number of dishonest recommenders: `N * fraction` rounded half up.
    pub fn dishonest_count(&self) -> usize {
        dishonest_count(self.num_recommenders, self.dishonest_fraction)
    }

    pub fn honest_count(&self) -> usize {
        self.num_recommenders - self.dishonest_count()
    }

    /// Lowest cluster-head id; the one experiments evaluate.
    pub fn target(&self) -> NodeId {
        *self
            .true_trust
            .keys()
            .next()
            .expect("validated scenario has a cluster head")
    }

    pub fn trust_of(&self, ch: NodeId) -> Result<f64> {
        self.true_trust
            .get(&ch)
            .copied()
            .ok_or(Error::UnknownClusterHead(ch.0))
    }
}

pub fn dishonest_count(n: usize, fraction: f64) -> usize {
    // the nudge keeps 0.15 * 30 = 4.4999.. rounding up like 4.5 would
    ((n as f64 * fraction + 0.5 + 1e-9).floor() as usize).min(n)
}
