//! Interaction, request and trust-evaluation phases of the cluster scenario.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{AttackKind, ClusterScenario, NodeId};
use crate::baseline::BaselineConfig;
use crate::error::{Error, Result};
use crate::filter::{FilterKind, FilterVerdict};
use crate::metrics::Label;
use crate::recommendation::{Recommendation, RecommendationSet};

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Inclusive range a dishonest value is drawn from (before clamping) for the
/// given attack against a cluster head of true trust `trust`.
pub fn dishonest_range<R: Rng + ?Sized>(
    scenario: &ClusterScenario,
    trust: f64,
    rng: &mut R,
) -> (f64, f64) {
    match scenario.attack.kind {
        AttackKind::BadMouthing => (0.0, 0.3),
        AttackKind::BallotStuffing => (0.8, 1.0),
        AttackKind::RandomOpinion => {
            if rng.gen_bool(0.5) {
                (0.1, 0.2)
            } else {
                (0.8, 1.0)
            }
        }
        AttackKind::MeanOffset => {
            let center = clamp_unit(trust + scenario.attack.offset.unwrap_or(0.0));
            (
                center - scenario.honest_noise,
                center + scenario.honest_noise,
            )
        }
    }
}

/// Draws one recommendation per recommender for cluster head `ch`: honest
/// recommenders first, then dishonest ones, with matching truth labels.
pub fn generate_recommendations<R: Rng + ?Sized>(
    scenario: &ClusterScenario,
    ch: NodeId,
    rng: &mut R,
) -> Result<(RecommendationSet, Vec<Label>)> {
    let trust = scenario.trust_of(ch)?;
    let honest = scenario.honest_count();
    let mut items = Vec::with_capacity(scenario.num_recommenders);
    let mut labels = Vec::with_capacity(scenario.num_recommenders);
    for i in 0..scenario.num_recommenders {
        let (v, label) = if i < honest {
            let v = uniform(
                rng,
                trust - scenario.honest_noise,
                trust + scenario.honest_noise,
            );
            (v, Label::Honest)
        } else {
            let (lo, hi) = dishonest_range(scenario, trust, rng);
            (uniform(rng, lo, hi), Label::Dishonest)
        };
        items.push(Recommendation::new(clamp_unit(v))?);
        labels.push(label);
    }
    Ok((RecommendationSet::new(items), labels))
}

/// Recommendations one member node holds about each cluster head.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberStore {
    pub node: NodeId,
    pub label: Label,
    pub recommendations: BTreeMap<NodeId, Recommendation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionStores {
    members: Vec<MemberStore>,
}

impl InteractionStores {
    pub fn members(&self) -> &[MemberStore] {
        &self.members
    }

    /// Every member's recommendation for `ch`, in member order, with labels.
    pub fn recommendations_for(&self, ch: NodeId) -> (RecommendationSet, Vec<Label>) {
        self.members
            .iter()
            .filter_map(|m| m.recommendations.get(&ch).map(|r| (*r, m.label)))
            .unzip()
    }
}

/// Generates every member's recommendation for every cluster head. Cluster
/// heads are visited in id order from one seeded stream.
pub fn run_interaction_phase(scenario: &ClusterScenario) -> Result<InteractionStores> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let first_member = scenario.true_trust.keys().last().map_or(0, |id| id.0 + 1);
    let mut members: Vec<MemberStore> = (0..scenario.num_recommenders)
        .map(|i| MemberStore {
            node: NodeId(first_member + i as u32),
            label: if i < scenario.honest_count() {
                Label::Honest
            } else {
                Label::Dishonest
            },
            recommendations: BTreeMap::new(),
        })
        .collect();
    for &ch in scenario.true_trust.keys() {
        let (recs, _) = generate_recommendations(scenario, ch, &mut rng)?;
        for (m, r) in members.iter_mut().zip(recs.iter()) {
            m.recommendations.insert(ch, r);
        }
    }
    Ok(InteractionStores { members })
}

/// Aggregates the members' recommendations for `ch` and filters them.
pub fn evaluate_provider_trust(
    stores: &InteractionStores,
    ch: NodeId,
    filter: FilterKind,
    config: &BaselineConfig,
) -> Result<FilterVerdict> {
    let (recs, _) = stores.recommendations_for(ch);
    if recs.is_empty() {
        return Err(Error::EmptyInput);
    }
    filter.apply(&recs, config)
}

/// Highest trust strictly above 0.5; ties go to the lowest id.
pub fn select_provider(ratings: &BTreeMap<NodeId, f64>) -> Option<NodeId> {
    let mut best: Option<(NodeId, f64)> = None;
    for (&id, &t) in ratings {
        if t > 0.5 && best.is_none_or(|(_, b)| t > b) {
            best = Some((id, t));
        }
    }
    best.map(|(id, _)| id)
}
