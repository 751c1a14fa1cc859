//! Cluster-head scenario simulation and seeded experiment sweeps.

pub mod cluster;
pub mod experiment;
pub mod scenario;

pub use cluster::{
    evaluate_provider_trust, generate_recommendations, run_interaction_phase, select_provider,
    InteractionStores, MemberStore,
};
pub use experiment::{
    default_target_trust, derive_seed, run_attack_sweep, run_baseline_comparison, run_offset_sweep,
    run_trial, ComparisonGrid, FilterOutcome, OffsetCell, TrialOutcome, ATTACK_FRACTIONS,
    COMPARISON_FRACTIONS,
};
pub use scenario::{AttackKind, AttackProfile, ClusterScenario, NodeId, OFFSET_LEVELS};
