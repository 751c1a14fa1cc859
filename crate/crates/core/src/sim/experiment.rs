//! Seeded experiment sweeps. Every trial runs from its own derived seed, so
//! trials are independent and can run in any order or in parallel.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::cluster::{run_interaction_phase, select_provider};
use super::scenario::{AttackKind, AttackProfile, ClusterScenario, NodeId};
use crate::baseline::BaselineConfig;
use crate::error::{Error, Result};
use crate::filter::FilterKind;
use crate::metrics::FilterQuality;

/// Dishonest fractions of the attack experiments.
pub const ATTACK_FRACTIONS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// Dishonest fractions of the baseline comparison, 10% to 45% in 5% steps.
pub const COMPARISON_FRACTIONS: [f64; 8] = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45];

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a position in a sweep.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base ^ path.len() as u64), |acc, &i| {
            splitmix64(acc ^ splitmix64(i))
        })
}

/// Conventional true trust of the attacked cluster head for each attack.
pub fn default_target_trust(kind: AttackKind) -> f64 {
    match kind {
        AttackKind::BadMouthing => 0.9,
        AttackKind::BallotStuffing => 0.3,
        AttackKind::RandomOpinion => 0.5,
        AttackKind::MeanOffset => 0.3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterOutcome {
    pub filter: FilterKind,
    pub quality: FilterQuality,
    pub trust: Option<f64>,
    pub detection_rate: f64,
}

/// Result of one seeded trial against the scenario's target cluster head.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub attack: String,
    pub fraction: f64,
    pub trial: usize,
    pub seed: u64,
    /// One entry per filter, in the order requested.
    pub filters: Vec<FilterOutcome>,
    /// Chosen by the first filter's ratings over every cluster head.
    pub selected_provider: Option<NodeId>,
}

impl TrialOutcome {
    pub fn outcome(&self, filter: FilterKind) -> Option<&FilterOutcome> {
        self.filters.iter().find(|f| f.filter == filter)
    }

    /// Detection rate of the first filter.
    pub fn detection_rate(&self) -> f64 {
        self.filters.first().map_or(0.0, |f| f.detection_rate)
    }
}

/// Runs the interaction phase, then evaluates every filter on the target
/// cluster head's recommendations.
pub fn run_trial(
    scenario: &ClusterScenario,
    filters: &[FilterKind],
    config: &BaselineConfig,
    trial: usize,
) -> Result<TrialOutcome> {
    if filters.is_empty() {
        return Err(Error::InvalidArgument("no filters requested".into()));
    }
    let stores = run_interaction_phase(scenario)?;
    let target = scenario.target();
    let (recs, labels) = stores.recommendations_for(target);

    let mut outcomes = Vec::with_capacity(filters.len());
    for &filter in filters {
        let verdict = filter.apply(&recs, config)?;
        let quality = FilterQuality::evaluate(&verdict, &labels)?;
        outcomes.push(FilterOutcome {
            filter,
            detection_rate: quality.detection_rate(),
            quality,
            trust: verdict.trust(),
        });
    }

    let mut ratings = BTreeMap::new();
    for &ch in scenario.true_trust.keys() {
        let (recs, _) = stores.recommendations_for(ch);
        if let Some(t) = filters[0].apply(&recs, config)?.trust() {
            ratings.insert(ch, t);
        }
    }

    Ok(TrialOutcome {
        attack: scenario.attack.label(),
        fraction: scenario.dishonest_fraction,
        trial,
        seed: scenario.seed,
        filters: outcomes,
        selected_provider: select_provider(&ratings),
    })
}

fn check_sweep(fractions: &[f64], trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::InvalidArgument(format!(
            "fraction {f} not in [0, 1]"
        )));
    }
    Ok(())
}

/// One unit of sweep work: a fully specified scenario and its trial index.
struct Job {
    scenario: ClusterScenario,
    trial: usize,
}

fn run_jobs(
    jobs: Vec<Job>,
    filters: &[FilterKind],
    config: &BaselineConfig,
) -> Result<Vec<TrialOutcome>> {
    jobs.into_par_iter()
        .map(|j| run_trial(&j.scenario, filters, config, j.trial))
        .collect()
}

fn variant(
    base: &ClusterScenario,
    attack: AttackProfile,
    fraction: f64,
    seed: u64,
) -> ClusterScenario {
    ClusterScenario {
        attack,
        dishonest_fraction: fraction,
        seed,
        ..base.clone()
    }
}

/// Deviation filter against `attack` at each dishonest fraction, `trials`
/// times each. Outcomes are ordered by fraction, then trial.
pub fn run_attack_sweep(
    base: &ClusterScenario,
    attack: AttackProfile,
    fractions: &[f64],
    trials: usize,
) -> Result<Vec<TrialOutcome>> {
    check_sweep(fractions, trials)?;
    attack.validate()?;
    let jobs = fractions
        .iter()
        .enumerate()
        .flat_map(|(fi, &f)| {
            (0..trials).map(move |t| Job {
                scenario: variant(
                    base,
                    attack,
                    f,
                    derive_seed(base.seed, &[fi as u64, t as u64]),
                ),
                trial: t,
            })
        })
        .collect();
    run_jobs(jobs, &[FilterKind::Deviation], &BaselineConfig::default())
}

/// Mean detection rate for one (offset level, fraction) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetCell {
    pub level: f64,
    pub fraction: f64,
    pub mean_detection_rate: f64,
    #[serde(skip)]
    pub trials: Vec<TrialOutcome>,
}

/// Mean-offset attacks at each level and fraction. Cells are ordered by
/// level, then fraction.
pub fn run_offset_sweep(
    base: &ClusterScenario,
    levels: &[f64],
    fractions: &[f64],
    trials: usize,
) -> Result<Vec<OffsetCell>> {
    check_sweep(fractions, trials)?;
    let mut jobs = Vec::new();
    for (li, &level) in levels.iter().enumerate() {
        let attack = AttackProfile::mean_offset(level);
        attack.validate()?;
        for (fi, &f) in fractions.iter().enumerate() {
            for t in 0..trials {
                let seed = derive_seed(base.seed, &[li as u64, fi as u64, t as u64]);
                jobs.push(Job {
                    scenario: variant(base, attack, f, seed),
                    trial: t,
                });
            }
        }
    }
    let outcomes = run_jobs(jobs, &[FilterKind::Deviation], &BaselineConfig::default())?;
    let mut chunks = outcomes.chunks(trials);
    let mut cells = Vec::new();
    for &level in levels {
        for &fraction in fractions {
            let trials = chunks.next().expect("one chunk per cell").to_vec();
            let mean_detection_rate =
                trials.iter().map(TrialOutcome::detection_rate).sum::<f64>() / trials.len() as f64;
            cells.push(OffsetCell {
                level,
                fraction,
                mean_detection_rate,
                trials,
            });
        }
    }
    Ok(cells)
}

/// Attacks and fractions for a filter comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonGrid {
    pub base: ClusterScenario,
    /// Each attack with the true trust of the attacked cluster head.
    pub attacks: Vec<(AttackProfile, f64)>,
    pub fractions: Vec<f64>,
    pub filters: Vec<FilterKind>,
    pub config: BaselineConfig,
}

impl ComparisonGrid {
    /// Bad-mouthing against trust 0.9 and ballot-stuffing against trust 0.3,
    /// 10%..45% dishonest, all four filters with default parameters.
    pub fn standard(base: ClusterScenario) -> Self {
        let attacks = [AttackKind::BadMouthing, AttackKind::BallotStuffing]
            .into_iter()
            .map(|k| (AttackProfile::new(k), default_target_trust(k)))
            .collect();
        ComparisonGrid {
            base,
            attacks,
            fractions: COMPARISON_FRACTIONS.to_vec(),
            filters: FilterKind::ALL.to_vec(),
            config: BaselineConfig::default(),
        }
    }
}

/// Every filter on identical recommendation sets for each attack, fraction
/// and trial. Outcomes are ordered by attack, fraction, then trial.
pub fn run_baseline_comparison(grid: &ComparisonGrid, trials: usize) -> Result<Vec<TrialOutcome>> {
    check_sweep(&grid.fractions, trials)?;
    let mut jobs = Vec::new();
    for (ai, (attack, trust)) in grid.attacks.iter().enumerate() {
        attack.validate()?;
        let mut base = grid.base.clone();
        let target = base.target();
        base.true_trust.insert(target, *trust);
        for (fi, &f) in grid.fractions.iter().enumerate() {
            for t in 0..trials {
                let seed = derive_seed(grid.base.seed, &[ai as u64, fi as u64, t as u64]);
                jobs.push(Job {
                    scenario: variant(&base, *attack, f, seed),
                    trial: t,
                });
            }
        }
    }
    run_jobs(jobs, &grid.filters, &grid.config)
}
