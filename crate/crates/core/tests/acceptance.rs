//! Acceptance criteria. Each test prints one line:
//!
//! ```text
//! criterion <n> PASS|FAIL <name>: <measured values>
//! ```
//!
//! Run with `cargo test -p trustfilter --test acceptance -- --nocapture --test-threads=1`
//! to see every line in order.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use trustfilter::deviation::{
    dissimilarity, rank_by_dissimilarity, smoothing_factor, sweep_suspicious_sets, DeviationFilter,
};
use trustfilter::metrics::{fnr, fpr, mcc, ConfusionCounts, FilterQuality, Label};
use trustfilter::recommendation::{build_domain, weighted_median, ClassHistogram, ClassId};
use trustfilter::report::{summarize, SummaryRow};
use trustfilter::sim::{
    run_attack_sweep, run_baseline_comparison, run_offset_sweep, AttackKind, AttackProfile,
    ClusterScenario, ComparisonGrid, ATTACK_FRACTIONS, OFFSET_LEVELS,
};
use trustfilter::{detect_dishonest_classes, FilterKind, RecommendationSet};

const SEED: u64 = 42;
const WORKED_EXAMPLE: [f64; 10] = [0.1, 0.1, 0.2, 0.4, 0.4, 0.4, 0.6, 0.6, 0.8, 1.0];

// Tolerances and budgets.
const C1_BUDGET: Duration = Duration::from_millis(1);
const C2_TOL: f64 = 1e-9;
const C3_TOL: f64 = 1e-15;
const C4_TRIALS: usize = 50;
const C4_BUDGET: Duration = Duration::from_secs(5);
const C6_TRIALS: usize = 200;
const C6_L2_BAND: (f64, f64) = (0.55, 0.85);
const C6_BUDGET: Duration = Duration::from_secs(10);
const C7_TRIALS: usize = 100;
const C8_CASES: u32 = 1000;

/// Writes straight to the process stdout so the line shows even when the
/// harness captures test output.
fn line(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    line(&format!("criterion {n} {verdict} {name}: {detail}"));
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn class_list(classes: &BTreeSet<ClassId>) -> String {
    classes
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn c1_worked_example() {
    let input = RecommendationSet::from_values(&WORKED_EXAMPLE).unwrap();
    let verdict = detect_dishonest_classes(&input).unwrap();
    // best of several runs so one scheduler hiccup does not decide the outcome
    let elapsed = (0..20)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(detect_dishonest_classes(std::hint::black_box(&input)).unwrap());
            t.elapsed()
        })
        .min()
        .unwrap();
    let expected: BTreeSet<ClassId> = [0.8, 1.0]
        .iter()
        .map(|&v| ClassId::from_value(v).unwrap())
        .collect();
    let trust = verdict.record().trust.unwrap_or_default();
    let pass = verdict.dishonest_classes() == &expected
        && verdict.surviving().len() == 8
        && trust == "0.3500"
        && elapsed < C1_BUDGET;
    report(
        1,
        "worked example",
        pass,
        &format!(
            "classes {{{}}}, surviving {}, trust {trust}, {elapsed:?}",
            class_list(verdict.dishonest_classes()),
            verdict.surviving().len()
        ),
    );
}

#[test]
fn c2_golden_sf_table() {
    let input = RecommendationSet::from_values(&WORKED_EXAMPLE).unwrap();
    let analysis = DeviationFilter::with_reference(0.1)
        .analyze(&input)
        .unwrap();
    let expected = [7.29, 10.4, 8.55, 4.365, 2.93];
    let sf: Vec<f64> = analysis.sweep.iter().map(|r| r.sf).collect();
    let max_err = sf
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let winner = analysis.dishonest_classes();
    let expected_winner: BTreeSet<ClassId> = [0.8, 1.0]
        .iter()
        .map(|&v| ClassId::from_value(v).unwrap())
        .collect();
    let pass = sf.len() == expected.len() && max_err <= C2_TOL && winner == expected_winner;
    report(
        2,
        "golden smoothing-factor table",
        pass,
        &format!(
            "sf {sf:?}, max error {max_err:.1e}, winner {{{}}}",
            class_list(&winner)
        ),
    );
}

#[test]
fn c3_dissimilarity_vector() {
    let got = [
        dissimilarity(1.0, 1, 0.1).unwrap(),
        dissimilarity(0.6, 2, 0.1).unwrap(),
        dissimilarity(0.4, 3, 0.1).unwrap(),
    ];
    let expected = [0.81, 0.125, 0.03];
    let max_err = got
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report(
        3,
        "dissimilarity golden vector",
        max_err <= C3_TOL,
        &format!("{got:?}, max error {max_err:.1e}"),
    );
}

#[test]
fn c4_attack_perfection() {
    let start = Instant::now();
    let mut cells = Vec::new();
    let mut all_perfect = true;
    for (kind, trust) in [
        (AttackKind::BadMouthing, 0.9),
        (AttackKind::BallotStuffing, 0.3),
        (AttackKind::RandomOpinion, 0.5),
    ] {
        let attack = AttackProfile::new(kind);
        let base = ClusterScenario::four_heads(trust, attack, SEED);
        let outcomes = run_attack_sweep(&base, attack, &ATTACK_FRACTIONS, C4_TRIALS).unwrap();
        for &f in &ATTACK_FRACTIONS {
            let cell: Vec<_> = outcomes.iter().filter(|o| o.fraction == f).collect();
            let perfect = cell
                .iter()
                .filter(|o| {
                    let q = &o.filters[0].quality;
                    q.mcc == 1.0 && q.fpr == 0.0 && q.fnr == 0.0
                })
                .count();
            all_perfect &= perfect == cell.len();
            cells.push(format!(
                "{}@{:.0}% {perfect}/{}",
                attack.label(),
                f * 100.0,
                cell.len()
            ));
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "perfect detection under BM/BS/RO",
        all_perfect && elapsed < C4_BUDGET,
        &format!("perfect trials {}; {elapsed:.2?}", cells.join(", ")),
    );
}

#[test]
fn c5_majority_failure() {
    let mut values = vec![0.1; 18];
    values.extend([0.9; 12]);
    let truth: Vec<Label> = values
        .iter()
        .map(|&v| {
            if v == 0.1 {
                Label::Dishonest
            } else {
                Label::Honest
            }
        })
        .collect();
    let verdict =
        detect_dishonest_classes(&RecommendationSet::from_values(&values).unwrap()).unwrap();
    let q = FilterQuality::evaluate(&verdict, &truth).unwrap();
    report(
        5,
        "majority attack defeats the filter",
        q.mcc <= 0.0,
        &format!(
            "removed {{{}}}, mcc {:.4}",
            class_list(verdict.dishonest_classes()),
            q.mcc
        ),
    );
}

#[test]
fn c6_mean_offset_trend() {
    let start = Instant::now();
    let base = ClusterScenario::four_heads(0.3, AttackProfile::mean_offset(OFFSET_LEVELS[0]), SEED);
    let cells = run_offset_sweep(&base, &OFFSET_LEVELS, &ATTACK_FRACTIONS, C6_TRIALS).unwrap();
    let elapsed = start.elapsed();
    let nf = ATTACK_FRACTIONS.len();
    let rate = |li: usize, fi: usize| cells[li * nf + fi].mean_detection_rate;
    let level_mean: Vec<f64> = (0..OFFSET_LEVELS.len())
        .map(|li| (0..nf).map(|fi| rate(li, fi)).sum::<f64>() / nf as f64)
        .collect();
    let monotone_mean = level_mean.windows(2).all(|w| w[0] <= w[1]);
    let monotone_each =
        (0..nf).all(|fi| (1..OFFSET_LEVELS.len()).all(|li| rate(li - 1, fi) <= rate(li, fi)));
    let l4_perfect = (0..nf).all(|fi| rate(3, fi) == 1.0);
    let l2 = level_mean[1];
    let in_band = (C6_L2_BAND.0..=C6_L2_BAND.1).contains(&l2);
    let per_fraction: Vec<String> = (0..nf)
        .map(|fi| {
            let r: Vec<String> = (0..OFFSET_LEVELS.len())
                .map(|li| format!("{:.3}", rate(li, fi)))
                .collect();
            format!("{:.0}%[{}]", ATTACK_FRACTIONS[fi] * 100.0, r.join(" "))
        })
        .collect();
    report(
        6,
        "mean-offset detection trend",
        monotone_mean && monotone_each && l4_perfect && in_band && elapsed < C6_BUDGET,
        &format!(
            "level means {:?}, L2 {l2:.3} in {C6_L2_BAND:?}: {in_band}, per fraction {}; {elapsed:.2?}",
            level_mean.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            per_fraction.join(" ")
        ),
    );
}

fn comparison() -> Vec<SummaryRow> {
    let base = ClusterScenario::four_heads(0.9, AttackProfile::new(AttackKind::BadMouthing), SEED);
    let grid = ComparisonGrid::standard(base);
    summarize(&run_baseline_comparison(&grid, C7_TRIALS).unwrap())
}

fn cell<'a>(rows: &'a [SummaryRow], filter: FilterKind, attack: &str, pct: u32) -> &'a SummaryRow {
    rows.iter()
        .find(|r| r.filter == filter && r.attack == attack && r.dishonest_pct == pct)
        .unwrap_or_else(|| panic!("no row for {filter} {attack} {pct}"))
}

#[test]
fn c7_baseline_trends() {
    let rows = comparison();

    let fnr10 = cell(&rows, FilterKind::Chart, "bm", 10).mean_fnr;
    let fnr40 = cell(&rows, FilterKind::Chart, "bm", 40).mean_fnr;
    let a = fnr40 > fnr10;

    let low: Vec<(f64, f64)> = [10, 15, 20, 25]
        .iter()
        .map(|&p| {
            let r = cell(&rows, FilterKind::Iterative, "bm", p);
            (r.mean_fpr, r.mean_fnr)
        })
        .collect();
    let high = cell(&rows, FilterKind::Iterative, "bm", 45);
    let b = low.iter().all(|&(p, n)| p == 0.0 && n == 0.0)
        && (high.mean_fpr > 0.0 || high.mean_fnr > 0.0);

    let q_fpr = cell(&rows, FilterKind::Quartile, "bs", 10).mean_fpr;
    let c = q_fpr > 0.0;

    let mut losses = Vec::new();
    for attack in ["bm", "bs"] {
        for pct in [10, 15, 20, 25, 30, 35, 40, 45] {
            let dev = cell(&rows, FilterKind::Deviation, attack, pct).mean_mcc;
            for f in [
                FilterKind::Quartile,
                FilterKind::Chart,
                FilterKind::Iterative,
            ] {
                let other = cell(&rows, f, attack, pct).mean_mcc;
                if dev < other {
                    losses.push(format!("{attack}@{pct}% {f} {other:.3} > {dev:.3}"));
                }
            }
        }
    }
    let d = losses.is_empty();

    line(&format!(
        "criterion 7a {} chart FNR grows under BM: {fnr10:.4} at 10% -> {fnr40:.4} at 40%",
        if a { "PASS" } else { "FAIL" }
    ));
    line(&format!(
        "criterion 7b {} iterative clean below 30%, errors at 45%: below {low:?}, at 45% fpr {:.4} fnr {:.4}",
        if b { "PASS" } else { "FAIL" },
        high.mean_fpr,
        high.mean_fnr
    ));
    line(&format!(
        "criterion 7c {} quartile FPR under BS at 10%: {q_fpr:.4}",
        if c { "PASS" } else { "FAIL" }
    ));
    line(&format!(
        "criterion 7d {} deviation MCC dominates baselines: {} losing cells{}{}",
        if d { "PASS" } else { "FAIL" },
        losses.len(),
        if d { "" } else { ": " },
        losses.join("; ")
    ));
    report(
        7,
        "baseline trends",
        a && b && c && d,
        &format!("a={a} b={b} c={c} d={d}"),
    );
}

fn value_strategy() -> impl Strategy<Value = f64> {
    // grid values produce exact ties and boundary cases
    prop_oneof![0.0f64..=1.0, (0u8..=10).prop_map(|i| f64::from(i) / 10.0)]
}

fn values_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(value_strategy(), 1..60)
}

fn run_property<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config {
        cases: C8_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map(|_| C8_CASES)
        .map_err(|e| e.to_string())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn oracle_sf(bins: &[usize; 10], suspicious: &BTreeSet<usize>) -> f64 {
    let mut expanded: Vec<f64> = Vec::new();
    for (i, &n) in bins.iter().enumerate() {
        expanded.extend(std::iter::repeat_n((i + 1) as f64 / 10.0, n));
    }
    let n = expanded.len();
    let median = if n % 2 == 1 {
        expanded[n / 2]
    } else {
        (expanded[n / 2 - 1] + expanded[n / 2]) / 2.0
    };
    let removed: f64 = suspicious
        .iter()
        .map(|&i| {
            let d = (i + 1) as f64 / 10.0 - median;
            d * d / bins[i] as f64
        })
        .sum();
    let remaining: usize = n - suspicious.iter().map(|&i| bins[i]).sum::<usize>();
    remaining as f64 * removed
}

#[test]
fn c8_property_suites() {
    let mut results = Vec::new();

    results.push((
        "partition",
        run_property(values_strategy(), |values| {
            let input = RecommendationSet::from_values(&values).unwrap();
            let v = detect_dishonest_classes(&input).unwrap();
            prop_assert_eq!(v.surviving().len() + v.removed().len(), input.len());
            let rejoined = sorted(v.surviving().values().chain(v.removed().values()).collect());
            prop_assert_eq!(rejoined, sorted(values.clone()));
            for (r, &gone) in input.iter().zip(v.removed_mask()) {
                prop_assert_eq!(gone, v.dishonest_classes().contains(&r.class()));
            }
            Ok(())
        }),
    ));

    results.push((
        "permutation invariance",
        run_property(
            values_strategy().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
            |(values, shuffled)| {
                let a = detect_dishonest_classes(&RecommendationSet::from_values(&values).unwrap())
                    .unwrap();
                let b =
                    detect_dishonest_classes(&RecommendationSet::from_values(&shuffled).unwrap())
                        .unwrap();
                prop_assert_eq!(a.dishonest_classes(), b.dishonest_classes());
                prop_assert_eq!(
                    sorted(a.removed().values().collect()),
                    sorted(b.removed().values().collect())
                );
                match (a.trust(), b.trust()) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    (x, y) => prop_assert_eq!(x, y),
                }
                Ok(())
            },
        ),
    ));

    results.push((
        "frequency-scaling covariance",
        run_property((values_strategy(), 2usize..=5), |(values, c)| {
            let scaled: Vec<f64> = values
                .iter()
                .flat_map(|&v| std::iter::repeat_n(v, c))
                .collect();
            let a = detect_dishonest_classes(&RecommendationSet::from_values(&values).unwrap())
                .unwrap();
            let b = detect_dishonest_classes(&RecommendationSet::from_values(&scaled).unwrap())
                .unwrap();
            prop_assert_eq!(a.dishonest_classes(), b.dishonest_classes());
            prop_assert_eq!(b.removed().len(), c * a.removed().len());
            Ok(())
        }),
    ));

    let domain_strategy = prop::array::uniform10(0usize..8)
        .prop_filter("two or more classes", |b| {
            b.iter().filter(|&&n| n > 0).count() >= 2
        })
        .prop_flat_map(|bins| (Just(bins), prop::collection::vec(any::<bool>(), 10)));
    results.push((
        "smoothing factor vs brute force",
        run_property(domain_strategy, |(bins, pick)| {
            let present: Vec<usize> = (0..10).filter(|&i| bins[i] > 0).collect();
            let mut suspicious: BTreeSet<usize> =
                present.iter().copied().filter(|&i| pick[i]).collect();
            if suspicious.len() == present.len() {
                suspicious.remove(&present[0]);
            }
            let domain = build_domain(&ClassHistogram::from_counts(bins)).unwrap();
            let ranked = rank_by_dissimilarity(&domain, weighted_median(&domain).unwrap()).unwrap();
            let classes: BTreeSet<ClassId> = suspicious
                .iter()
                .map(|&i| ClassId::from_index(i + 1).unwrap())
                .collect();
            let got = smoothing_factor(&ranked, &classes).unwrap();
            let want = oracle_sf(&bins, &suspicious);
            prop_assert!(
                (got - want).abs() <= 1e-9 * want.max(1.0),
                "{} vs {}",
                got,
                want
            );
            // the sweep rows are the same quantity on ranking prefixes
            for row in sweep_suspicious_sets(&ranked) {
                let prefix: BTreeSet<ClassId> = row.suspicious_classes.iter().copied().collect();
                prop_assert!(
                    (row.sf - smoothing_factor(&ranked, &prefix).unwrap()).abs()
                        <= 1e-9 * row.sf.max(1.0)
                );
            }
            Ok(())
        }),
    ));

    let mut grid_failures = Vec::new();
    let mut grid_cases = 0;
    for tp in 0..=6u64 {
        for tn in 0..=6u64 {
            for fp in 0..=6u64 {
                for fn_ in 0..=6u64 {
                    grid_cases += 1;
                    let c = ConfusionCounts::new(tp, tn, fp, fn_);
                    let m = mcc(&c);
                    let perfect = fp == 0 && fn_ == 0 && tp > 0 && tn > 0;
                    let degenerate = [tp + fp, tp + fn_, tn + fp, tn + fn_].contains(&0);
                    let inverted = mcc(&ConfusionCounts::new(fn_, fp, tn, tp));
                    let swapped = ConfusionCounts::new(tn, tp, fn_, fp);
                    let ok = (m == 1.0) == perfect
                        && (degenerate || (-1.0 - 1e-12..=1.0 + 1e-12).contains(&m))
                        && (degenerate || (inverted + m).abs() < 1e-12)
                        && (mcc(&swapped) - m).abs() < 1e-12
                        && fpr(&c) == fnr(&swapped)
                        && (0.0..=1.0).contains(&fpr(&c))
                        && (0.0..=1.0).contains(&fnr(&c));
                    if !ok {
                        grid_failures.push(format!("{c:?}"));
                    }
                }
            }
        }
    }
    results.push((
        "mcc grid identities",
        if grid_failures.is_empty() {
            Ok(grid_cases)
        } else {
            Err(grid_failures.join(", "))
        },
    ));

    let pass = results.iter().all(|(_, r)| r.is_ok());
    let detail: Vec<String> = results
        .iter()
        .map(|(name, r)| match r {
            Ok(n) => format!("{name} ok ({n} cases)"),
            Err(e) => format!("{name} FAILED: {e}"),
        })
        .collect();
    report(8, "property suites", pass, &detail.join("; "));
}

#[test]
fn c9_experiment_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_trustfilter"))
            .args([
                "experiment",
                "--attack",
                "ro",
                "--trials",
                "20",
                "--seed",
                "7",
                "--out",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    report(
        9,
        "experiment determinism",
        a == b && !a.is_empty(),
        &format!("{} bytes, identical: {}", a.len(), a == b),
    );
}
