//! Tabular experiment output: per-trial quality rows and per-cell summaries,
//! written as CSV, JSON, or an aligned plain-text table.

use std::io::{self, Write};

use serde::Serialize;

use crate::filter::FilterKind;
use crate::sim::TrialOutcome;

/// A fixed-column table row. Reals are rendered with four decimals.
pub trait Row: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn pct(fraction: f64) -> u32 {
    (fraction * 100.0).round() as u32
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityRow {
    pub filter: FilterKind,
    pub attack: String,
    pub dishonest_pct: u32,
    pub trial: usize,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub mcc: f64,
    pub fpr: f64,
    pub fnr: f64,
}

impl Row for QualityRow {
    const HEADER: &'static [&'static str] = &[
        "filter",
        "attack",
        "dishonest_pct",
        "trial",
        "tp",
        "tn",
        "fp",
        "fn",
        "mcc",
        "fpr",
        "fnr",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.filter.to_string(),
            self.attack.clone(),
            self.dishonest_pct.to_string(),
            self.trial.to_string(),
            self.tp.to_string(),
            self.tn.to_string(),
            self.fp.to_string(),
            self.fn_.to_string(),
            f4(self.mcc),
            f4(self.fpr),
            f4(self.fnr),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub filter: FilterKind,
    pub attack: String,
    pub dishonest_pct: u32,
    pub mean_mcc: f64,
    pub mean_fpr: f64,
    pub mean_fnr: f64,
    pub mean_detection_rate: f64,
}

impl Row for SummaryRow {
    const HEADER: &'static [&'static str] = &[
        "filter",
        "attack",
        "dishonest_pct",
        "mean_mcc",
        "mean_fpr",
        "mean_fnr",
        "mean_detection_rate",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.filter.to_string(),
            self.attack.clone(),
            self.dishonest_pct.to_string(),
            f4(self.mean_mcc),
            f4(self.mean_fpr),
            f4(self.mean_fnr),
            f4(self.mean_detection_rate),
        ]
    }
}

pub fn quality_rows(outcomes: &[TrialOutcome]) -> Vec<QualityRow> {
    outcomes
        .iter()
        .flat_map(|o| {
            o.filters.iter().map(move |f| {
                let c = f.quality.counts;
                QualityRow {
                    filter: f.filter,
                    attack: o.attack.clone(),
                    dishonest_pct: pct(o.fraction),
                    trial: o.trial,
                    tp: c.tp,
                    tn: c.tn,
                    fp: c.fp,
                    fn_: c.fn_,
                    mcc: f.quality.mcc,
                    fpr: f.quality.fpr,
                    fnr: f.quality.fnr,
                }
            })
        })
        .collect()
}

/// Means per (filter, attack, fraction), filter-major, otherwise in the
/// order cells first appear.
pub fn summarize(outcomes: &[TrialOutcome]) -> Vec<SummaryRow> {
    struct Acc {
        filter: FilterKind,
        attack: String,
        fraction: f64,
        n: f64,
        sums: [f64; 4],
    }
    let mut filters: Vec<FilterKind> = Vec::new();
    let mut cells: Vec<Acc> = Vec::new();
    for o in outcomes {
        for f in &o.filters {
            if !filters.contains(&f.filter) {
                filters.push(f.filter);
            }
            let q = &f.quality;
            let vals = [q.mcc, q.fpr, q.fnr, f.detection_rate];
            match cells
                .iter_mut()
                .find(|c| c.filter == f.filter && c.attack == o.attack && c.fraction == o.fraction)
            {
                Some(c) => {
                    c.n += 1.0;
                    c.sums.iter_mut().zip(vals).for_each(|(s, v)| *s += v);
                }
                None => cells.push(Acc {
                    filter: f.filter,
                    attack: o.attack.clone(),
                    fraction: o.fraction,
                    n: 1.0,
                    sums: vals,
                }),
            }
        }
    }
    filters
        .iter()
        .flat_map(|&filter| cells.iter().filter(move |c| c.filter == filter))
        .map(|c| SummaryRow {
            filter: c.filter,
            attack: c.attack.clone(),
            dishonest_pct: pct(c.fraction),
            mean_mcc: c.sums[0] / c.n,
            mean_fpr: c.sums[1] / c.n,
            mean_fnr: c.sums[2] / c.n,
            mean_detection_rate: c.sums[3] / c.n,
        })
        .collect()
}

pub fn write_csv<R: Row, W: Write>(rows: &[R], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()
}

pub fn write_json<R: Row, W: Write>(rows: &[R], mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}

pub fn write_plain<R: Row, W: Write>(rows: &[R], mut out: W) -> io::Result<()> {
    let body: Vec<Vec<String>> = rows.iter().map(Row::fields).collect();
    let widths: Vec<usize> = R::HEADER
        .iter()
        .enumerate()
        .map(|(i, h)| {
            body.iter()
                .map(|r| r[i].len())
                .chain([h.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(out, "{}", line(R::HEADER.to_vec()))?;
    for r in &body {
        writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{ConfusionCounts, FilterQuality};
    use crate::sim::FilterOutcome;

    fn outcome(
        attack: &str,
        fraction: f64,
        trial: usize,
        counts: [(FilterKind, ConfusionCounts); 2],
    ) -> TrialOutcome {
        TrialOutcome {
            attack: attack.into(),
            fraction,
            trial,
            seed: 0,
            filters: counts
                .into_iter()
                .map(|(filter, c)| {
                    let quality = FilterQuality::from(c);
                    FilterOutcome {
                        filter,
                        detection_rate: quality.detection_rate(),
                        quality,
                        trust: None,
                    }
                })
                .collect(),
            selected_provider: None,
        }
    }

    fn sample() -> Vec<TrialOutcome> {
        let perfect = ConfusionCounts::new(3, 27, 0, 0);
        let half = ConfusionCounts::new(1, 27, 0, 2);
        vec![
            outcome(
                "bm",
                0.1,
                0,
                [(FilterKind::Deviation, perfect), (FilterKind::Chart, half)],
            ),
            outcome(
                "bm",
                0.1,
                1,
                [
                    (FilterKind::Deviation, perfect),
                    (FilterKind::Chart, perfect),
                ],
            ),
            outcome(
                "bs",
                0.45,
                0,
                [(FilterKind::Deviation, half), (FilterKind::Chart, perfect)],
            ),
        ]
    }

    #[test]
    fn summary_groups_filter_major() {
        let rows = summarize(&sample());
        let keys: Vec<(String, String, u32)> = rows
            .iter()
            .map(|r| (r.filter.to_string(), r.attack.clone(), r.dishonest_pct))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("deviation".into(), "bm".into(), 10),
                ("deviation".into(), "bs".into(), 45),
                ("chart".into(), "bm".into(), 10),
                ("chart".into(), "bs".into(), 45),
            ]
        );
        assert_eq!(rows[0].mean_mcc, 1.0);
        assert!((rows[2].mean_fnr - 1.0 / 3.0).abs() < 1e-12);
        assert!((rows[2].mean_detection_rate - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&summarize(&sample()), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("filter,attack,dishonest_pct,mean_mcc,mean_fpr,mean_fnr,mean_detection_rate")
        );
        assert_eq!(
            lines.next(),
            Some("deviation,bm,10,1.0000,0.0000,0.0000,1.0000")
        );
        assert_eq!(text.lines().count(), 5);

        let mut buf = Vec::new();
        write_csv(&quality_rows(&sample()), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("filter,attack,dishonest_pct,trial,tp,tn,fp,fn,mcc,fpr,fnr\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn json_and_plain() {
        let mut buf = Vec::new();
        write_json(&quality_rows(&sample()), &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["fn"], 0);
        assert_eq!(v[0]["filter"], "deviation");

        let mut buf = Vec::new();
        write_plain(&summarize(&sample()), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text
            .lines()
            .next()
            .unwrap()
            .starts_with("filter     attack"));
        assert_eq!(text.lines().count(), 5);
    }
}
