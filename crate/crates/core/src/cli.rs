//! `trustfilter` command line: single-shot filtering, scenario simulation,
//! experiment sweeps and the baseline comparison.
//!
//! Exit codes: 0 success, 2 input or usage error, 3 output not writable,
//! 4 internal invariant violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baseline::BaselineConfig;
use crate::deviation::{DeviationAnalysis, DeviationFilter};
use crate::error::Error;
use crate::filter::{FilterKind, FilterVerdict};
use crate::recommendation::RecommendationSet;
use crate::report::{self, Row};
use crate::sim::{
    default_target_trust, evaluate_provider_trust, run_attack_sweep, run_baseline_comparison,
    run_interaction_phase, run_offset_sweep, select_provider, AttackKind, AttackProfile,
    ClusterScenario, ComparisonGrid, NodeId, TrialOutcome, ATTACK_FRACTIONS, OFFSET_LEVELS,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "trustfilter",
    version,
    about = "Filter dishonest recommendations and run trust experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a file of recommendations (one value in [0, 1] per line)
    Filter(FilterArgs),
    /// Run one cluster scenario and report each cluster head's trust
    Simulate(SimulateArgs),
    /// Sweep one attack over dishonest fractions with the deviation filter
    Experiment(ExperimentArgs),
    /// Compare all four filters under bad-mouthing and ballot-stuffing
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    Bm,
    Bs,
    Ro,
    Offset,
}

impl AttackArg {
    fn kind(self) -> AttackKind {
        match self {
            AttackArg::Bm => AttackKind::BadMouthing,
            AttackArg::Bs => AttackKind::BallotStuffing,
            AttackArg::Ro => AttackKind::RandomOpinion,
            AttackArg::Offset => AttackKind::MeanOffset,
        }
    }
}

fn parse_filter(s: &str) -> Result<FilterKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Quartile filter tail probability
    #[arg(long)]
    pub q: Option<f64>,
    /// Control chart width in standard deviations
    #[arg(long)]
    pub k: Option<f64>,
    /// Iterative filter deviation threshold
    #[arg(long = "s-threshold")]
    pub s_threshold: Option<f64>,
    /// Iterative filter round limit
    #[arg(long = "max-rounds")]
    pub max_rounds: Option<usize>,
}

impl BaselineArgs {
    fn config(&self) -> BaselineConfig {
        let d = BaselineConfig::default();
        BaselineConfig {
            quartile_q: self.q.unwrap_or(d.quartile_q),
            chart_k: self.k.unwrap_or(d.chart_k),
            iterative_s: self.s_threshold.unwrap_or(d.iterative_s),
            iterative_max_rounds: self.max_rounds.unwrap_or(d.iterative_max_rounds),
        }
    }
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "deviation", value_parser = parse_filter)]
    pub filter: FilterKind,
    #[command(flatten)]
    pub baseline: BaselineArgs,
    /// Fixed reference point for the deviation filter instead of the median
    #[arg(long)]
    pub reference: Option<f64>,
    /// Print the dissimilarity ranking and the smoothing-factor sweep
    #[arg(long)]
    pub explain: bool,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    #[arg(long, default_value = "deviation", value_parser = parse_filter)]
    pub filter: FilterKind,
    #[command(flatten)]
    pub baseline: BaselineArgs,
    /// Overrides the scenario's seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Base scenario; defaults to four cluster heads and 30 recommenders
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub attack: Option<AttackArg>,
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Mean-offset levels (offset mode only)
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Summary table destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write one row per trial here
    #[arg(long = "trials-out")]
    pub trials_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub baseline: BaselineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "trials-out")]
    pub trials_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Output(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Output(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Output(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::LabelMismatch { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "trustfilter: error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        Command::Filter(a) => cmd_filter(&a, stdout),
        Command::Simulate(a) => cmd_simulate(&a, stdout),
        Command::Experiment(a) => cmd_experiment(&a, stdout, stderr),
        Command::Compare(a) => cmd_compare(&a, stdout, stderr),
    }
}

/// Renders into memory, then writes to `out` or stdout in one go.
fn emit(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    render: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
) -> CliResult {
    let mut buf = Vec::new();
    render(&mut buf).map_err(|e| CliError::Internal(format!("rendering output: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, &buf)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(&buf)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Output(format!("cannot write to stdout: {e}"))),
    }
}

fn load_scenario(path: &Path) -> CliResult<ClusterScenario> {
    Ok(ClusterScenario::from_file(path)?)
}

// ---- filter ----

#[derive(Serialize)]
struct FilterReport {
    filter: FilterKind,
    #[serde(flatten)]
    record: crate::filter::VerdictRecord,
    removed_values: Vec<f64>,
}

fn join_values(values: impl Iterator<Item = f64>, none: &str) -> String {
    let parts: Vec<String> = values.map(|v| format!("{v}")).collect();
    if parts.is_empty() {
        none.to_string()
    } else {
        parts.join(" ")
    }
}

pub fn cmd_filter(a: &FilterArgs, stdout: &mut dyn Write) -> CliResult {
    let recs = RecommendationSet::read_file(&a.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", a.input.display())))??;
    if recs.is_empty() {
        return Err(Error::EmptyInput.into());
    }
    if a.reference.is_some() && a.filter != FilterKind::Deviation {
        return Err(CliError::Input(
            "--reference applies to the deviation filter only".into(),
        ));
    }
    let deviation = match a.reference {
        Some(r) => DeviationFilter::with_reference(r),
        None => DeviationFilter::default(),
    };
    let (verdict, analysis): (FilterVerdict, Option<DeviationAnalysis>) = match a.filter {
        FilterKind::Deviation => (deviation.filter(&recs)?, Some(deviation.analyze(&recs)?)),
        kind => (kind.apply(&recs, &a.baseline.config())?, None),
    };
    let report = FilterReport {
        filter: a.filter,
        record: verdict.record(),
        removed_values: verdict.removed().values().collect(),
    };

    emit(a.out.as_deref(), stdout, |w| match a.format {
        Format::Plain => {
            writeln!(w, "filter: {}", a.filter)?;
            if a.filter == FilterKind::Deviation {
                writeln!(w, "{}", report.record)?;
            } else {
                let rec = &report.record;
                writeln!(
                    w,
                    "removed values: {}",
                    join_values(report.removed_values.iter().copied(), "(none)")
                )?;
                writeln!(w, "surviving: {}", rec.surviving)?;
                writeln!(w, "removed: {}", rec.removed)?;
                writeln!(w, "trust: {}", rec.trust.as_deref().unwrap_or("(none)"))?;
            }
            if let (true, Some(an)) = (a.explain, &analysis) {
                write_explain(w, an)?;
            }
            Ok(())
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut c = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            c.write_record([
                "filter",
                "dishonest_classes",
                "surviving",
                "removed",
                "trust",
            ])?;
            let rec = &report.record;
            c.write_record([
                a.filter.to_string(),
                rec.dishonest_classes
                    .iter()
                    .map(|v| format!("{v:.1}"))
                    .collect::<Vec<_>>()
                    .join(" "),
                rec.surviving.to_string(),
                rec.removed.to_string(),
                rec.trust.clone().unwrap_or_default(),
            ])?;
            c.flush()
        }
    })
}

fn write_explain(w: &mut Vec<u8>, an: &DeviationAnalysis) -> io::Result<()> {
    writeln!(w)?;
    writeln!(w, "reference: {:.4}", an.reference)?;
    writeln!(w, "class  frequency  df")?;
    for e in &an.ranked {
        writeln!(
            w,
            "{:<5}  {:<9}  {:.4}",
            e.class.to_string(),
            e.frequency,
            e.df
        )?;
    }
    writeln!(w, "suspicious set  removed  remaining  sf")?;
    for (i, row) in an.sweep.iter().enumerate() {
        let set: Vec<String> = row
            .suspicious_classes
            .iter()
            .map(|c| c.to_string())
            .collect();
        let mark = if an.selected == Some(i) { "  *" } else { "" };
        writeln!(
            w,
            "{:<14}  {:<7}  {:<9}  {:.4}{mark}",
            format!("{{{}}}", set.join(", ")),
            row.suspicious_frequency,
            row.remaining_frequency,
            row.sf
        )?;
    }
    Ok(())
}

// ---- simulate ----

#[derive(Serialize)]
struct ClusterHeadTrust {
    id: NodeId,
    trust: Option<f64>,
}

#[derive(Serialize)]
struct SimulationReport {
    seed: u64,
    filter: FilterKind,
    cluster_heads: Vec<ClusterHeadTrust>,
    selected_provider: Option<NodeId>,
}

fn fmt_trust(t: Option<f64>) -> String {
    t.map_or_else(|| "(none)".to_string(), |t| format!("{t:.4}"))
}

pub fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> CliResult {
    let mut scenario = load_scenario(&a.scenario)?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    let config = a.baseline.config();
    let stores = run_interaction_phase(&scenario)?;
    let mut heads = Vec::new();
    let mut ratings = BTreeMap::new();
    for &ch in scenario.true_trust.keys() {
        let trust = match evaluate_provider_trust(&stores, ch, a.filter, &config) {
            Ok(v) => v.trust(),
            Err(Error::EmptyInput) => None,
            Err(e) => return Err(e.into()),
        };
        if let Some(t) = trust {
            ratings.insert(ch, t);
        }
        heads.push(ClusterHeadTrust { id: ch, trust });
    }
    let report = SimulationReport {
        seed: scenario.seed,
        filter: a.filter,
        cluster_heads: heads,
        selected_provider: select_provider(&ratings),
    };

    emit(a.out.as_deref(), stdout, |w| match a.format {
        Format::Plain => {
            writeln!(w, "seed: {}", report.seed)?;
            writeln!(w, "filter: {}", report.filter)?;
            for h in &report.cluster_heads {
                writeln!(w, "CH {}: trust {}", h.id, fmt_trust(h.trust))?;
            }
            match report.selected_provider {
                Some(id) => writeln!(w, "selected provider: CH {id}"),
                None => writeln!(w, "no trusted provider"),
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut c = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            c.write_record(["seed", "ch", "trust", "selected"])?;
            for h in &report.cluster_heads {
                c.write_record([
                    report.seed.to_string(),
                    h.id.to_string(),
                    h.trust.map(|t| format!("{t:.4}")).unwrap_or_default(),
                    (report.selected_provider == Some(h.id)).to_string(),
                ])?;
            }
            c.flush()
        }
    })
}

// ---- experiment / compare ----

fn write_table<R: Row>(w: &mut Vec<u8>, rows: &[R], format: Format, seed: u64) -> io::Result<()> {
    match format {
        Format::Csv => report::write_csv(rows, w),
        Format::Json => report::write_json(rows, w),
        Format::Plain => {
            writeln!(w, "seed: {seed}")?;
            report::write_plain(rows, w)
        }
    }
}

fn emit_tables(
    outcomes: &[TrialOutcome],
    format: Format,
    seed: u64,
    out: Option<&Path>,
    trials_out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    if format != Format::Plain {
        let _ = writeln!(stderr, "seed: {seed}");
    }
    if let Some(path) = trials_out {
        let rows = report::quality_rows(outcomes);
        emit(Some(path), stdout, |w| write_table(w, &rows, format, seed))?;
    }
    let rows = report::summarize(outcomes);
    emit(out, stdout, |w| write_table(w, &rows, format, seed))
}

pub fn cmd_experiment(
    a: &ExperimentArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let file = a.scenario.as_deref().map(load_scenario).transpose()?;
    let attack = a
        .attack
        .map(AttackArg::kind)
        .or(file.as_ref().map(|s| s.attack.kind))
        .unwrap_or(AttackKind::BadMouthing);
    let seed = a
        .seed
        .or(file.as_ref().map(|s| s.seed))
        .unwrap_or(DEFAULT_SEED);
    let fractions = a
        .fractions
        .clone()
        .unwrap_or_else(|| ATTACK_FRACTIONS.to_vec());

    let profile = match attack {
        AttackKind::MeanOffset => AttackProfile::mean_offset(OFFSET_LEVELS[0]),
        kind => AttackProfile::new(kind),
    };
    let mut base = file.unwrap_or_else(|| {
        ClusterScenario::four_heads(default_target_trust(attack), profile, seed)
    });
    base.seed = seed;
    base.attack = profile;

    let outcomes = if attack == AttackKind::MeanOffset {
        let levels = a.levels.clone().unwrap_or_else(|| OFFSET_LEVELS.to_vec());
        run_offset_sweep(&base, &levels, &fractions, a.trials)?
            .into_iter()
            .flat_map(|c| c.trials)
            .collect()
    } else {
        if a.levels.is_some() {
            return Err(CliError::Input(
                "--levels applies to --attack offset only".into(),
            ));
        }
        run_attack_sweep(&base, profile, &fractions, a.trials)?
    };
    emit_tables(
        &outcomes,
        a.format,
        seed,
        a.out.as_deref(),
        a.trials_out.as_deref(),
        stdout,
        stderr,
    )
}

pub fn cmd_compare(a: &CompareArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let file = a.scenario.as_deref().map(load_scenario).transpose()?;
    let seed = a
        .seed
        .or(file.as_ref().map(|s| s.seed))
        .unwrap_or(DEFAULT_SEED);
    let mut base = file.unwrap_or_else(|| {
        ClusterScenario::four_heads(0.9, AttackProfile::new(AttackKind::BadMouthing), seed)
    });
    base.seed = seed;
    let mut grid = ComparisonGrid::standard(base);
    if let Some(f) = &a.fractions {
        grid.fractions = f.clone();
    }
    grid.config = a.baseline.config();
    let outcomes = run_baseline_comparison(&grid, a.trials)?;
    emit_tables(
        &outcomes,
        a.format,
        seed,
        a.out.as_deref(),
        a.trials_out.as_deref(),
        stdout,
        stderr,
    )
}
