//! Experiment plumbing shared by the command-line tool: configuration
//! merging, seeded command runners, CSV/JSON tables, and run manifests.
//!
//! Every command is a pure function of its [`ExperimentConfig`], so
//! identical config and seed produce byte-identical output files. Each
//! data file written through [`execute`] gains a sidecar
//! `<file>.manifest.json` recording the tool version, RNG stream, config
//! snapshot, wall time and summary statistics; the wall time lives only in
//! the sidecar, keeping the data files themselves reproducible.

use crate::model::{self, LatinRectangle, LatinSquare};
use crate::sampler::{self, SampleConfig};
use crate::switchings;
use crate::{bounds, intercalates, oracle, ResourceError};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

// ---------------------------------------------------------------------------
// errors and exit codes
// ---------------------------------------------------------------------------

/// A failed command. [`HarnessError::exit_code`] fixes the process-level
/// contract: 1 for property violations, 2 for exhausted budgets, 3 for
/// usage, I/O and parse problems.
#[derive(Debug)]
pub enum HarnessError {
    Usage(String),
    /// A checked structural or statistical property failed.
    Violation(String),
    Resource(ResourceError),
    Io { path: PathBuf, source: std::io::Error },
    Parse(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Violation(_) => 1,
            HarnessError::Resource(_) => 2,
            HarnessError::Usage(_) | HarnessError::Io { .. } | HarnessError::Parse(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(msg) => write!(f, "usage: {msg}"),
            HarnessError::Violation(msg) => write!(f, "property violation: {msg}"),
            HarnessError::Resource(e) => e.fmt(f),
            HarnessError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            HarnessError::Parse(msg) => write!(f, "parse: {msg}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<ResourceError> for HarnessError {
    fn from(e: ResourceError) -> Self {
        HarnessError::Resource(e)
    }
}

impl From<oracle::CheckpointError> for HarnessError {
    fn from(e: oracle::CheckpointError) -> Self {
        match e {
            oracle::CheckpointError::Budget(r) => HarnessError::Resource(r),
            other => HarnessError::Parse(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Output format for tables; squares are always written in the canonical
/// text form except under `json`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// All experiment parameters, each optional so that a config file and
/// command-line flags can be merged (flags win). Unknown keys in config
/// files are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// Node-budget override (the `LATINLAB_BUDGET` env var also applies).
    pub budget: Option<u64>,
    /// Input file of squares (census/discrepancy), instead of sampling.
    pub input: Option<PathBuf>,
    /// Use exact-uniform small-order sampling instead of the chain.
    pub exact: Option<bool>,
    /// Tail thresholds ε for the census report.
    pub epsilons: Option<Vec<f64>>,
    /// Per-row intercalate cap for twist validity; defaults to `n`.
    pub cap: Option<u64>,
    /// Number of boxes per discrepancy scan.
    pub boxes: Option<usize>,
    pub strategy: Option<String>,
    /// Family size M for cover construction.
    pub cover_size: Option<usize>,
    /// Single degree for the bounds table; `all_d` covers 0..=n.
    pub d: Option<usize>,
    pub all_d: Option<bool>,
    /// Smallest order for verify-facts sweeps (largest is `n`).
    pub n_min: Option<usize>,
    /// Allow order-6 enumeration (hours of work, checkpointed).
    pub long_run: Option<bool>,
    pub checkpoint: Option<PathBuf>,
    /// Negative control: corrupt a sampled square and expect the audit to
    /// catch it.
    pub inject_fault: Option<bool>,
}

macro_rules! merge_fields {
    ($self:ident, $base:ident; $($field:ident),* $(,)?) => {
        ExperimentConfig { $($field: $self.$field.or($base.$field)),* }
    };
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text)
            .map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Field-by-field overlay: values present in `self` win over `base`.
    pub fn merged_over(self, base: ExperimentConfig) -> ExperimentConfig {
        merge_fields!(self, base;
            n, k, seed, samples, burn_in, thin, workers, out, format, budget,
            input, exact, epsilons, cap, boxes, strategy, cover_size, d,
            all_d, n_min, long_run, checkpoint, inject_fault,
        )
    }

    fn require_n(&self) -> Result<usize, HarnessError> {
        self.n.ok_or_else(|| HarnessError::Usage("--n is required".into()))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    fn sample_config(&self, n: usize, count: usize) -> SampleConfig {
        SampleConfig {
            n,
            seed: self.seed(),
            count,
            burn_in: self.burn_in,
            thinning: self.thin,
            workers: self.workers.unwrap_or(1),
        }
    }

    /// The squares a square-consuming command works on: parsed from
    /// `input` when given, otherwise sampled (exactly for small orders
    /// when `exact` is set).
    fn source_squares(&self, default_count: usize) -> Result<Vec<LatinSquare>, HarnessError> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let rects = if text.trim_start().starts_with('{') {
                vec![model::parse_json(&text).map_err(|e| HarnessError::Parse(e.to_string()))?]
            } else {
                model::parse_text_stream(&text)
                    .map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))?
            };
            return rects
                .into_iter()
                .map(|r| {
                    LatinSquare::from_rectangle(r)
                        .map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))
                })
                .collect();
        }
        let n = self.require_n()?;
        let count = self.samples.unwrap_or(default_count);
        if self.exact.unwrap_or(false) {
            Ok(sampler::sample_exact(n, count, self.seed())?)
        } else {
            Ok(sampler::sample(&self.sample_config(n, count)))
        }
    }
}

// ---------------------------------------------------------------------------
// tables and manifests
// ---------------------------------------------------------------------------

/// A rectangular report: named columns, stringly-typed cells. CSV output
/// uses a header row, `\n` line endings and `.` decimals; JSON output is
/// an array of objects with the same keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let array: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_string(), serde_json::Value::String(v.clone())))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            })
            .collect();
        serde_json::to_string_pretty(&array).expect("strings serialize") + "\n"
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Provenance sidecar for a data file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// RNG stream contract, [`sampler::RNG_ID`].
    pub rng: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub wall_ms: u64,
    pub summary: serde_json::Value,
}

/// `foo.csv` → `foo.csv.manifest.json`.
pub fn manifest_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    data_path.with_file_name(name)
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(contents.as_bytes()).map_err(io_err(&tmp))?;
    }
    std::fs::rename(&tmp, path).map_err(io_err(path))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// command dispatch
// ---------------------------------------------------------------------------

/// The available subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Census,
    Sample,
    VerifyFacts,
    ClassRatios,
    Enumerate,
    Discrepancy,
    Bounds,
    Cover,
    TwistCount,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Census => "census",
            CommandKind::Sample => "sample",
            CommandKind::VerifyFacts => "verify-facts",
            CommandKind::ClassRatios => "class-ratios",
            CommandKind::Enumerate => "enumerate",
            CommandKind::Discrepancy => "discrepancy",
            CommandKind::Bounds => "bounds",
            CommandKind::Cover => "cover",
            CommandKind::TwistCount => "twist-count",
        }
    }
}

/// What a runner produced: a table or preformatted text, plus summary
/// statistics for the manifest.
#[derive(Debug)]
pub struct CommandOutput {
    pub payload: Payload,
    pub summary: serde_json::Value,
}

#[derive(Debug)]
pub enum Payload {
    Table(Table),
    Text(String),
}

impl CommandOutput {
    fn render(&self, format: OutputFormat) -> String {
        match &self.payload {
            Payload::Table(t) => t.render(format),
            Payload::Text(s) => s.clone(),
        }
    }
}

/// Runs a command: writes the data file and its manifest when `out` is
/// configured, otherwise prints the rendered payload to stdout. Returns
/// the summary.
pub fn execute(
    kind: CommandKind,
    config: &ExperimentConfig,
) -> Result<serde_json::Value, HarnessError> {
    let start = Instant::now();
    let output = run(kind, config)?;
    let rendered = output.render(config.format());
    match &config.out {
        Some(path) => {
            write_atomic(path, &rendered)?;
            let manifest = RunManifest {
                tool: "latinlab".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                rng: sampler::RNG_ID.into(),
                command: kind.name().into(),
                config: config.clone(),
                wall_ms: start.elapsed().as_millis() as u64,
                summary: output.summary.clone(),
            };
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            write_atomic(&manifest_path(path), &(text + "\n"))?;
        }
        None => {
            print!("{rendered}");
        }
    }
    Ok(output.summary)
}

/// Pure dispatch without any file side effects (except the verify-facts
/// reproducer dump on violation).
pub fn run(kind: CommandKind, config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    match kind {
        CommandKind::Census => run_census(config),
        CommandKind::Sample => run_sample(config),
        CommandKind::VerifyFacts => run_verify_facts(config),
        CommandKind::ClassRatios => run_class_ratios(config),
        CommandKind::Enumerate => run_enumerate(config),
        CommandKind::Discrepancy => run_discrepancy(config),
        CommandKind::Bounds => run_bounds(config),
        CommandKind::Cover => run_cover(config),
        CommandKind::TwistCount => run_twist_count(config),
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

// ---------------------------------------------------------------------------
// census
// ---------------------------------------------------------------------------

fn run_census(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let squares = config.source_squares(100)?;
    if squares.is_empty() {
        return Err(HarnessError::Usage("census needs at least one square".into()));
    }
    let mut table = Table::new(vec![
        "index",
        "n",
        "intercalates",
        "max_per_row",
        "rate",
    ]);
    let mut counts = Vec::with_capacity(squares.len());
    for (i, l) in squares.iter().enumerate() {
        let census = intercalates::census(l);
        table.push(vec![
            i.to_string(),
            l.n().to_string(),
            census.total.to_string(),
            census.max_per_row().to_string(),
            fmt_f64(census.rate()),
        ]);
        counts.push(census.total as f64);
    }
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / m;
    let variance = if counts.len() > 1 {
        counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let n = squares[0].n() as f64;
    let epsilons = config.epsilons.clone().unwrap_or_else(|| vec![0.1, 0.25, 0.5]);
    let tails: serde_json::Map<String, serde_json::Value> = epsilons
        .iter()
        .map(|&eps| {
            let threshold = (1.0 - eps) * n * n / 4.0;
            let freq =
                counts.iter().filter(|&&c| c < threshold).count() as f64 / m;
            (format!("{eps}"), freq.into())
        })
        .collect();
    let mut summary = serde_json::Map::new();
    summary.insert("squares".into(), counts.len().into());
    summary.insert("mean_intercalates".into(), mean.into());
    summary.insert("variance".into(), variance.into());
    summary.insert("mean_rate".into(), (mean / (n * n)).into());
    summary.insert("tail_frequencies".into(), tails.into());
    if squares.len() == 1 {
        let census = intercalates::census(&squares[0]);
        let pairs: serde_json::Map<String, serde_json::Value> = census
            .per_pair
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&(i, j), &c)| (format!("{},{}", i + 1, j + 1), c.into()))
            .collect();
        summary.insert("intercalates_per_row_pair".into(), pairs.into());
    }
    Ok(CommandOutput { payload: Payload::Table(table), summary: summary.into() })
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

fn run_sample(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n = config.require_n()?;
    let count = config.samples.unwrap_or(1);
    let squares = if config.exact.unwrap_or(false) {
        sampler::sample_exact(n, count, config.seed())?
    } else {
        sampler::sample(&config.sample_config(n, count))
    };
    let text = match config.format() {
        OutputFormat::Csv => {
            model::to_text_stream(squares.iter().map(|l| &**l))
        }
        OutputFormat::Json => {
            let docs: Vec<serde_json::Value> = squares
                .iter()
                .map(|l| serde_json::from_str(&model::to_json(l)).expect("own json parses"))
                .collect();
            serde_json::to_string_pretty(&docs).expect("serializes") + "\n"
        }
    };
    let summary = serde_json::json!({
        "squares": squares.len(),
        "n": n,
        "burn_in": config.sample_config(n, count).effective_burn_in(),
        "thinning": config.sample_config(n, count).effective_thinning(),
    });
    Ok(CommandOutput { payload: Payload::Text(text), summary })
}

// ---------------------------------------------------------------------------
// verify-facts
// ---------------------------------------------------------------------------

fn run_verify_facts(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n_max = config.n.unwrap_or(8);
    let n_min = config.n_min.unwrap_or(4.min(n_max));
    if n_min < 4 || n_min > n_max {
        return Err(HarnessError::Usage(format!(
            "need 4 ≤ n_min ≤ n (got {n_min}..{n_max})"
        )));
    }
    let trials = config.samples.unwrap_or(100);
    let mut table = Table::new(vec![
        "n",
        "squares",
        "pairs_checked",
        "flips_checked",
        "single_joins",
        "double_joins",
        "twists_accepted",
    ]);
    let mut violation: Option<(LatinSquare, switchings::InvariantViolation)> = None;
    'orders: for n in n_min..=n_max {
        let mut config_n = config.clone();
        config_n.n = Some(n);
        config_n.samples = Some(trials);
        config_n.input = None;
        let squares = config_n.source_squares(trials)?;
        if config.inject_fault.unwrap_or(false) && n == n_max {
            // negative control: corrupt one square, prove the validating
            // pipeline catches it and reports like any other violation
            if let Some(first) = squares.first() {
                let mut rows = first.to_rows();
                rows[0][0] = rows[0][1];
                let detail = match LatinSquare::from_rows(&rows) {
                    Err(e) => e.to_string(),
                    Ok(_) => "corruption survived validation".into(),
                };
                let dump = reproducer_path(config);
                let mut body = format!("{detail}\n\n{n}\n");
                for row in &rows {
                    let cells: Vec<String> = row.iter().map(|s| (s + 1).to_string()).collect();
                    body.push_str(&cells.join(" "));
                    body.push('\n');
                }
                write_atomic(&dump, &body)?;
                return Err(HarnessError::Violation(format!(
                    "injected fault caught: {detail} (reproducer: {})",
                    dump.display()
                )));
            }
        }
        let mut audit_total = switchings::SwitchingAudit::default();
        let mut twists = 0u64;
        for l in &squares {
            match switchings::verify_switching_invariants(l) {
                Ok(audit) => {
                    audit_total.pairs_checked += audit.pairs_checked;
                    audit_total.flips_checked += audit.flips_checked;
                    audit_total.single_joins += audit.single_joins;
                    audit_total.double_joins += audit.double_joins;
                }
                Err(v) => {
                    violation = Some((l.clone(), v));
                    break 'orders;
                }
            }
            // twist contract on the truncated rectangle, where possible
            if n >= 6 {
                let rows = l.to_rows();
                let rect = LatinRectangle::from_rows(&rows[..3]).expect("truncation");
                let cap = config.cap.unwrap_or(n as u64);
                let before = intercalates::census(&rect).total;
                let choices = switchings::forward_twist_choices(&rect, cap, config.budget)?;
                if let Some(choice) = choices.first() {
                    let twisted = switchings::twist(&rect, choice, cap)
                        .expect("enumerated choices are valid");
                    let after = intercalates::census(&twisted).total;
                    if after != before + 1 {
                        violation = Some((
                            l.clone(),
                            switchings::InvariantViolation {
                                check: "twist adds one intercalate",
                                detail: format!("{before} → {after}"),
                            },
                        ));
                        break 'orders;
                    }
                    twists += 1;
                }
            }
        }
        table.push(vec![
            n.to_string(),
            squares.len().to_string(),
            audit_total.pairs_checked.to_string(),
            audit_total.flips_checked.to_string(),
            audit_total.single_joins.to_string(),
            audit_total.double_joins.to_string(),
            twists.to_string(),
        ]);
    }
    if let Some((square, v)) = violation {
        let dump = reproducer_path(config);
        let body = format!("{v}\n\n{}", model::to_text(&square));
        write_atomic(&dump, &body)?;
        return Err(HarnessError::Violation(format!(
            "{v} (reproducer: {})",
            dump.display()
        )));
    }
    let summary = serde_json::json!({ "orders": format!("{n_min}..={n_max}"), "trials": trials });
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

/// Where a violating square gets dumped: next to the requested output,
/// or the working directory when printing to stdout.
fn reproducer_path(config: &ExperimentConfig) -> PathBuf {
    config
        .out
        .clone()
        .map(|p| p.with_extension("reproducer.txt"))
        .unwrap_or_else(|| PathBuf::from("violation.reproducer.txt"))
}

// ---------------------------------------------------------------------------
// class-ratios
// ---------------------------------------------------------------------------

fn run_class_ratios(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n = config.require_n()?;
    if !(2..=5).contains(&n) {
        return Err(HarnessError::Usage("class-ratios supports 2 ≤ n ≤ 5".into()));
    }
    let opts = oracle::EnumerationOptions {
        budget: config.budget,
        histograms: true,
        ..Default::default()
    };
    let result = oracle::enumerate_squares(n, &opts)?;
    let class_size = |s: u64| result.class_sizes.get(&s).copied().unwrap_or(0);
    let max_s = result.class_sizes.keys().max().copied().unwrap_or(0);
    let mut table = Table::new(vec![
        "n",
        "s",
        "class_size",
        "next_class_size",
        "ratio",
        "ratio_bound",
        "ratio_ok",
        "skip_class_size",
        "skip_ratio",
        "skip_bound",
        "skip_ok",
    ]);
    let mut all_ok = true;
    for s in 0..=max_s {
        let size = class_size(s);
        let next = class_size(s + 1);
        let skip = class_size(s + 2);
        // single-step bound (n−2s)/((s+1)(n−2s−2)), defined for positive
        // denominator and non-empty class
        let denom = (s + 1) as i64 * (n as i64 - 2 * s as i64 - 2);
        let (ratio, bound, ok) = if size > 0 && denom > 0 {
            let ratio = next as f64 / size as f64;
            let bound = (n as f64 - 2.0 * s as f64) / denom as f64;
            // exact integer cross-multiplication
            let ok = (next as u128) * (denom as u128) <= (size as u128) * (n as u128 - 2 * s as u128);
            all_ok &= ok;
            (fmt_f64(ratio), fmt_f64(bound), ok.to_string())
        } else {
            ("".into(), "".into(), "".into())
        };
        // two-step bound n/s², defined for s ≥ 1 and non-empty class
        let (skip_ratio, skip_bound, skip_ok) = if size > 0 && s >= 1 {
            let ratio = skip as f64 / size as f64;
            let bound = n as f64 / (s * s) as f64;
            let ok = (skip as u128) * (s as u128 * s as u128) <= (size as u128) * n as u128;
            all_ok &= ok;
            (fmt_f64(ratio), fmt_f64(bound), ok.to_string())
        } else {
            ("".into(), "".into(), "".into())
        };
        table.push(vec![
            n.to_string(),
            s.to_string(),
            size.to_string(),
            next.to_string(),
            ratio,
            bound,
            ok,
            skip.to_string(),
            skip_ratio,
            skip_bound,
            skip_ok,
        ]);
    }
    let summary = serde_json::json!({
        "n": n,
        "total": result.total,
        "classes": result.class_sizes.len(),
        "all_bounds_hold": all_ok,
    });
    if !all_ok {
        return Err(HarnessError::Violation(format!(
            "a class ratio exceeded its bound at n={n}"
        )));
    }
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

// ---------------------------------------------------------------------------
// enumerate
// ---------------------------------------------------------------------------

fn run_enumerate(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n = config.require_n()?;
    let result = match (config.k, n) {
        (Some(k), _) => {
            let opts = oracle::EnumerationOptions {
                budget: config.budget,
                histograms: true,
                ..Default::default()
            };
            oracle::enumerate_rectangles(k, n, &opts)?
        }
        (None, 0..=5) => match &config.checkpoint {
            Some(path) => oracle::enumerate_squares_checkpointed(n, path, config.budget)?,
            None => {
                let opts = oracle::EnumerationOptions {
                    budget: config.budget,
                    histograms: true,
                    ..Default::default()
                };
                oracle::enumerate_squares(n, &opts)?
            }
        },
        (None, 6) if config.long_run.unwrap_or(false) => {
            let path = config.checkpoint.as_ref().ok_or_else(|| {
                HarnessError::Usage("order-6 enumeration needs --checkpoint".into())
            })?;
            oracle::enumerate_squares_checkpointed(n, path, config.budget)?
        }
        (None, _) => {
            return Err(HarnessError::Usage(
                "square enumeration supports n ≤ 5 (n = 6 behind --long-run with --checkpoint)"
                    .into(),
            ))
        }
    };
    let mut table = Table::new(vec!["metric", "key", "count"]);
    table.push(vec!["total".into(), "".into(), result.total.to_string()]);
    for (&count, &freq) in &result.intercalate_histogram {
        table.push(vec!["intercalates".into(), count.to_string(), freq.to_string()]);
    }
    for (&s, &freq) in &result.class_sizes {
        table.push(vec!["first_pair_class".into(), s.to_string(), freq.to_string()]);
    }
    let summary = serde_json::json!({
        "k": result.k,
        "n": result.n,
        "total": result.total,
        "mean_intercalates": result.mean_intercalates(),
    });
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

// ---------------------------------------------------------------------------
// discrepancy
// ---------------------------------------------------------------------------

fn run_discrepancy(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let squares = config.source_squares(1)?;
    let l = squares.first().ok_or_else(|| {
        HarnessError::Usage("discrepancy needs a square (sampled or from --input)".into())
    })?;
    let strategy: bounds::ScanStrategy = config
        .strategy
        .as_deref()
        .unwrap_or("uniform-element")
        .parse()
        .map_err(HarnessError::Usage)?;
    let count = config.boxes.unwrap_or(1000);
    let stats = bounds::box_scan(l, strategy, count, config.seed());
    let mut table = Table::new(vec![
        "n", "rows", "cols", "symbols", "vol", "observed", "expected", "deviation", "bound",
        "ratio", "seed", "strategy",
    ]);
    for s in &stats {
        table.push(vec![
            s.n.to_string(),
            s.rows.to_string(),
            s.cols.to_string(),
            s.symbols.to_string(),
            s.vol.to_string(),
            s.observed.to_string(),
            fmt_f64(s.expected),
            fmt_f64(s.deviation),
            fmt_f64(s.bound),
            fmt_f64(s.ratio),
            config.seed().to_string(),
            strategy.name().into(),
        ]);
    }
    let summary = serde_json::json!({
        "n": l.n(),
        "boxes": stats.len(),
        "strategy": strategy.name(),
        "max_ratio": bounds::max_ratio(&stats),
    });
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

fn run_bounds(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n = config.require_n()?;
    if n > 6 {
        return Err(HarnessError::Usage(
            "bounds tables with exact matching counts support n ≤ 6".into(),
        ));
    }
    let degrees: Vec<usize> = match (config.d, config.all_d.unwrap_or(config.d.is_none())) {
        (Some(d), false) => vec![d],
        _ => (0..=n).collect(),
    };
    let mut table = Table::new(vec![
        "n",
        "d",
        "graphs",
        "min_log_matchings",
        "max_log_matchings",
        "vdw_lower",
        "bregman_upper",
        "factor_lower",
        "factor_upper",
        "entropy_lower",
        "exact_graph_count",
        "ok",
    ]);
    let mut all_ok = true;
    for &d in &degrees {
        if d > n {
            return Err(HarnessError::Usage(format!("degree {d} exceeds n={n}")));
        }
        let sample = (n > 4).then(|| (config.samples.unwrap_or(200), config.seed()));
        let report = bounds::permanent_sandwich(n, d, sample)?;
        let (flo, fhi) = bounds::factorization_bounds(d, n);
        let exact_count = if n <= 4 {
            oracle::regular_bipartite_graphs(n, d)?.len().to_string()
        } else {
            "".into()
        };
        all_ok &= report.ok;
        table.push(vec![
            n.to_string(),
            d.to_string(),
            report.graphs.to_string(),
            fmt_f64(report.min_log_phi),
            fmt_f64(report.max_log_phi),
            fmt_f64(report.vdw_lower),
            fmt_f64(report.bregman_upper),
            fmt_f64(flo),
            fmt_f64(fhi),
            fmt_f64(bounds::or_lower_bound(d, n)),
            exact_count,
            report.ok.to_string(),
        ]);
    }
    let summary = serde_json::json!({ "n": n, "degrees": degrees, "all_ok": all_ok });
    if !all_ok {
        return Err(HarnessError::Violation(format!(
            "a matching-count bound failed at n={n}"
        )));
    }
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

// ---------------------------------------------------------------------------
// cover
// ---------------------------------------------------------------------------

fn run_cover(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n = config.require_n()?;
    let k = config.k.ok_or_else(|| HarnessError::Usage("--k is required".into()))?;
    if k == 0 || k > n {
        return Err(HarnessError::Usage(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
    }
    let m = config.cover_size.unwrap_or(1000);
    let family = bounds::build_cover(n, k, m, config.seed());
    let (lo, hi) = family.coverage_band();
    let mut table = Table::new(vec!["a", "b", "coverage", "band_low", "band_high", "within"]);
    for a in 0..n {
        for b in a + 1..n {
            let c = family.pair_coverage(a, b);
            let within = lo <= c as f64 && c as f64 <= hi;
            table.push(vec![
                (a + 1).to_string(),
                (b + 1).to_string(),
                c.to_string(),
                fmt_f64(lo),
                fmt_f64(hi),
                within.to_string(),
            ]);
        }
    }
    let summary = serde_json::json!({
        "n": n,
        "k": k,
        "family_size": m,
        "min_coverage": family.min_coverage(),
        "max_coverage": family.max_coverage(),
        "band": [lo, hi],
        "all_within_band": family.all_within_band(),
        "regime_ratio": family.regime_ratio(),
        "total_coverage": family.total_coverage(),
    });
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

// ---------------------------------------------------------------------------
// twist-count
// ---------------------------------------------------------------------------

fn run_twist_count(config: &ExperimentConfig) -> Result<CommandOutput, HarnessError> {
    let n = config.require_n()?;
    let k = config.k.unwrap_or(3);
    if n < 6 {
        return Err(HarnessError::Usage("twists need n ≥ 6 (six distinct columns)".into()));
    }
    if k < 2 || k >= n {
        return Err(HarnessError::Usage(format!(
            "twist counting needs 2 ≤ k < n, got k={k}, n={n}"
        )));
    }
    let count = config.samples.unwrap_or(10);
    let cap = config.cap.unwrap_or(n as u64);
    let rects = sampler::sample_rectangles(&config.sample_config(n, count), k);
    let mut table =
        Table::new(vec!["index", "k", "n", "intercalates", "valid_twists"]);
    let mut total = 0u64;
    for (i, rect) in rects.iter().enumerate() {
        let choices = switchings::forward_twist_choices(rect, cap, config.budget)?;
        total += choices.len() as u64;
        table.push(vec![
            i.to_string(),
            k.to_string(),
            n.to_string(),
            intercalates::census(rect).total.to_string(),
            choices.len().to_string(),
        ]);
    }
    let summary = serde_json::json!({
        "k": k,
        "n": n,
        "cap": cap,
        "rectangles": rects.len(),
        "mean_valid_twists": total as f64 / rects.len().max(1) as f64,
    });
    Ok(CommandOutput { payload: Payload::Table(table), summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let config = ExperimentConfig {
            n: Some(7),
            k: Some(3),
            seed: Some(99),
            samples: Some(50),
            epsilons: Some(vec![0.1, 0.5]),
            format: Some(OutputFormat::Json),
            out: Some(PathBuf::from("report.csv")),
            strategy: Some("size-grid".into()),
            all_d: Some(true),
            ..Default::default()
        };
        let text = config.to_toml_string();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = toml::from_str::<ExperimentConfig>("misspelled = 3\n");
        assert!(err.is_err());
    }

    #[test]
    fn flags_override_config_fields() {
        let file = ExperimentConfig { n: Some(5), seed: Some(1), ..Default::default() };
        let flags = ExperimentConfig { seed: Some(2), ..Default::default() };
        let merged = flags.merged_over(file);
        assert_eq!(merged.n, Some(5));
        assert_eq!(merged.seed, Some(2));
    }

    #[test]
    fn tables_render_csv_and_json() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        t.push(vec!["2".into(), "y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,x\n2,y\n");
        let parsed: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(parsed[1]["b"], "y");
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("dir/report.csv")),
            Path::new("dir/report.csv.manifest.json")
        );
    }

    #[test]
    fn census_on_a_known_square() {
        let config = ExperimentConfig {
            n: Some(4),
            samples: Some(1),
            exact: Some(true),
            seed: Some(3),
            ..Default::default()
        };
        let output = run_census(&config).unwrap();
        let Payload::Table(t) = &output.payload else { panic!("census yields a table") };
        assert_eq!(t.rows.len(), 1);
        assert_eq!(output.summary["squares"], 1);
    }

    #[test]
    fn class_ratio_bounds_hold_at_tiny_orders() {
        for n in [4usize, 5] {
            let config = ExperimentConfig { n: Some(n), ..Default::default() };
            let output = run_class_ratios(&config).unwrap();
            assert_eq!(output.summary["all_bounds_hold"], true);
            let expected = if n == 4 { 576 } else { 161_280 };
            assert_eq!(output.summary["total"], expected);
        }
    }

    #[test]
    fn enumerate_rejects_large_orders_without_gate() {
        let config = ExperimentConfig { n: Some(7), ..Default::default() };
        let err = run_enumerate(&config).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn verify_facts_passes_and_catches_injected_fault() {
        let config = ExperimentConfig {
            n: Some(5),
            n_min: Some(4),
            samples: Some(5),
            seed: Some(7),
            ..Default::default()
        };
        run_verify_facts(&config).unwrap();
        let bad = ExperimentConfig {
            inject_fault: Some(true),
            out: Some(std::env::temp_dir().join("latinlab-fault-test.csv")),
            ..config
        };
        let err = run_verify_facts(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 1, "fault not caught: {err}");
    }

    #[test]
    fn bounds_table_is_consistent() {
        let config = ExperimentConfig { n: Some(3), all_d: Some(true), ..Default::default() };
        let output = run_bounds(&config).unwrap();
        assert_eq!(output.summary["all_ok"], true);
        let Payload::Table(t) = &output.payload else { panic!() };
        assert_eq!(t.rows.len(), 4); // d = 0..=3
    }

    #[test]
    fn cover_summary_identities() {
        let config = ExperimentConfig {
            n: Some(10),
            k: Some(4),
            cover_size: Some(40),
            seed: Some(5),
            ..Default::default()
        };
        let output = run_cover(&config).unwrap();
        assert_eq!(output.summary["total_coverage"], 40 * 6);
        let Payload::Table(t) = &output.payload else { panic!() };
        assert_eq!(t.rows.len(), 45);
    }

    #[test]
    fn discrepancy_scan_reports_ratios() {
        let config = ExperimentConfig {
            n: Some(8),
            boxes: Some(20),
            seed: Some(11),
            burn_in: Some(200),
            ..Default::default()
        };
        let output = run_discrepancy(&config).unwrap();
        let max = output.summary["max_ratio"].as_f64().unwrap();
        assert!(max.is_finite() && max >= 0.0);
    }

    #[test]
    fn twist_count_runs_on_sampled_rectangles() {
        let config = ExperimentConfig {
            n: Some(8),
            k: Some(2),
            samples: Some(2),
            seed: Some(13),
            burn_in: Some(100),
            thin: Some(50),
            ..Default::default()
        };
        let output = run_twist_count(&config).unwrap();
        assert_eq!(output.summary["rectangles"], 2);
    }

    #[test]
    fn execute_writes_data_and_manifest_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("ratios.csv");
        let config = ExperimentConfig {
            n: Some(4),
            out: Some(out.clone()),
            ..Default::default()
        };
        let summary = execute(CommandKind::ClassRatios, &config).unwrap();
        assert_eq!(summary["total"], 576);
        let data = std::fs::read_to_string(&out).unwrap();
        assert!(data.starts_with("n,s,class_size"));
        let manifest_text = std::fs::read_to_string(manifest_path(&out)).unwrap();
        let manifest: RunManifest = serde_json::from_str(&manifest_text).unwrap();
        assert_eq!(manifest.command, "class-ratios");
        assert_eq!(manifest.rng, sampler::RNG_ID);
        assert_eq!(manifest.config.n, Some(4));
    }

    #[test]
    fn identical_config_gives_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let config = |path: PathBuf| ExperimentConfig {
            n: Some(6),
            boxes: Some(30),
            seed: Some(21),
            burn_in: Some(300),
            out: Some(path),
            ..Default::default()
        };
        let a_path = dir.path().join("a.csv");
        let b_path = dir.path().join("b.csv");
        execute(CommandKind::Discrepancy, &config(a_path.clone())).unwrap();
        execute(CommandKind::Discrepancy, &config(b_path.clone())).unwrap();
        let a = std::fs::read(&a_path).unwrap();
        let b = std::fs::read(&b_path).unwrap();
        assert_eq!(a, b);
    }
}
