//! Command-line front end. All real work lives in [`latinlab::harness`];
//! this binary only maps flags onto an [`ExperimentConfig`], merges in an
//! optional TOML config file (flags win), and translates errors to exit
//! codes: 0 success, 1 property violation, 2 budget exhausted, 3 usage.

use clap::{Args, Parser, Subcommand};
use latinlab::harness::{self, CommandKind, ExperimentConfig, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "latinlab",
    version,
    about = "Latin-square workbench: censuses, switchings, twists, sampling, counting bounds",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Default)]
struct Common {
    /// Order of the squares (columns/symbols for rectangles)
    #[arg(long)]
    n: Option<usize>,

    /// Number of rows, where a rectangle shape applies
    #[arg(long)]
    k: Option<usize>,

    /// RNG seed; identical config and seed give byte-identical output
    #[arg(long)]
    seed: Option<u64>,

    /// How many squares to sample or trials to run
    #[arg(long)]
    samples: Option<usize>,

    /// Chain moves before the first sample (default n³)
    #[arg(long)]
    burn_in: Option<u64>,

    /// Chain moves between samples (default n³)
    #[arg(long)]
    thin: Option<u64>,

    /// Independent sampling chains
    #[arg(long)]
    workers: Option<usize>,

    /// Output file (stdout when omitted); a `.manifest.json` sidecar is
    /// written next to it
    #[arg(long)]
    out: Option<PathBuf>,

    /// Table format: csv or json
    #[arg(long)]
    format: Option<OutputFormat>,

    /// TOML config file supplying any of these keys; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,

    /// Node budget for exhaustive searches (or set LATINLAB_BUDGET)
    #[arg(long)]
    budget: Option<u64>,
}

impl Common {
    fn split(self) -> (Option<PathBuf>, ExperimentConfig) {
        (
            self.config,
            ExperimentConfig {
                n: self.n,
                k: self.k,
                seed: self.seed,
                samples: self.samples,
                burn_in: self.burn_in,
                thin: self.thin,
                workers: self.workers,
                out: self.out,
                format: self.format,
                budget: self.budget,
                ..Default::default()
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Intercalate census over sampled squares or an input file
    Census {
        #[command(flatten)]
        common: Common,
        /// Read squares from a file (blank-line-separated text or JSON)
        /// instead of sampling
        #[arg(long)]
        input: Option<PathBuf>,
        /// Draw exactly uniformly by full enumeration (n ≤ 5)
        #[arg(long)]
        exact: bool,
        /// Tail thresholds ε for the frequency of N < (1−ε)·n²/4
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },

    /// Draw squares from the ±1-move chain and print or save them
    Sample {
        #[command(flatten)]
        common: Common,
        /// Draw exactly uniformly by full enumeration (n ≤ 5)
        #[arg(long)]
        exact: bool,
    },

    /// Audit the switching calculus on sampled squares across orders
    VerifyFacts {
        #[command(flatten)]
        common: Common,
        /// Smallest order to audit (the largest is --n)
        #[arg(long)]
        n_min: Option<usize>,
        /// Per-row intercalate cap used by the twist checks
        #[arg(long)]
        cap: Option<u64>,
        /// Negative control: corrupt one square and require the audit to
        /// catch it (exits 1 when it does)
        #[arg(long)]
        inject_fault: bool,
    },

    /// Exact per-class counts with the one- and two-step ratio bounds
    ClassRatios {
        #[command(flatten)]
        common: Common,
    },

    /// Exhaustive counts and histograms for small orders
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Allow the order-6 run (hours; requires --checkpoint)
        #[arg(long)]
        long_run: bool,
        /// Resumable progress file for square enumeration (required at
        /// order 6)
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },

    /// Box deviations against the √vol·ln n + n·ln²n envelope
    Discrepancy {
        #[command(flatten)]
        common: Common,
        /// Read the square from a file instead of sampling one
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of boxes to scan
        #[arg(long)]
        boxes: Option<usize>,
        /// Box strategy: uniform-element, size-grid or structured-intervals
        #[arg(long)]
        strategy: Option<String>,
    },

    /// Matching-count sandwich and graph-count bounds for regular graphs
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Single degree to tabulate
        #[arg(long)]
        d: Option<usize>,
        /// Tabulate every degree 0..=n (the default when --d is absent)
        #[arg(long)]
        all_d: bool,
    },

    /// Random k-subset family with per-pair coverage concentration
    Cover {
        #[command(flatten)]
        common: Common,
        /// Family size M
        #[arg(long = "size")]
        cover_size: Option<usize>,
    },

    /// Count valid twists on sampled k×n rectangles
    TwistCount {
        #[command(flatten)]
        common: Common,
        /// Per-row intercalate cap defining a good rectangle
        #[arg(long)]
        cap: Option<u64>,
    },
}

impl Command {
    /// (what to run, config file if any, flag-supplied config fields)
    fn into_request(self) -> (CommandKind, Option<PathBuf>, ExperimentConfig) {
        match self {
            Command::Census { common, input, exact, epsilons } => {
                let (path, mut config) = common.split();
                config.input = input;
                config.exact = exact.then_some(true);
                config.epsilons = epsilons;
                (CommandKind::Census, path, config)
            }
            Command::Sample { common, exact } => {
                let (path, mut config) = common.split();
                config.exact = exact.then_some(true);
                (CommandKind::Sample, path, config)
            }
            Command::VerifyFacts { common, n_min, cap, inject_fault } => {
                let (path, mut config) = common.split();
                config.n_min = n_min;
                config.cap = cap;
                config.inject_fault = inject_fault.then_some(true);
                (CommandKind::VerifyFacts, path, config)
            }
            Command::ClassRatios { common } => {
                let (path, config) = common.split();
                (CommandKind::ClassRatios, path, config)
            }
            Command::Enumerate { common, long_run, checkpoint } => {
                let (path, mut config) = common.split();
                config.long_run = long_run.then_some(true);
                config.checkpoint = checkpoint;
                (CommandKind::Enumerate, path, config)
            }
            Command::Discrepancy { common, input, boxes, strategy } => {
                let (path, mut config) = common.split();
                config.input = input;
                config.boxes = boxes;
                config.strategy = strategy;
                (CommandKind::Discrepancy, path, config)
            }
            Command::Bounds { common, d, all_d } => {
                let (path, mut config) = common.split();
                config.d = d;
                config.all_d = all_d.then_some(true);
                (CommandKind::Bounds, path, config)
            }
            Command::Cover { common, cover_size } => {
                let (path, mut config) = common.split();
                config.cover_size = cover_size;
                (CommandKind::Cover, path, config)
            }
            Command::TwistCount { common, cap } => {
                let (path, mut config) = common.split();
                config.cap = cap;
                (CommandKind::TwistCount, path, config)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(3),
            };
        }
    };
    let (kind, config_path, flags) = cli.command.into_request();
    let config = match config_path {
        Some(path) => match ExperimentConfig::from_toml_file(&path) {
            Ok(base) => flags.merged_over(base),
            Err(e) => {
                eprintln!("latinlab: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => flags,
    };
    match harness::execute(kind, &config) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latinlab {}: {e}", kind.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
