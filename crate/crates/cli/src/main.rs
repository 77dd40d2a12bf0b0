//! `rfsa` command-line interface.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rfsa::info::BinStrategy;
use rfsa::rank::ScoreMode;
use rfsa::synth::SignalSpec;
use rfsa::table::HeaderMode;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "rfsa",
    version,
    about = "Feature ranking and profiling for ransomware transaction tables"
)]
struct Cli {
    /// Input CSV.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory (a CSV file for `synth`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run configuration JSON; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON schema override for the input columns.
    #[arg(long, global = true)]
    schema: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    header: Option<HeaderArg>,
    /// Raise log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeaderArg {
    Yes,
    No,
    Detect,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    Mi,
    Gini,
    Combined,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Quantile,
    Equal,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic table with planted signal.
    Synth(SynthArgs),
    /// Dataset statistics, column profiles and histograms.
    Profile,
    /// Drop duplicate rows.
    Clean,
    /// Fit or replay skew-correcting transforms.
    Transform(TransformArgs),
    /// Rank features and keep the top k.
    Select(SelectArgs),
    /// Cross-validate a tree on a feature subset.
    Evaluate(EvaluateArgs),
    /// Profiles, correlations and group tables; figure series with `--figures`.
    Report(ReportArgs),
    /// Clean, transform, encode, score, select and evaluate.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    /// Planted signal as `column=strength,...`.
    #[arg(long, value_delimiter = ',')]
    signal: Vec<String>,
    /// Class probabilities of A, S and SS.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    weights: Option<Vec<f64>>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TransformArgs {
    /// Fit the default plan and write transforms.json.
    #[arg(long)]
    fit: bool,
    /// Replay a transform spec file.
    #[arg(long)]
    apply: Option<PathBuf>,
}

#[derive(Args)]
struct ScoringArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    score: Option<ScoreArg>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, value_enum)]
    bin_strategy: Option<StrategyArg>,
    /// Report each feature's root split decrease in weighted and
    /// unnormalized form.
    #[arg(long)]
    literal_eq5: bool,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long)]
    tree_depth: Option<usize>,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    cv: CvArgs,
    #[arg(long)]
    tree_depth: Option<usize>,
    /// Comma-separated names or the path of a `select` output.
    #[arg(long)]
    features: String,
}

#[derive(Args)]
struct ReportArgs {
    /// Also write one CSV per figure under `figures/`.
    #[arg(long)]
    figures: bool,
    /// Transform spec to replay instead of fitting.
    #[arg(long)]
    transforms: Option<PathBuf>,
    #[arg(long)]
    encode_correlation: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    cv: CvArgs,
    /// Depth of the importance tree.
    #[arg(long)]
    tree_depth: Option<usize>,
    /// Depth of the evaluated tree.
    #[arg(long)]
    eval_depth: Option<usize>,
    #[arg(long)]
    transforms: Option<PathBuf>,
    #[arg(long)]
    encode_correlation: bool,
}

impl ScoringArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(s) = self.score {
            cfg.score = match s {
                ScoreArg::Mi => ScoreMode::Mi,
                ScoreArg::Gini => ScoreMode::Gini,
                ScoreArg::Combined => ScoreMode::Combined,
            };
        }
        if let Some(b) = self.bins {
            cfg.binning.bins = b;
        }
        if let Some(s) = self.bin_strategy {
            cfg.binning.strategy = match s {
                StrategyArg::Quantile => BinStrategy::Quantile,
                StrategyArg::Equal => BinStrategy::EqualWidth,
            };
        }
        cfg.literal_eq5 |= self.literal_eq5;
    }
}

impl CvArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(f) = self.folds {
            cfg.cv.folds = f;
        }
        if let Some(m) = self.min_leaf {
            cfg.eval_tree.min_leaf = m;
        }
    }
}

fn parse_signal(items: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (name, eps) = item.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--signal expects column=strength, got {item:?}"))
            })?;
            let eps = eps
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad signal strength in {item:?}")))?;
            Ok((name.trim().to_owned(), eps))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = cli.input {
        cfg.input = Some(p);
    }
    if let Some(s) = cli.schema {
        cfg.schema = Some(s);
    }
    if let Some(h) = cli.header {
        cfg.header = match h {
            HeaderArg::Yes => HeaderMode::Present,
            HeaderArg::No => HeaderMode::Absent,
            HeaderArg::Detect => HeaderMode::Detect,
        };
    }
    if let Some(s) = cli.seed {
        cfg.cv.seed = s;
    }
    let out_given = cli.out.is_some();
    if let Some(o) = cli.out.clone() {
        cfg.out = o;
    }

    match cli.command {
        Command::Synth(a) => {
            let mut spec = SignalSpec {
                n_rows: a.rows,
                seed: cli.seed.unwrap_or(0),
                signal_features: parse_signal(&a.signal)?,
                ..SignalSpec::default()
            };
            if let Some(w) = a.weights {
                spec.class_weights = [w[0], w[1], w[2]];
            }
            let out = if out_given {
                cfg.out
            } else {
                PathBuf::from("synth.csv")
            };
            return commands::synth(&spec, &out);
        }
        Command::Profile | Command::Clean => {}
        Command::Transform(ref a) => {
            if a.fit {
                cfg.transforms = None;
            }
        }
        Command::Select(ref a) => {
            a.scoring.apply(&mut cfg);
            if let Some(d) = a.tree_depth {
                cfg.score_tree.max_depth = d;
            }
        }
        Command::Evaluate(ref a) => {
            a.cv.apply(&mut cfg);
            if let Some(d) = a.tree_depth {
                cfg.eval_tree.max_depth = d;
            }
        }
        Command::Report(ref a) => {
            if let Some(t) = &a.transforms {
                cfg.transforms = Some(t.clone());
            }
            cfg.encode_correlation |= a.encode_correlation;
        }
        Command::Pipeline(ref a) => {
            a.scoring.apply(&mut cfg);
            a.cv.apply(&mut cfg);
            if let Some(d) = a.tree_depth {
                cfg.score_tree.max_depth = d;
            }
            if let Some(d) = a.eval_depth {
                cfg.eval_tree.max_depth = d;
            }
            if let Some(t) = &a.transforms {
                cfg.transforms = Some(t.clone());
            }
            cfg.encode_correlation |= a.encode_correlation;
        }
    }
    cfg.validate()?;

    match cli.command {
        Command::Synth(_) => unreachable!("handled above"),
        Command::Profile => commands::profile(&cfg),
        Command::Clean => commands::clean(&cfg),
        Command::Transform(a) => commands::transform(&cfg, a.apply.as_deref()),
        Command::Select(_) => commands::select(&cfg),
        Command::Evaluate(a) => commands::evaluate(&cfg, &a.features),
        Command::Report(a) => commands::report(&cfg, a.figures),
        Command::Pipeline(_) => commands::pipeline(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
