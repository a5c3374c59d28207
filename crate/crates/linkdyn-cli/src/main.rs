//! `linkdyn` command-line interface.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on configuration or
//! input errors (including flag parse errors).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use linkdyn::dataset::Task;
use linkdyn::ingest::NominationRule;
use linkdyn::models::{ClassifierKind, TrainConfig};
use linkdyn::pipeline::{
    run_build, run_dataset, run_eval, run_pipeline, run_rank, run_stats, run_synth, run_train,
    BuildCmd, DatasetCmd, EvalCmd, NetworkKind, PipelineCmd, RankCmd, StatsCmd, SynthCmd, TrainCmd,
};
use linkdyn::synth::SynthConfig;

/// Temporal social-network link formation and persistence analysis.
#[derive(Parser)]
#[command(name = "linkdyn", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Hop bound for formation negatives: a number or `all`.
#[derive(Debug, Clone, Copy)]
struct MaxHops(Option<u32>);

impl FromStr for MaxHops {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(MaxHops(None));
        }
        s.parse::<u32>()
            .map(|h| MaxHops(Some(h)))
            .map_err(|_| format!("expected a hop count or 'all', got {s:?}"))
    }
}

fn parse_k_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.is_empty()) {
        out.push(
            part.parse::<usize>()
                .map_err(|_| format!("bad k value {part:?}"))?,
        );
    }
    if out.is_empty() {
        return Err("k list is empty".into());
    }
    Ok(out)
}

fn parse_classifiers(s: &str) -> Result<Vec<ClassifierKind>, String> {
    if s == "all" {
        return Ok(ClassifierKind::all().to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.is_empty()) {
        out.push(part.parse::<ClassifierKind>().map_err(|e| e.to_string())?);
    }
    if out.is_empty() {
        return Err("classifier list is empty".into());
    }
    Ok(out)
}

/// Hyperparameters shared by the training commands.
#[derive(Args, Debug, Clone)]
struct TrainOpts {
    /// Random seed for splits, sampling, and stochastic training.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gradient-descent epoch cap.
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    /// Base learning rate (decays as 1/sqrt(t)).
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    /// L2 regularization strength.
    #[arg(long, default_value_t = 1e-3)]
    regularization: f64,
    /// Neighbors for k-NN.
    #[arg(long, default_value_t = 5)]
    k_neighbors: usize,
    /// Trees in the random forest.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Maximum tree depth.
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    /// RBF kernel width (defaults to 1/feature count).
    #[arg(long)]
    rbf_gamma: Option<f64>,
}

impl TrainOpts {
    fn to_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            regularization: self.regularization,
            k_neighbors: self.k_neighbors,
            tree_count: self.trees,
            max_depth: self.max_depth,
            rbf_gamma: self.rbf_gamma,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic co-evolving world and write its input files.
    Synth {
        /// Synth config TOML; omitted means built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build network snapshots from a data directory.
    Build {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "activity")]
        network: NetworkKind,
        /// Contact events per semester required for an activity edge.
        #[arg(long, default_value_t = 5)]
        threshold: u32,
        /// Friendship edge rule.
        #[arg(long, default_value = "either")]
        rule: NominationRule,
        /// Fail on any malformed input row.
        #[arg(long)]
        strict: bool,
    },
    /// Build a labeled dataset with its train/test split.
    Dataset {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long, default_value = "activity")]
        network: NetworkKind,
        #[arg(long, default_value_t = 5)]
        threshold: u32,
        #[arg(long, default_value = "either")]
        rule: NominationRule,
        /// Hop bound for formation negatives (`all` disables it).
        #[arg(long, default_value = "2")]
        max_hops: MaxHops,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        strict: bool,
    },
    /// Train one classifier on a dataset CSV.
    Train {
        /// Training dataset CSV.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        classifier: ClassifierKind,
        /// Train on the top-k eigenfeature projection.
        #[arg(long, conflicts_with = "no_svd")]
        k: Option<usize>,
        /// Train on the raw feature columns (the default).
        #[arg(long)]
        no_svd: bool,
        #[command(flatten)]
        train_opts: TrainOpts,
    },
    /// Evaluate a saved model on a dataset CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank original features from a saved linear model's weights.
    Rank {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Descriptive statistics (figure analogs) for both networks.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        threshold: u32,
        #[arg(long, default_value = "either")]
        rule: NominationRule,
        #[arg(long)]
        strict: bool,
    },
    /// Full run: ingest, datasets, training grid, ranking, reports.
    Pipeline {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long, default_value = "activity")]
        network: NetworkKind,
        #[arg(long, default_value_t = 5)]
        threshold: u32,
        #[arg(long, default_value = "either")]
        rule: NominationRule,
        #[arg(long, default_value = "2")]
        max_hops: MaxHops,
        /// Eigenfeature budgets, e.g. `2,15,28`.
        #[arg(long, default_value = "2,15,28", value_parser = parse_k_list)]
        k: Vec<usize>,
        /// Comma-separated classifier list, or `all`.
        #[arg(long, default_value = "all", value_parser = parse_classifiers)]
        classifiers: Vec<ClassifierKind>,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        train_opts: TrainOpts,
    },
}

fn run(cli: Cli) -> linkdyn::Result<()> {
    match cli.command {
        Command::Synth { config, out, seed } => {
            let mut cfg = match &config {
                Some(path) => SynthConfig::load(path)?,
                None => SynthConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let written = run_synth(&SynthCmd {
                config: cfg,
                config_path: config,
                out_dir: out,
            })?;
            println!("synth: wrote {} files", written.len());
            for path in written {
                println!("  {}", path.display());
            }
        }
        Command::Build {
            data,
            out,
            network,
            threshold,
            rule,
            strict,
        } => {
            let written = run_build(&BuildCmd {
                data_dir: data,
                out_dir: out,
                network,
                threshold,
                nomination_rule: rule,
                strict,
            })?;
            println!("build: wrote {} files", written.len());
        }
        Command::Dataset {
            data,
            out,
            task,
            network,
            threshold,
            rule,
            max_hops,
            train_fraction,
            seed,
            strict,
        } => {
            let written = run_dataset(&DatasetCmd {
                data_dir: data,
                out_dir: out,
                task,
                network,
                threshold,
                nomination_rule: rule,
                max_hops: max_hops.0,
                train_fraction,
                seed,
                strict,
            })?;
            println!("dataset: wrote {} files", written.len());
        }
        Command::Train {
            train,
            out,
            classifier,
            k,
            no_svd: _,
            train_opts,
        } => {
            let model_path = run_train(&TrainCmd {
                train_csv: train,
                out_dir: out,
                classifier,
                k,
                train_config: train_opts.to_config(),
            })?;
            println!("train: wrote {}", model_path.display());
        }
        Command::Eval { model, test, out } => {
            let m = run_eval(&EvalCmd {
                model_path: model,
                test_csv: test,
                out_dir: out,
            })?;
            println!(
                "eval: accuracy {:.4} recall {:.4}{}",
                m.accuracy,
                m.recall,
                if m.recall_defined {
                    ""
                } else {
                    " (no positives in truth)"
                }
            );
        }
        Command::Rank { model, out } => {
            let ranking = run_rank(&RankCmd {
                model_path: model,
                out_dir: out,
            })?;
            println!("rank: scored {} features", ranking.scores.len());
        }
        Command::Stats {
            data,
            out,
            threshold,
            rule,
            strict,
        } => {
            let written = run_stats(&StatsCmd {
                data_dir: data,
                out_dir: out,
                threshold,
                nomination_rule: rule,
                strict,
            })?;
            println!("stats: wrote {} files", written.len());
        }
        Command::Pipeline {
            data,
            out,
            task,
            network,
            threshold,
            rule,
            max_hops,
            k,
            classifiers,
            train_fraction,
            strict,
            train_opts,
        } => {
            let summary = run_pipeline(&PipelineCmd {
                data_dir: data,
                out_dir: out,
                task,
                network,
                threshold,
                nomination_rule: rule,
                max_hops: max_hops.0,
                k_list: k,
                classifiers,
                train_fraction,
                train_config: train_opts.to_config(),
                strict,
            })?;
            println!(
                "pipeline: {} examples ({} positive), {} train / {} test",
                summary.positives + summary.negatives,
                summary.positives,
                summary.train_examples,
                summary.test_examples
            );
            println!("{:<16} {:<8} {:>9} {:>8}", "classifier", "features", "accuracy", "recall");
            for row in &summary.grid.rows {
                println!(
                    "{:<16} {:<8} {:>9.4} {:>8.4}",
                    row.classifier, row.feature_set, row.metrics.accuracy, row.metrics.recall
                );
            }
            if let Some(ranking) = &summary.ranking {
                println!("top features:");
                for &feature in ranking.order.iter().take(5) {
                    println!(
                        "  {:<30} {:.4}",
                        summary.feature_names[feature], ranking.scores[feature]
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
