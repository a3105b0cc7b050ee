use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::config::{ExperimentConfig, Strategy};
use super::pipeline::{fit_and_evaluate, oracle_check, pretrain_dataset, read_file, report_dir, run_pipeline, write_file};
use super::run::{episodes_to_csv, run_task, trajectories_to_csv};
use crate::classify::{dataset_from_csv, dataset_to_csv, ClassifierKind, ClassifierModel, EvalReport};
use crate::error::{Error, Result};
use crate::gridworld::pretrain_spec;
use crate::reachability::Horizon;
use crate::tabular_rl::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "safegrid", about = "Shielded exploration experiments on grid worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Svm,
    Knn,
    Tree,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgoArg {
    Q,
    Sarsa,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Egreedy,
    Safe,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run pre-training and write trajectories plus the labeled dataset.
    Pretrain {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a classifier on a dataset CSV (stratified 80/20 split).
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train learners on one generated task and write the episodes CSV.
    Run {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        task: u32,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize episodes CSVs in a directory; curves go next to the summary.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check trajectory BRS labels against exhaustive reachability.
    OracleCheck {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Everything end to end: pretrain, fit, all tasks, summary.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => ExperimentConfig::from_kv(&read_file(p)?),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Pretrain { config, out } => {
            let cfg = load_config(config.as_deref())?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let (trajectories, data) = pretrain_dataset(&cfg)?;
            write_file(&out.join("pretrain_spec.txt"), &pretrain_spec().to_kv())?;
            write_file(&out.join("trajectories.csv"), &trajectories_to_csv(&trajectories))?;
            write_file(&out.join("dataset.csv"), &dataset_to_csv(&data))?;
            let positives = data.iter().filter(|s| s.label).count();
            println!(
                "{} episodes, {} samples, {} BRS ({:.4})",
                trajectories.len(),
                data.len(),
                positives,
                positives as f64 / data.len().max(1) as f64
            );
        }
        Command::Fit {
            data,
            model,
            out,
            report,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let samples = dataset_from_csv(&read_file(&data)?)?;
            let kind = match model {
                ModelArg::Svm => ClassifierKind::LinearSvm,
                ModelArg::Knn => ClassifierKind::Knn,
                ModelArg::Tree => ClassifierKind::DecisionTree,
            };
            let (fitted, eval) = fit_and_evaluate(&samples, &cfg, kind)?;
            ensure_parent(&out)?;
            ensure_parent(&report)?;
            write_file(&out, &fitted.to_kv())?;
            let row = eval.csv_row(kind);
            write_file(&report, &format!("{}\n{row}\n", EvalReport::CSV_HEADER))?;
            println!("{row}");
        }
        Command::Run {
            task,
            algo,
            strategy,
            model,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let strategy = match strategy {
                StrategyArg::Egreedy => Strategy::EpsilonGreedy,
                StrategyArg::Safe => Strategy::SafeExploration,
            };
            let algorithm = match algo {
                AlgoArg::Q => Algorithm::QLearning,
                AlgoArg::Sarsa => Algorithm::Sarsa,
            };
            let model = match (&model, strategy) {
                (Some(path), _) => Some(ClassifierModel::from_kv(&read_file(path)?)?),
                (None, Strategy::SafeExploration) => {
                    return Err(Error::Config("--strategy safe requires --model <FILE>".into()))
                }
                (None, Strategy::EpsilonGreedy) => None,
            };
            let records = run_task(&cfg, task as usize - 1, algorithm, strategy, model.as_ref())?;
            ensure_parent(&out)?;
            write_file(&out, &episodes_to_csv(&records))?;
        }
        Command::Report { input, out } => {
            ensure_parent(&out)?;
            let rows = report_dir(&input, &out)?;
            println!("{} summary rows", rows.len());
        }
        Command::OracleCheck {
            size,
            horizon,
            episodes,
            seed,
        } => {
            let r = oracle_check(size, Horizon(horizon), episodes, seed)?;
            println!(
                "episodes={} labeled_positive={} distinct_labeled={} oracle_states={} violations={}",
                r.episodes,
                r.labeled_positive,
                r.distinct_labeled,
                r.oracle_size,
                r.violations.len()
            );
            if let Some(v) = r.violations.first() {
                return Err(Error::Usage(format!("labeled state outside the exhaustive BRS: {v:?}")));
            }
        }
        Command::Pipeline { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let output = run_pipeline(&cfg, &out)?;
            println!(
                "brs fraction={:.4}; classifier accuracy={:.4} f1={:.4}; {} summary rows",
                output.positive_fraction,
                output.classifier.accuracy,
                output.classifier.f1,
                output.summary.len()
            );
        }
    }
    Ok(())
}

/// Entry point shared by the binary and tests. Returns the process exit code.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(p) => p,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(parsed.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
