//! Experiment orchestration: pre-training, classifier fitting, shielded task
//! training, metrics, and the command-line front end.

mod cli;
mod config;
mod pipeline;
mod report;
mod run;

pub use cli::cli;
pub use config::{ClassifierSettings, ExperimentConfig, PretrainConfig, Strategy, TrainConfig};
pub use pipeline::{
    episodes_file_name, fit_and_evaluate, fit_classifier, oracle_check, oracle_grid, pretrain_dataset, report_dir,
    run_pipeline, OracleReport, PipelineOutput, CURVE_WINDOW,
};
pub use report::{curves_to_csv, learning_curves, summarize, summary_to_csv, CurvePoint, SummaryRow};
pub use run::{
    discounted_return, episodes_from_csv, episodes_to_csv, run_episode, run_on_spec, run_pretraining, run_task,
    task_spec, trajectories_to_csv, EpisodeRecord, EpisodeStats,
};
