use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Strategy};
use super::report::{curves_to_csv, learning_curves, summarize, summary_to_csv, SummaryRow};
use super::run::{episodes_from_csv, episodes_to_csv, run_episode, run_pretraining, run_task, task_spec, trajectories_to_csv};
use crate::classify::{
    build_dataset, dataset_to_csv, evaluate, fit_knn, fit_svm, fit_tree, stratified_split, ClassifierKind,
    ClassifierModel, EvalReport, LabeledSample, SvmConfig,
};
use crate::error::{Error, Result};
use crate::gridworld::{default_max_steps, pretrain_spec, GridPos, GridSpec, Heading, VerticalDir};
use crate::reachability::{brs_labels, brute_force_brs, value_trace, Horizon, Trajectory};
use crate::tabular_rl::{Algorithm, LearnerConfig, QTable, TabularState, TieBreak};

pub const CURVE_WINDOW: usize = 10;

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn episodes_file_name(algorithm: Algorithm, task: usize, strategy: Strategy) -> String {
    format!("episodes_{}_task{task}_{}.csv", algorithm.code(), strategy.code())
}

fn curves_file_name(algorithm: Algorithm, task: usize, strategy: Strategy) -> String {
    format!("curves_{}_task{task}_{}.csv", algorithm.code(), strategy.code())
}

/// Pre-trains and labels: the logged trajectories and the dataset built from them.
pub fn pretrain_dataset(cfg: &ExperimentConfig) -> Result<(Vec<Trajectory>, Vec<LabeledSample>)> {
    let (trajectories, _) = run_pretraining(cfg)?;
    let data = build_dataset(&trajectories, cfg.horizon, &pretrain_spec(), cfg.classifier.features);
    Ok((trajectories, data))
}

pub fn fit_classifier(data: &[LabeledSample], cfg: &ExperimentConfig, kind: ClassifierKind) -> Result<ClassifierModel> {
    let c = &cfg.classifier;
    Ok(match kind {
        ClassifierKind::LinearSvm => ClassifierModel::LinearSvm(fit_svm(
            data,
            &SvmConfig {
                seed: cfg.fit_seed(),
                ..c.svm
            },
        )?),
        ClassifierKind::Knn => ClassifierModel::Knn(fit_knn(data, c.knn_k)?),
        ClassifierKind::DecisionTree => ClassifierModel::DecisionTree(fit_tree(data, &c.tree)?),
    })
}

/// Stratified split, fit on the training part, score on the held-out part.
pub fn fit_and_evaluate(
    data: &[LabeledSample],
    cfg: &ExperimentConfig,
    kind: ClassifierKind,
) -> Result<(ClassifierModel, EvalReport)> {
    let (train, test) = stratified_split(data, cfg.classifier.test_fraction, cfg.split_seed());
    let model = fit_classifier(&train, cfg, kind)?;
    let held_out = if test.is_empty() { &train } else { &test };
    let report = evaluate(&model, held_out);
    Ok((model, report))
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub classifier: EvalReport,
    pub positive_fraction: f64,
    pub summary: Vec<SummaryRow>,
}

/// Pre-train, label, fit, then train every (algorithm, task, strategy)
/// combination. Writes all artifacts into `out_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PipelineOutput> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_file(&out_dir.join("config.txt"), &cfg.to_kv())?;
    write_file(&out_dir.join("pretrain_spec.txt"), &pretrain_spec().to_kv())?;

    let (trajectories, data) = pretrain_dataset(cfg)?;
    write_file(&out_dir.join("trajectories.csv"), &trajectories_to_csv(&trajectories))?;
    write_file(&out_dir.join("dataset.csv"), &dataset_to_csv(&data))?;
    let positive_fraction = data.iter().filter(|s| s.label).count() as f64 / data.len().max(1) as f64;

    let (model, eval) = fit_and_evaluate(&data, cfg, cfg.classifier.kind)?;
    write_file(&out_dir.join("model.txt"), &model.to_kv())?;
    write_file(
        &out_dir.join("classifier_report.csv"),
        &format!("{}\n{}\n", EvalReport::CSV_HEADER, eval.csv_row(model.kind())),
    )?;

    for task_index in 0..cfg.tasks.len() {
        write_file(&out_dir.join(format!("task{}.txt", task_index + 1)), &task_spec(cfg, task_index)?.to_kv())?;
    }
    let mut summary = Vec::new();
    for algorithm in [Algorithm::QLearning, Algorithm::Sarsa] {
        for task_index in 0..cfg.tasks.len() {
            for strategy in [Strategy::EpsilonGreedy, Strategy::SafeExploration] {
                let task = task_index + 1;
                let records = run_task(cfg, task_index, algorithm, strategy, Some(&model))?;
                write_file(&out_dir.join(episodes_file_name(algorithm, task, strategy)), &episodes_to_csv(&records))?;
                write_file(
                    &out_dir.join(curves_file_name(algorithm, task, strategy)),
                    &curves_to_csv(&learning_curves(&records, CURVE_WINDOW)),
                )?;
                summary.push(summarize(&records, algorithm, task, strategy));
            }
        }
    }
    write_file(&out_dir.join("summary.csv"), &summary_to_csv(&summary))?;
    Ok(PipelineOutput {
        classifier: eval,
        positive_fraction,
        summary,
    })
}

fn parse_episodes_file_name(name: &str) -> Option<(Algorithm, usize, Strategy)> {
    let rest = name.strip_prefix("episodes_")?.strip_suffix(".csv")?;
    let mut parts = rest.split('_');
    let algorithm = parts.next()?.parse().ok()?;
    let task = parts.next()?.strip_prefix("task")?.parse().ok()?;
    let strategy = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((algorithm, task, strategy))
}

/// Summarizes every `episodes_<algo>_task<n>_<strategy>.csv` in `in_dir`.
/// The summary goes to `out`; curve files are written next to it.
pub fn report_dir(in_dir: &Path, out: &Path) -> Result<Vec<SummaryRow>> {
    let mut found: Vec<((Algorithm, usize, Strategy), PathBuf)> = Vec::new();
    for entry in fs::read_dir(in_dir).map_err(|e| Error::io(in_dir, e))? {
        let entry = entry.map_err(|e| Error::io(in_dir, e))?;
        if let Some(key) = entry.file_name().to_str().and_then(parse_episodes_file_name) {
            found.push((key, entry.path()));
        }
    }
    if found.is_empty() {
        return Err(Error::Config(format!("no episodes_*.csv files in {}", in_dir.display())));
    }
    found.sort_by_key(|((a, t, s), _)| (a.code() != "q", *t, *s));
    let curve_dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    for ((algorithm, task, strategy), path) in found {
        let records = episodes_from_csv(&read_file(&path)?)?;
        write_file(
            &curve_dir.join(curves_file_name(algorithm, task, strategy)),
            &curves_to_csv(&learning_curves(&records, CURVE_WINDOW)),
        )?;
        rows.push(summarize(&records, algorithm, task, strategy));
    }
    write_file(out, &summary_to_csv(&rows))?;
    Ok(rows)
}

/// Obstacle-only `size x size` grid used by the reachability cross-check.
pub fn oracle_grid(size: usize) -> Result<GridSpec> {
    if size < 3 {
        return Err(Error::InvalidSpec(format!("oracle grid needs size >= 3, got {size}")));
    }
    let spec = GridSpec {
        width: size,
        height: size,
        goal: GridPos::new(size - 1, 0),
        blocked: BTreeSet::new(),
        obstacle_column: (size - 1) / 2,
        obstacle_init_row: 0,
        obstacle_init_dir: VerticalDir::Down,
        agent_start: GridPos::new(0, size / 2),
        agent_start_heading: Heading::East,
        max_steps: default_max_steps(size, size),
        has_obstacle: true,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub episodes: usize,
    pub labeled_positive: usize,
    pub distinct_labeled: usize,
    pub oracle_size: usize,
    /// Trajectory-labeled BRS states missing from the exhaustive set.
    pub violations: Vec<TabularState>,
}

/// Labels states from `episodes` seeded ε-greedy (ε = 0.6) Q-learning
/// episodes and checks each positive against [`brute_force_brs`].
pub fn oracle_check(size: usize, horizon: Horizon, episodes: usize, seed: u64) -> Result<OracleReport> {
    let spec = oracle_grid(size)?;
    let oracle = brute_force_brs(&spec, horizon)?;
    let learner = LearnerConfig {
        gamma: 0.99,
        alpha: 0.5,
        epsilon: 0.6,
        algorithm: Algorithm::QLearning,
        tie_break: TieBreak::Random,
    };
    let mut q = QTable::new(spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labeled = BTreeSet::new();
    let mut labeled_positive = 0;
    for _ in 0..episodes {
        let mut states = Vec::new();
        let stats = run_episode(&spec, &mut q, &learner, &mut rng, None, Some(&mut states))?;
        let traj = Trajectory {
            states,
            outcome: stats.outcome,
        };
        for (s, label) in traj.states.iter().zip(brs_labels(&value_trace(&traj, horizon, &spec))) {
            if label {
                labeled_positive += 1;
                labeled.insert(*s);
            }
        }
    }
    let violations = labeled.iter().filter(|s| !oracle.contains(s)).copied().collect();
    Ok(OracleReport {
        episodes,
        labeled_positive,
        distinct_labeled: labeled.len(),
        oracle_size: oracle.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episodes_file_names() {
        let name = episodes_file_name(Algorithm::Sarsa, 3, Strategy::SafeExploration);
        assert_eq!(name, "episodes_sarsa_task3_safe.csv");
        assert_eq!(
            parse_episodes_file_name(&name),
            Some((Algorithm::Sarsa, 3, Strategy::SafeExploration))
        );
        assert_eq!(parse_episodes_file_name("episodes_q_taskx_safe.csv"), None);
        assert_eq!(parse_episodes_file_name("summary.csv"), None);
    }

    #[test]
    fn small_oracle_check_is_sound() {
        let r = oracle_check(5, Horizon(2), 200, 4).unwrap();
        assert!(r.labeled_positive > 0);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
    }
}
