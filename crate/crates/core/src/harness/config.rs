use std::fmt;
use std::str::FromStr;

use crate::classify::{ClassifierKind, FeatureSet, SvmConfig, TreeConfig};
use crate::error::{Error, Result};
use crate::kv::{KvReader, KvWriter};
use crate::reachability::Horizon;
use crate::tabular_rl::{Algorithm, LearnerConfig, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    EpsilonGreedy,
    SafeExploration,
}

impl Strategy {
    pub fn code(self) -> &'static str {
        match self {
            Strategy::EpsilonGreedy => "egreedy",
            Strategy::SafeExploration => "safe",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "egreedy" => Ok(Strategy::EpsilonGreedy),
            "safe" => Ok(Strategy::SafeExploration),
            other => Err(format!("expected egreedy or safe, got `{other}`")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainConfig {
    pub episodes: usize,
    pub epsilon: f64,
    pub algorithm: Algorithm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    pub runs: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSettings {
    pub kind: ClassifierKind,
    pub features: FeatureSet,
    pub test_fraction: f64,
    pub svm: SvmConfig,
    pub knn_k: usize,
    pub tree: TreeConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub pretrain: PretrainConfig,
    /// Seeds handed to the task generator, one per task.
    pub tasks: Vec<u64>,
    pub task_width: usize,
    pub task_height: usize,
    pub train: TrainConfig,
    /// Greedy tie-breaking for every learner in the experiment.
    pub tie_break: TieBreak,
    pub horizon: Horizon,
    pub classifier: ClassifierSettings,
    pub strategy: Strategy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            pretrain: PretrainConfig {
                episodes: 4000,
                epsilon: 0.6,
                algorithm: Algorithm::QLearning,
            },
            tasks: vec![1, 2, 3],
            task_width: 15,
            task_height: 15,
            train: TrainConfig {
                episodes: 2000,
                runs: 20,
                epsilon: 0.2,
                gamma: 0.99,
                alpha: 0.5,
            },
            tie_break: TieBreak::Random,
            horizon: Horizon(2),
            classifier: ClassifierSettings {
                kind: ClassifierKind::LinearSvm,
                features: FeatureSet::Base,
                test_fraction: 0.2,
                svm: SvmConfig::default(),
                knn_k: 5,
                tree: TreeConfig::default(),
            },
            strategy: Strategy::SafeExploration,
        }
    }
}

// Offsets mixed into the master seed for each random stream. Task runs use
// `task_index * 1009 + run_id`, which stays far below these.
const PRETRAIN_STREAM: u64 = 900_001;
const SPLIT_STREAM: u64 = 900_002;
const FIT_STREAM: u64 = 900_003;

fn stream_seed(master: u64, offset: u64) -> u64 {
    master.wrapping_mul(1_000_003).wrapping_add(offset)
}

impl ExperimentConfig {
    pub fn pretrain_learner(&self) -> LearnerConfig {
        LearnerConfig {
            gamma: self.train.gamma,
            alpha: self.train.alpha,
            epsilon: self.pretrain.epsilon,
            algorithm: self.pretrain.algorithm,
            tie_break: self.tie_break,
        }
    }

    pub fn train_learner(&self, algorithm: Algorithm) -> LearnerConfig {
        LearnerConfig {
            gamma: self.train.gamma,
            alpha: self.train.alpha,
            epsilon: self.train.epsilon,
            algorithm,
            tie_break: self.tie_break,
        }
    }

    /// Seed of one training run: `master * 1000003 + task_index * 1009 + run_id`.
    pub fn run_seed(&self, task_index: usize, run_id: usize) -> u64 {
        stream_seed(self.master_seed, (task_index as u64) * 1009 + run_id as u64)
    }

    pub fn pretrain_seed(&self) -> u64 {
        stream_seed(self.master_seed, PRETRAIN_STREAM)
    }

    pub fn split_seed(&self) -> u64 {
        stream_seed(self.master_seed, SPLIT_STREAM)
    }

    pub fn fit_seed(&self) -> u64 {
        stream_seed(self.master_seed, FIT_STREAM)
    }

    pub fn validate(&self) -> Result<()> {
        self.pretrain_learner().validate()?;
        self.train_learner(Algorithm::QLearning).validate()?;
        if self.train.episodes < 1 || self.train.runs < 1 {
            return Err(Error::Config("train episodes and runs must be at least 1".into()));
        }
        if self.tasks.is_empty() {
            return Err(Error::Config("at least one task seed is required".into()));
        }
        if !(0.0..1.0).contains(&self.classifier.test_fraction) {
            return Err(Error::Config("test_fraction must be in [0,1)".into()));
        }
        if self.classifier.knn_k == 0 || self.classifier.knn_k.is_multiple_of(2) {
            return Err(Error::Config("knn_k must be odd".into()));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let tasks = self.tasks.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let c = &self.classifier;
        let mut w = KvWriter::new();
        w.put("master_seed", self.master_seed)
            .put("pretrain_episodes", self.pretrain.episodes)
            .put("pretrain_epsilon", self.pretrain.epsilon)
            .put("pretrain_algorithm", self.pretrain.algorithm.code())
            .put("tasks", tasks)
            .put("task_width", self.task_width)
            .put("task_height", self.task_height)
            .put("train_episodes", self.train.episodes)
            .put("train_runs", self.train.runs)
            .put("train_epsilon", self.train.epsilon)
            .put("gamma", self.train.gamma)
            .put("alpha", self.train.alpha)
            .put("tie_break", self.tie_break.code())
            .put("horizon", self.horizon.0)
            .put("classifier", c.kind.code())
            .put("feature_offsets", c.features == FeatureSet::WithOffsets)
            .put("test_fraction", c.test_fraction)
            .put("svm_learning_rate", c.svm.learning_rate)
            .put("svm_lambda", c.svm.lambda)
            .put("svm_epochs", c.svm.epochs)
            .put("svm_class_weighting", c.svm.class_weighting)
            .put("knn_k", c.knn_k)
            .put("tree_max_depth", c.tree.max_depth)
            .put("tree_min_leaf", c.tree.min_leaf)
            .put("tree_tie_positive", c.tree.tie_positive)
            .put("strategy", self.strategy.code());
        w.finish()
    }

    /// Reads a config file. Missing keys keep their defaults; unknown keys
    /// are rejected.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kv = KvReader::parse(text)?;
        let mut cfg = ExperimentConfig::default();

        macro_rules! set {
            ($key:literal => $field:expr) => {
                if let Some(v) = kv.take($key)? {
                    $field = v;
                }
            };
        }
        set!("master_seed" => cfg.master_seed);
        set!("pretrain_episodes" => cfg.pretrain.episodes);
        set!("pretrain_epsilon" => cfg.pretrain.epsilon);
        set!("pretrain_algorithm" => cfg.pretrain.algorithm);
        set!("task_width" => cfg.task_width);
        set!("task_height" => cfg.task_height);
        set!("train_episodes" => cfg.train.episodes);
        set!("train_runs" => cfg.train.runs);
        set!("train_epsilon" => cfg.train.epsilon);
        set!("gamma" => cfg.train.gamma);
        set!("alpha" => cfg.train.alpha);
        set!("classifier" => cfg.classifier.kind);
        set!("test_fraction" => cfg.classifier.test_fraction);
        set!("svm_learning_rate" => cfg.classifier.svm.learning_rate);
        set!("svm_lambda" => cfg.classifier.svm.lambda);
        set!("svm_epochs" => cfg.classifier.svm.epochs);
        set!("svm_class_weighting" => cfg.classifier.svm.class_weighting);
        set!("knn_k" => cfg.classifier.knn_k);
        set!("tree_max_depth" => cfg.classifier.tree.max_depth);
        set!("tree_min_leaf" => cfg.classifier.tree.min_leaf);
        set!("tree_tie_positive" => cfg.classifier.tree.tie_positive);
        set!("strategy" => cfg.strategy);
        set!("tie_break" => cfg.tie_break);
        if let Some(h) = kv.take::<usize>("horizon")? {
            cfg.horizon = Horizon(h);
        }
        if let Some(offsets) = kv.take::<bool>("feature_offsets")? {
            cfg.classifier.features = if offsets { FeatureSet::WithOffsets } else { FeatureSet::Base };
        }
        if let Some((line, raw)) = kv.take_str("tasks")? {
            cfg.tasks = raw
                .split(',')
                .map(|t| t.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::parse(line, format!("bad task seed list `{raw}`: {e}")))?;
        }
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_protocol() {
        let cfg = ExperimentConfig::default();
        assert_eq!((cfg.pretrain.episodes, cfg.pretrain.epsilon), (4000, 0.6));
        assert_eq!((cfg.train.episodes, cfg.train.runs), (2000, 20));
        assert_eq!((cfg.train.epsilon, cfg.train.gamma, cfg.train.alpha), (0.2, 0.99, 0.5));
        assert_eq!(cfg.horizon, Horizon(2));
        assert_eq!(cfg.tasks.len(), 3);
    }

    #[test]
    fn text_round_trip_and_partial_files() {
        let mut cfg = ExperimentConfig {
            master_seed: 42,
            tasks: vec![9, 8, 7],
            ..Default::default()
        };
        cfg.classifier.features = FeatureSet::WithOffsets;
        assert_eq!(ExperimentConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);

        let partial = ExperimentConfig::from_kv("train_runs = 3\n").unwrap();
        assert_eq!(partial.train.runs, 3);
        assert_eq!(partial.train.episodes, 2000);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_kv("learning_rate = 3\n").is_err());
        assert!(ExperimentConfig::from_kv("train_runs = 0\n").is_err());
        assert!(ExperimentConfig::from_kv("gamma = 2\n").is_err());
        assert!(ExperimentConfig::from_kv("strategy = reckless\n").is_err());
    }

    #[test]
    fn run_seed_scheme() {
        let cfg = ExperimentConfig {
            master_seed: 2,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.run_seed(1, 5), 2 * 1_000_003 + 1009 + 5);
    }
}
