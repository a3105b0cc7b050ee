//! BRS membership classifiers and the dataset they learn from.
//!
//! Features are the agent heading (one-hot), the obstacle's vertical direction
//! (`+1` up, `-1` down) and the signed distance. [`FeatureSet::WithOffsets`]
//! appends the agent-minus-obstacle offsets `(dx, dy)` for ablations.

mod knn;
mod svm;
mod tree;

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use knn::{fit_knn, KnnModel};
pub use svm::{fit_svm, SvmConfig, SvmModel};
pub use tree::{fit_tree, TreeConfig, TreeModel, TreeNode};

use crate::error::{Error, Result};
use crate::gridworld::{GridSpec, VerticalDir};
use crate::kv::{KvReader, KvWriter};
use crate::reachability::{brs_labels, signed_distance, value_trace, Horizon, Trajectory};
use crate::tabular_rl::TabularState;

pub const MAX_FEATURES: usize = 8;
const DISTANCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureSet {
    #[default]
    Base,
    WithOffsets,
}

impl FeatureSet {
    pub fn dim(self) -> usize {
        match self {
            FeatureSet::Base => 6,
            FeatureSet::WithOffsets => 8,
        }
    }

    fn from_dim(dim: usize) -> Result<Self> {
        match dim {
            6 => Ok(FeatureSet::Base),
            8 => Ok(FeatureSet::WithOffsets),
            other => Err(Error::Fit(format!("unsupported feature dimension {other}"))),
        }
    }

    /// Indices of the real-valued features; the rest are binary/sign features.
    fn continuous(self) -> std::ops::Range<usize> {
        DISTANCE..self.dim()
    }

    fn csv_header(self) -> &'static str {
        match self {
            FeatureSet::Base => "h_n,h_e,h_s,h_w,obs_dir,distance,label",
            FeatureSet::WithOffsets => "h_n,h_e,h_s,h_w,obs_dir,distance,dx,dy,label",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    values: [f64; MAX_FEATURES],
    dim: usize,
}

impl FeatureVector {
    pub fn from_slice(values: &[f64]) -> Self {
        assert!(values.len() <= MAX_FEATURES, "too many features");
        let mut v = [0.0; MAX_FEATURES];
        v[..values.len()].copy_from_slice(values);
        Self {
            values: v,
            dim: values.len(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distance(&self) -> f64 {
        self.values[DISTANCE]
    }
}

pub fn extract_features(s: &TabularState, spec: &GridSpec) -> FeatureVector {
    extract_features_with(s, spec, FeatureSet::Base)
}

pub fn extract_features_with(s: &TabularState, spec: &GridSpec, set: FeatureSet) -> FeatureVector {
    let mut values = [0.0; MAX_FEATURES];
    values[s.heading.index()] = 1.0;
    values[4] = match s.obstacle_dir {
        VerticalDir::Up => 1.0,
        VerticalDir::Down => -1.0,
    };
    values[DISTANCE] = signed_distance(s, spec);
    if set == FeatureSet::WithOffsets {
        values[6] = s.agent_x as f64 - spec.obstacle_column as f64;
        values[7] = s.agent_y as f64 - s.obstacle_row as f64;
    }
    FeatureVector {
        values,
        dim: set.dim(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    /// `true` for BRS states.
    pub label: bool,
}

/// One sample per visited state of every episode, in episode order.
pub fn build_dataset(episodes: &[Trajectory], h: Horizon, spec: &GridSpec, set: FeatureSet) -> Vec<LabeledSample> {
    let mut out = Vec::with_capacity(episodes.iter().map(|e| e.states.len()).sum());
    for traj in episodes {
        let labels = brs_labels(&value_trace(traj, h, spec));
        out.extend(traj.states.iter().zip(labels).map(|(s, label)| LabeledSample {
            features: extract_features_with(s, spec, set),
            label,
        }));
    }
    out
}

pub fn dataset_to_csv(data: &[LabeledSample]) -> String {
    let set = data
        .first()
        .map(|s| FeatureSet::from_dim(s.features.dim()).expect("valid feature vector"))
        .unwrap_or_default();
    let mut out = String::with_capacity(32 * data.len() + 64);
    out.push_str(set.csv_header());
    out.push('\n');
    for s in data {
        for v in s.features.as_slice() {
            let _ = write!(out, "{v},");
        }
        out.push(if s.label { '1' } else { '0' });
        out.push('\n');
    }
    out
}

pub fn dataset_from_csv(text: &str) -> Result<Vec<LabeledSample>> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or_default();
    let set = [FeatureSet::Base, FeatureSet::WithOffsets]
        .into_iter()
        .find(|s| s.csv_header() == header)
        .ok_or_else(|| Error::parse(1, format!("unexpected dataset header `{header}`")))?;
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != set.dim() + 1 {
            return Err(Error::parse(idx + 1, format!("expected {} columns", set.dim() + 1)));
        }
        let mut values = [0.0; MAX_FEATURES];
        for (slot, field) in values.iter_mut().zip(&fields[..set.dim()]) {
            *slot = field
                .parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad number `{field}`: {e}")))?;
        }
        let label = match fields[set.dim()] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(idx + 1, format!("label must be 0 or 1, got `{other}`"))),
        };
        out.push(LabeledSample {
            features: FeatureVector {
                values,
                dim: set.dim(),
            },
            label,
        });
    }
    Ok(out)
}

/// Splits each class separately so both halves keep the class ratio.
/// Returns `(train, test)`, each in original order.
pub fn stratified_split(data: &[LabeledSample], test_fraction: f64, seed: u64) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; data.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data[i].label == class).collect();
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        for &i in &idx[..n_test] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<_>, Vec<_>) = data.iter().zip(in_test).partition(|(_, t)| *t);
    (
        train.into_iter().map(|(s, _)| *s).collect(),
        test.into_iter().map(|(s, _)| *s).collect(),
    )
}

/// Per-feature affine map to zero mean and unit variance. Only the
/// real-valued features are touched; binary ones keep mean 0 and scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    fn fit(data: &[LabeledSample], set: FeatureSet) -> Self {
        let dim = set.dim();
        let mut means = vec![0.0; dim];
        let mut scales = vec![1.0; dim];
        let n = data.len() as f64;
        for j in set.continuous() {
            let mean = data.iter().map(|s| s.features.values[j]).sum::<f64>() / n;
            let var = data
                .iter()
                .map(|s| (s.features.values[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            means[j] = mean;
            scales[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { means, scales }
    }

    fn apply(&self, f: &FeatureVector) -> FeatureVector {
        let mut out = *f;
        for j in 0..self.means.len() {
            out.values[j] = (f.values[j] - self.means[j]) / self.scales[j];
        }
        out
    }

    fn write(&self, w: &mut KvWriter) {
        w.put("means", join(&self.means)).put("scales", join(&self.scales));
    }

    fn read(kv: &mut KvReader, dim: usize) -> Result<Self> {
        let means = parse_list(&kv.require_str("means")?.1, dim)?;
        let scales = parse_list(&kv.require_str("scales")?.1, dim)?;
        if scales.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::parse(0, "scales must be positive"));
        }
        Ok(Self { means, scales })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    LinearSvm,
    Knn,
    DecisionTree,
}

impl ClassifierKind {
    pub fn code(self) -> &'static str {
        match self {
            ClassifierKind::LinearSvm => "svm",
            ClassifierKind::Knn => "knn",
            ClassifierKind::DecisionTree => "tree",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svm" => Ok(ClassifierKind::LinearSvm),
            "knn" => Ok(ClassifierKind::Knn),
            "tree" => Ok(ClassifierKind::DecisionTree),
            other => Err(format!("expected svm, knn or tree, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    LinearSvm(SvmModel),
    Knn(KnnModel),
    DecisionTree(TreeModel),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::LinearSvm(_) => ClassifierKind::LinearSvm,
            ClassifierModel::Knn(_) => ClassifierKind::Knn,
            ClassifierModel::DecisionTree(_) => ClassifierKind::DecisionTree,
        }
    }

    pub fn feature_set(&self) -> FeatureSet {
        let dim = match self {
            ClassifierModel::LinearSvm(m) => m.weights.len(),
            ClassifierModel::Knn(m) => m.standardizer.means.len(),
            ClassifierModel::DecisionTree(m) => m.dim,
        };
        FeatureSet::from_dim(dim).expect("models are built with a valid dimension")
    }

    pub fn predict(&self, f: &FeatureVector) -> bool {
        match self {
            ClassifierModel::LinearSvm(m) => m.predict(f),
            ClassifierModel::Knn(m) => m.predict(f),
            ClassifierModel::DecisionTree(m) => m.predict(f),
        }
    }

    pub fn to_kv(&self) -> String {
        let mut w = KvWriter::new();
        w.put("kind", self.kind().code());
        match self {
            ClassifierModel::LinearSvm(m) => m.write(&mut w),
            ClassifierModel::Knn(m) => m.write(&mut w),
            ClassifierModel::DecisionTree(m) => m.write(&mut w),
        }
        w.finish()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kv = KvReader::parse(text)?;
        let kind: ClassifierKind = kv.require("kind")?;
        let model = match kind {
            ClassifierKind::LinearSvm => ClassifierModel::LinearSvm(SvmModel::read(&mut kv)?),
            ClassifierKind::Knn => ClassifierModel::Knn(KnnModel::read(&mut kv)?),
            ClassifierKind::DecisionTree => ClassifierModel::DecisionTree(TreeModel::read(&mut kv)?),
        };
        kv.finish()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

impl EvalReport {
    /// Metrics from raw counts, with `0/0` read as `0`.
    pub fn from_confusion(c: Confusion) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            accuracy: ratio(c.tp + c.tn, c.tp + c.fp + c.tn + c.fn_),
            precision,
            recall,
            f1,
            confusion: c,
        }
    }

    pub const CSV_HEADER: &'static str = "model,accuracy,precision,recall,f1,tp,fp,tn,fn";

    pub fn csv_row(&self, model: ClassifierKind) -> String {
        let c = self.confusion;
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
            model.code(),
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        )
    }
}

pub fn evaluate(model: &ClassifierModel, held_out: &[LabeledSample]) -> EvalReport {
    let mut c = Confusion::default();
    for s in held_out {
        match (model.predict(&s.features), s.label) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    EvalReport::from_confusion(c)
}

fn feature_set_of(data: &[LabeledSample]) -> Result<FeatureSet> {
    let first = data.first().ok_or_else(|| Error::Fit("empty training data".into()))?;
    let set = FeatureSet::from_dim(first.features.dim())?;
    if data.iter().any(|s| s.features.dim() != set.dim()) {
        return Err(Error::Fit("mixed feature dimensions".into()));
    }
    Ok(set)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(text: &str, expected: usize) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(0, format!("bad number list `{text}`: {e}")))?;
    if values.len() != expected {
        return Err(Error::parse(0, format!("expected {expected} values, got {}", values.len())));
    }
    Ok(values)
}
