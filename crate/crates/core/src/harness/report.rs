use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::config::Strategy;
use super::run::EpisodeRecord;
use crate::gridworld::Outcome;
use crate::tabular_rl::Algorithm;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    /// 1-based task number.
    pub task: usize,
    pub strategy: Strategy,
    pub avg_collision_rate: f64,
    pub avg_success_rate: f64,
    pub sum_of_reward: f64,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str = "algorithm,task,strategy,avg_collision_rate,avg_success_rate,sum_of_reward";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6}",
            self.algorithm.code(),
            self.task,
            self.strategy.code(),
            self.avg_collision_rate,
            self.avg_success_rate,
            self.sum_of_reward
        )
    }
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SummaryRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn by_run(records: &[EpisodeRecord]) -> BTreeMap<usize, Vec<&EpisodeRecord>> {
    let mut runs: BTreeMap<usize, Vec<&EpisodeRecord>> = BTreeMap::new();
    for r in records {
        runs.entry(r.run_id).or_default().push(r);
    }
    for eps in runs.values_mut() {
        eps.sort_by_key(|r| r.episode_idx);
    }
    runs
}

/// Per-run collision rate, success rate and summed discounted return,
/// averaged over runs.
pub fn summarize(records: &[EpisodeRecord], algorithm: Algorithm, task: usize, strategy: Strategy) -> SummaryRow {
    let runs = by_run(records);
    let n_runs = runs.len().max(1) as f64;
    let (mut collision, mut success, mut reward) = (0.0, 0.0, 0.0);
    for eps in runs.values() {
        let n = eps.len() as f64;
        collision += eps.iter().filter(|r| r.outcome == Outcome::Collision).count() as f64 / n;
        success += eps.iter().filter(|r| r.outcome == Outcome::Goal).count() as f64 / n;
        reward += eps.iter().map(|r| r.discounted_return).sum::<f64>();
    }
    SummaryRow {
        algorithm,
        task,
        strategy,
        avg_collision_rate: collision / n_runs,
        avg_success_rate: success / n_runs,
        sum_of_reward: reward / n_runs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub episode_idx: usize,
    pub rolling_return_mean: f64,
    pub rolling_collision_rate: f64,
}

/// Trailing-window means of return and collision indicator per episode,
/// averaged across runs at equal episode index.
pub fn learning_curves(records: &[EpisodeRecord], window: usize) -> Vec<CurvePoint> {
    assert!(window >= 1, "window must be at least 1");
    let runs = by_run(records);
    let len = runs.values().map(Vec::len).max().unwrap_or(0);
    let mut ret_sum = vec![0.0; len];
    let mut col_sum = vec![0.0; len];
    let mut count = vec![0usize; len];
    for eps in runs.values() {
        for i in 0..eps.len() {
            let trailing = &eps[(i + 1).saturating_sub(window)..=i];
            let w = trailing.len() as f64;
            ret_sum[i] += trailing.iter().map(|r| r.discounted_return).sum::<f64>() / w;
            col_sum[i] += trailing.iter().filter(|r| r.outcome == Outcome::Collision).count() as f64 / w;
            count[i] += 1;
        }
    }
    (0..len)
        .map(|i| CurvePoint {
            episode_idx: i,
            rolling_return_mean: ret_sum[i] / count[i] as f64,
            rolling_collision_rate: col_sum[i] / count[i] as f64,
        })
        .collect()
}

pub fn curves_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("episode_idx,rolling_return_mean,rolling_collision_rate\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6}",
            p.episode_idx, p.rolling_return_mean, p.rolling_collision_rate
        );
    }
    out
}
