use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Strategy};
use crate::classify::ClassifierModel;
use crate::error::{Error, Result};
use crate::gridworld::{self, generate_task, pretrain_spec, GridSpec, Outcome};
use crate::reachability::Trajectory;
use crate::shield::{shield_decide_with, DecisionSource, SafePlan};
use crate::tabular_rl::{q_update, sarsa_update, select_action_with, Algorithm, LearnerConfig, QTable, TabularState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub run_id: usize,
    pub episode_idx: usize,
    pub steps: usize,
    pub outcome: Outcome,
    /// `γ^(steps-1)` times the terminal reward.
    pub discounted_return: f64,
    pub shield_activations: usize,
}

impl EpisodeRecord {
    pub const CSV_HEADER: &'static str = "run_id,episode_idx,steps,outcome,discounted_return,shield_activations";
}

pub fn discounted_return(steps: usize, outcome: Outcome, gamma: f64) -> f64 {
    let r = outcome.reward();
    if r == 0.0 {
        return 0.0;
    }
    let exp = i32::try_from(steps.saturating_sub(1)).unwrap_or(i32::MAX);
    r * gamma.powi(exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeStats {
    pub steps: usize,
    pub outcome: Outcome,
    pub shield_activations: usize,
}

/// A pending SARSA transition waiting for the next learner action.
struct Pending {
    s: TabularState,
    a: gridworld::Action,
    reward: f64,
    s_next: TabularState,
}

/// Plays one episode, learning online. With `shield` set, the classifier may
/// hand control to the safe policy; those steps are not learned from.
///
/// When a SARSA transition is followed by a safe-policy step, it bootstraps
/// from the greedy value of the next state instead of a learner action.
pub fn run_episode(
    spec: &GridSpec,
    q: &mut QTable,
    cfg: &LearnerConfig,
    rng: &mut ChaCha8Rng,
    shield: Option<&ClassifierModel>,
    mut log: Option<&mut Vec<TabularState>>,
) -> Result<EpisodeStats> {
    let mut env = gridworld::reset(spec)?;
    let mut plan = SafePlan::default();
    let mut pending: Option<Pending> = None;
    let mut activations = 0;
    if let Some(log) = log.as_deref_mut() {
        log.push(TabularState::from(&env));
    }
    loop {
        let s = TabularState::from(&env);
        let (source, action) = match shield {
            None => (DecisionSource::Learner, select_action_with(q, &s, cfg.epsilon, cfg.tie_break, rng)),
            Some(model) => {
                let (d, next_plan) =
                    shield_decide_with(&s, model, q, std::mem::take(&mut plan), cfg.epsilon, cfg.tie_break, rng, spec);
                plan = next_plan;
                (d.source, d.action)
            }
        };
        if let Some(p) = pending.take() {
            let a_next = match source {
                DecisionSource::Learner => action,
                DecisionSource::Safe => q.best_action(&p.s_next),
            };
            sarsa_update(q, &p.s, p.a, p.reward, &p.s_next, Some(a_next), false, cfg);
        }

        let r = gridworld::step(&env, action, spec)?;
        let s_next = TabularState::from(&r.next);
        if let Some(log) = log.as_deref_mut() {
            log.push(s_next);
        }
        match source {
            DecisionSource::Safe => activations += 1,
            DecisionSource::Learner => match cfg.algorithm {
                Algorithm::QLearning => q_update(q, &s, action, r.reward, &s_next, r.done, cfg),
                Algorithm::Sarsa if r.done => sarsa_update(q, &s, action, r.reward, &s_next, None, true, cfg),
                Algorithm::Sarsa => {
                    pending = Some(Pending {
                        s,
                        a: action,
                        reward: r.reward,
                        s_next,
                    })
                }
            },
        }
        env = r.next;
        if r.done {
            return Ok(EpisodeStats {
                steps: env.steps_elapsed,
                outcome: r.outcome,
                shield_activations: activations,
            });
        }
    }
}

/// ε-greedy training in the pre-training zone, logging every trajectory.
pub fn run_pretraining(cfg: &ExperimentConfig) -> Result<(Vec<Trajectory>, QTable)> {
    cfg.validate()?;
    let spec = pretrain_spec();
    let learner = cfg.pretrain_learner();
    let mut q = QTable::new(spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.pretrain_seed());
    let mut trajectories = Vec::with_capacity(cfg.pretrain.episodes);
    for _ in 0..cfg.pretrain.episodes {
        let mut states = Vec::new();
        let stats = run_episode(&spec, &mut q, &learner, &mut rng, None, Some(&mut states))?;
        trajectories.push(Trajectory {
            states,
            outcome: stats.outcome,
        });
    }
    Ok((trajectories, q))
}

pub fn task_spec(cfg: &ExperimentConfig, task_index: usize) -> Result<GridSpec> {
    let seed = cfg
        .tasks
        .get(task_index)
        .ok_or_else(|| Error::Config(format!("task {} not configured ({} tasks)", task_index + 1, cfg.tasks.len())))?;
    generate_task(*seed, cfg.task_width, cfg.task_height)
}

/// Trains `cfg.train.runs` independent learners on one task and returns one
/// record per episode, ordered by `(run_id, episode_idx)`.
pub fn run_task(
    cfg: &ExperimentConfig,
    task_index: usize,
    algorithm: Algorithm,
    strategy: Strategy,
    model: Option<&ClassifierModel>,
) -> Result<Vec<EpisodeRecord>> {
    cfg.validate()?;
    let spec = task_spec(cfg, task_index)?;
    run_on_spec(cfg, &spec, task_index, algorithm, strategy, model)
}

/// [`run_task`] on an explicit layout instead of a generated one.
pub fn run_on_spec(
    cfg: &ExperimentConfig,
    spec: &GridSpec,
    task_index: usize,
    algorithm: Algorithm,
    strategy: Strategy,
    model: Option<&ClassifierModel>,
) -> Result<Vec<EpisodeRecord>> {
    let shield = match strategy {
        Strategy::EpsilonGreedy => None,
        Strategy::SafeExploration => Some(
            model.ok_or_else(|| Error::Config("safe exploration requires a classifier model".into()))?,
        ),
    };
    let learner = cfg.train_learner(algorithm);
    learner.validate()?;
    spec.validate()?;

    let one_run = |run_id: usize| -> Result<Vec<EpisodeRecord>> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run_seed(task_index, run_id));
        let mut q = QTable::new(spec.width, spec.height);
        (0..cfg.train.episodes)
            .map(|episode_idx| {
                let stats = run_episode(spec, &mut q, &learner, &mut rng, shield, None)?;
                Ok(EpisodeRecord {
                    run_id,
                    episode_idx,
                    steps: stats.steps,
                    outcome: stats.outcome,
                    discounted_return: discounted_return(stats.steps, stats.outcome, learner.gamma),
                    shield_activations: stats.shield_activations,
                })
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<Result<Vec<EpisodeRecord>>> = {
        use rayon::prelude::*;
        (0..cfg.train.runs).into_par_iter().map(one_run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Result<Vec<EpisodeRecord>>> = (0..cfg.train.runs).map(one_run).collect();

    let mut out = Vec::with_capacity(cfg.train.runs * cfg.train.episodes);
    for run in runs {
        out.extend(run?);
    }
    Ok(out)
}

pub fn episodes_to_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::with_capacity(40 * records.len() + 80);
    out.push_str(EpisodeRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.run_id,
            r.episode_idx,
            r.steps,
            r.outcome.code(),
            r.discounted_return,
            r.shield_activations
        );
    }
    out
}

pub fn episodes_from_csv(text: &str) -> Result<Vec<EpisodeRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == EpisodeRecord::CSV_HEADER => {}
        _ => return Err(Error::parse(1, "missing episodes CSV header")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::parse(idx + 1, format!("bad {what} in `{line}`"));
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(bad("column count"));
        }
        out.push(EpisodeRecord {
            run_id: f[0].parse().map_err(|_| bad("run_id"))?,
            episode_idx: f[1].parse().map_err(|_| bad("episode_idx"))?,
            steps: f[2].parse().map_err(|_| bad("steps"))?,
            outcome: f[3].parse().map_err(|_| bad("outcome"))?,
            discounted_return: f[4].parse().map_err(|_| bad("discounted_return"))?,
            shield_activations: f[5].parse().map_err(|_| bad("shield_activations"))?,
        });
    }
    Ok(out)
}

pub fn trajectories_to_csv(trajectories: &[Trajectory]) -> String {
    let mut out = String::from("episode,t,agent_x,agent_y,heading,obstacle_row,obstacle_dir,outcome\n");
    for (e, traj) in trajectories.iter().enumerate() {
        for (t, s) in traj.states.iter().enumerate() {
            let _ = writeln!(
                out,
                "{e},{t},{},{},{},{},{},{}",
                s.agent_x,
                s.agent_y,
                s.heading.code(),
                s.obstacle_row,
                s.obstacle_dir.code(),
                traj.outcome.code()
            );
        }
    }
    out
}
