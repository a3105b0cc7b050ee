//! WebAssembly front end for the demo page in `www/`.
//!
//! Everything returns JSON strings. The plain functions are what the tests
//! exercise; the `#[wasm_bindgen]` items only translate errors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use safegrid::classify::{ClassifierKind, ClassifierModel, EvalReport};
use safegrid::gridworld::{self, generate_task, EnvState, GridSpec, Heading, Outcome, VerticalDir};
use safegrid::harness::{fit_and_evaluate, pretrain_dataset, run_episode, ExperimentConfig};
use safegrid::reachability::{brute_force_brs, Horizon};
use safegrid::shield::{shield_decide_with, DecisionSource, SafePlan};
use safegrid::tabular_rl::{select_action_with, Algorithm, LearnerConfig, QTable, TabularState};

/// Largest horizon the heatmap accepts; the search grows as 4^t.
pub const MAX_HORIZON: usize = 4;

fn spec_json(spec: &GridSpec) -> Value {
    json!({
        "width": spec.width,
        "height": spec.height,
        "goal": [spec.goal.x, spec.goal.y],
        "blocked": spec.blocked.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
        "obstacle_column": spec.obstacle_column,
        "obstacle_init_row": spec.obstacle_init_row,
        "obstacle_init_dir": spec.obstacle_init_dir.code(),
        "agent_start": [spec.agent_start.x, spec.agent_start.y],
        "agent_start_heading": spec.agent_start_heading.code().to_string(),
        "max_steps": spec.max_steps,
    })
}

fn env_json(env: &EnvState, spec: &GridSpec) -> Value {
    json!({
        "agent": [env.agent.x, env.agent.y],
        "heading": env.heading.code().to_string(),
        "obstacle": [spec.obstacle_column, env.obstacle_row],
        "obstacle_dir": env.obstacle_dir.code(),
        "steps": env.steps_elapsed,
    })
}

pub fn task_layout(seed: u64, width: usize, height: usize) -> Result<String, String> {
    let spec = generate_task(seed, width, height).map_err(|e| e.to_string())?;
    Ok(spec_json(&spec).to_string())
}

/// Cells of the generated task whose state is in the exhaustive BRS for the
/// given obstacle phase and agent heading.
pub fn brs_map(
    seed: u64,
    width: usize,
    height: usize,
    obstacle_row: usize,
    obstacle_dir: &str,
    heading: &str,
    horizon: usize,
) -> Result<String, String> {
    if horizon > MAX_HORIZON {
        return Err(format!("horizon must be at most {MAX_HORIZON}"));
    }
    let spec = generate_task(seed, width, height).map_err(|e| e.to_string())?;
    if obstacle_row >= spec.height {
        return Err(format!("obstacle row {obstacle_row} outside 0..{}", spec.height));
    }
    let dir: VerticalDir = obstacle_dir.parse()?;
    let heading: Heading = heading.parse()?;
    let set = brute_force_brs(&spec, Horizon(horizon)).map_err(|e| e.to_string())?;
    let cells: Vec<[usize; 2]> = set
        .iter()
        .filter(|s| s.obstacle_row == obstacle_row && s.obstacle_dir == dir && s.heading == heading)
        .map(|s| [s.agent_x, s.agent_y])
        .collect();
    Ok(json!({
        "spec": spec_json(&spec),
        "obstacle": [spec.obstacle_column, obstacle_row],
        "cells": cells,
        "total_states": set.len(),
    })
    .to_string())
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    goals: usize,
    collisions: usize,
    timeouts: usize,
    shield_steps: usize,
}

/// A learner trained on one generated task, replayed one step at a time.
#[wasm_bindgen]
pub struct Demo {
    spec: GridSpec,
    model: ClassifierModel,
    report: EvalReport,
    q: QTable,
    learner: LearnerConfig,
    shielded: bool,
    rng: ChaCha8Rng,
    env: EnvState,
    plan: SafePlan,
    done: Option<Outcome>,
    trained: usize,
    tally: Tally,
}

impl Demo {
    pub fn build(task_seed: u64, pretrain_episodes: usize, train_episodes: usize, shielded: bool) -> Result<Demo, String> {
        let mut cfg = ExperimentConfig::default();
        cfg.pretrain.episodes = pretrain_episodes;
        let (_, data) = pretrain_dataset(&cfg).map_err(|e| e.to_string())?;
        let (model, report) = fit_and_evaluate(&data, &cfg, ClassifierKind::LinearSvm).map_err(|e| e.to_string())?;
        let spec = generate_task(task_seed, cfg.task_width, cfg.task_height).map_err(|e| e.to_string())?;
        let learner = cfg.train_learner(Algorithm::QLearning);
        let env = gridworld::reset(&spec).map_err(|e| e.to_string())?;
        let mut demo = Demo {
            q: QTable::new(spec.width, spec.height),
            rng: ChaCha8Rng::seed_from_u64(task_seed),
            spec,
            model,
            report,
            learner,
            shielded,
            env,
            plan: SafePlan::default(),
            done: None,
            trained: 0,
            tally: Tally::default(),
        };
        demo.train(train_episodes)?;
        Ok(demo)
    }

    pub fn train(&mut self, episodes: usize) -> Result<(), String> {
        let shield = self.shielded.then_some(&self.model);
        for _ in 0..episodes {
            let stats = run_episode(&self.spec, &mut self.q, &self.learner, &mut self.rng, shield, None)
                .map_err(|e| e.to_string())?;
            match stats.outcome {
                Outcome::Goal => self.tally.goals += 1,
                Outcome::Collision => self.tally.collisions += 1,
                _ => self.tally.timeouts += 1,
            }
            self.tally.shield_steps += stats.shield_activations;
        }
        self.trained += episodes;
        Ok(())
    }

    pub fn restart(&mut self) {
        self.env = gridworld::reset(&self.spec).expect("spec validated at build");
        self.plan = SafePlan::default();
        self.done = None;
    }

    /// Plays one step of the display episode (exploring, not learning).
    pub fn advance(&mut self) -> Result<String, String> {
        if let Some(outcome) = self.done {
            return Ok(json!({"state": env_json(&self.env, &self.spec), "done": true, "outcome": outcome.code()}).to_string());
        }
        let s = TabularState::from(&self.env);
        let (source, action) = if self.shielded {
            let (d, plan) = shield_decide_with(
                &s,
                &self.model,
                &self.q,
                std::mem::take(&mut self.plan),
                self.learner.epsilon,
                self.learner.tie_break,
                &mut self.rng,
                &self.spec,
            );
            self.plan = plan;
            (d.source, d.action)
        } else {
            (
                DecisionSource::Learner,
                select_action_with(&self.q, &s, self.learner.epsilon, self.learner.tie_break, &mut self.rng),
            )
        };
        let r = gridworld::step(&self.env, action, &self.spec).map_err(|e| e.to_string())?;
        self.env = r.next;
        if r.done {
            self.done = Some(r.outcome);
        }
        Ok(json!({
            "state": env_json(&self.env, &self.spec),
            "action": action.name(),
            "source": match source { DecisionSource::Learner => "learner", DecisionSource::Safe => "safe" },
            "done": r.done,
            "outcome": r.outcome.code(),
        })
        .to_string())
    }

    pub fn summary_json(&self) -> String {
        json!({
            "spec": spec_json(&self.spec),
            "state": env_json(&self.env, &self.spec),
            "shielded": self.shielded,
            "classifier": {"accuracy": self.report.accuracy, "f1": self.report.f1},
            "training": {
                "episodes": self.trained,
                "goals": self.tally.goals,
                "collisions": self.tally.collisions,
                "timeouts": self.tally.timeouts,
                "shield_steps": self.tally.shield_steps,
            },
        })
        .to_string()
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(task_seed: u32, pretrain_episodes: u32, train_episodes: u32, shielded: bool) -> Result<Demo, JsError> {
        Demo::build(task_seed.into(), pretrain_episodes as usize, train_episodes as usize, shielded).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = trainMore)]
    pub fn train_more(&mut self, episodes: u32) -> Result<(), JsError> {
        self.train(episodes as usize).map_err(|e| JsError::new(&e))
    }

    pub fn reset(&mut self) {
        self.restart();
    }

    pub fn step(&mut self) -> Result<String, JsError> {
        self.advance().map_err(|e| JsError::new(&e))
    }

    pub fn summary(&self) -> String {
        self.summary_json()
    }
}

#[wasm_bindgen(js_name = taskLayout)]
pub fn task_layout_js(seed: u32, width: u32, height: u32) -> Result<String, JsError> {
    task_layout(seed.into(), width as usize, height as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = brsMap)]
pub fn brs_map_js(
    seed: u32,
    width: u32,
    height: u32,
    obstacle_row: u32,
    obstacle_dir: &str,
    heading: &str,
    horizon: u32,
) -> Result<String, JsError> {
    brs_map(
        seed.into(),
        width as usize,
        height as usize,
        obstacle_row as usize,
        obstacle_dir,
        heading,
        horizon as usize,
    )
    .map_err(|e| JsError::new(&e))
}
