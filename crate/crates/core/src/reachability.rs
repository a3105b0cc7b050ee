//! Backward reachable sets of the collision states.
//!
//! Two routes to the same set: labels derived from logged trajectories through
//! a windowed minimum of the signed distance, and an exhaustive search over
//! short action sequences that serves as the ground truth.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gridworld::{self, Action, EnvState, GridPos, GridSpec, Heading, Outcome, VerticalDir};
use crate::tabular_rl::TabularState;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Every visited state, starting with the reset state and ending with the
    /// terminal one.
    pub states: Vec<TabularState>,
    pub outcome: Outcome,
}

/// Look-ahead window in timesteps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Horizon(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTrace(pub Vec<f64>);

/// Euclidean distance between agent and obstacle. Zero exactly on collision,
/// infinite on an obstacle-free layout.
pub fn signed_distance(s: &TabularState, spec: &GridSpec) -> f64 {
    if !spec.has_obstacle {
        return f64::INFINITY;
    }
    let dx = s.agent_x as f64 - spec.obstacle_column as f64;
    let dy = s.agent_y as f64 - s.obstacle_row as f64;
    dx.hypot(dy)
}

/// `V(s_i)` is the smallest signed distance over `s_i ..= s_{i+t}`, with the
/// window clipped at the end of the trajectory.
pub fn value_trace(traj: &Trajectory, h: Horizon, spec: &GridSpec) -> ValueTrace {
    let distances: Vec<f64> = traj.states.iter().map(|s| signed_distance(s, spec)).collect();
    windowed_min(&distances, h)
}

pub(crate) fn windowed_min(distances: &[f64], h: Horizon) -> ValueTrace {
    let n = distances.len();
    ValueTrace(
        (0..n)
            .map(|i| {
                let end = n.min(i.saturating_add(h.0).saturating_add(1));
                distances[i..end].iter().copied().fold(f64::INFINITY, f64::min)
            })
            .collect(),
    )
}

pub fn brs_labels(trace: &ValueTrace) -> Vec<bool> {
    trace.0.iter().map(|v| *v <= 0.0).collect()
}

/// Upper bound on `states x 4^t` that [`brute_force_brs`] accepts.
pub const BRUTE_FORCE_BUDGET: u64 = 1_000_000_000;

/// Every non-terminal state of `spec`, including collision states.
pub fn all_states(spec: &GridSpec) -> impl Iterator<Item = TabularState> + '_ {
    (0..spec.height).flat_map(move |agent_y| {
        (0..spec.width).flat_map(move |agent_x| {
            (0..spec.height).flat_map(move |obstacle_row| {
                VerticalDir::ALL.into_iter().flat_map(move |obstacle_dir| {
                    Heading::ALL.into_iter().filter_map(move |heading| {
                        let s = TabularState {
                            agent_x,
                            agent_y,
                            obstacle_row,
                            obstacle_dir,
                            heading,
                        };
                        let agent = GridPos::new(agent_x, agent_y);
                        (!spec.is_blocked(agent) && agent != spec.goal).then_some(s)
                    })
                })
            })
        })
    })
}

/// All states from which some sequence of at most `h` actions (including
/// `DoNothing`) ends in a collision. Exhaustive; refuses grids whose search
/// would exceed [`BRUTE_FORCE_BUDGET`].
pub fn brute_force_brs(spec: &GridSpec, h: Horizon) -> Result<BTreeSet<TabularState>> {
    spec.validate()?;
    let states = (spec.width * spec.height * spec.height * 2 * 4) as u64;
    let branches = u32::try_from(h.0)
        .ok()
        .and_then(|t| (Action::ALL.len() as u64).checked_pow(t))
        .unwrap_or(u64::MAX);
    if states.saturating_mul(branches) > BRUTE_FORCE_BUDGET {
        return Err(Error::TooLarge {
            states,
            branches,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let unbounded = GridSpec {
        max_steps: usize::MAX,
        has_obstacle: true,
        ..spec.clone()
    };
    Ok(all_states(spec)
        .filter(|s| can_collide(&unbounded, &to_env(s), h.0))
        .collect())
}

fn to_env(s: &TabularState) -> EnvState {
    EnvState {
        agent: s.agent(),
        heading: s.heading,
        obstacle_row: s.obstacle_row,
        obstacle_dir: s.obstacle_dir,
        steps_elapsed: 0,
    }
}

fn can_collide(spec: &GridSpec, s: &EnvState, depth: usize) -> bool {
    if s.is_collision(spec) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    Action::ALL.into_iter().any(|a| {
        // Non-terminal states always step successfully.
        let r = gridworld::step(s, a, spec).expect("stepping a live state");
        match r.outcome {
            Outcome::Collision => true,
            Outcome::Running => can_collide(spec, &r.next, depth - 1),
            Outcome::Goal | Outcome::Timeout => false,
        }
    })
}
