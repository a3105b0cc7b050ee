//! Tabular Q-Learning and SARSA with ε-greedy exploration.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gridworld::{Action, EnvState, GridPos, Heading, VerticalDir};

/// The learner's own action set. `DoNothing` is reserved for the safe policy.
pub const LEARNER_ACTIONS: [Action; 3] = [Action::TurnLeft, Action::TurnRight, Action::Forward];

fn learner_index(a: Action) -> usize {
    match a {
        Action::TurnLeft => 0,
        Action::TurnRight => 1,
        Action::Forward => 2,
        Action::DoNothing => panic!("DoNothing is not a learner action"),
    }
}

/// What the learner sees: agent cell and heading plus the obstacle's row and
/// direction. The obstacle column is fixed per task, so it is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TabularState {
    pub agent_x: usize,
    pub agent_y: usize,
    pub obstacle_row: usize,
    pub obstacle_dir: VerticalDir,
    pub heading: Heading,
}

impl TabularState {
    pub fn agent(&self) -> GridPos {
        GridPos::new(self.agent_x, self.agent_y)
    }
}

impl From<&EnvState> for TabularState {
    fn from(s: &EnvState) -> Self {
        Self {
            agent_x: s.agent.x,
            agent_y: s.agent.y,
            obstacle_row: s.obstacle_row,
            obstacle_dir: s.obstacle_dir,
            heading: s.heading,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    QLearning,
    Sarsa,
}

impl Algorithm {
    pub fn code(self) -> &'static str {
        match self {
            Algorithm::QLearning => "q",
            Algorithm::Sarsa => "sarsa",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "q" | "qlearning" => Ok(Algorithm::QLearning),
            "sarsa" => Ok(Algorithm::Sarsa),
            other => Err(format!("expected q or sarsa, got `{other}`")),
        }
    }
}

/// How the greedy branch of ε-greedy resolves equal action values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieBreak {
    /// First maximal action in [`LEARNER_ACTIONS`] order.
    #[default]
    Fixed,
    /// Uniform over the maximal actions, drawn from the run's seeded stream.
    Random,
}

impl TieBreak {
    pub fn code(self) -> &'static str {
        match self {
            TieBreak::Fixed => "fixed",
            TieBreak::Random => "random",
        }
    }
}

impl FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(TieBreak::Fixed),
            "random" => Ok(TieBreak::Random),
            other => Err(format!("expected fixed or random, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub algorithm: Algorithm,
    pub tie_break: TieBreak,
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} not in [0,1]", self.gamma)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha {} not in (0,1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} not in [0,1]", self.epsilon)));
        }
        Ok(())
    }
}

/// Dense action-value table over every [`TabularState`] of a `width x height`
/// grid. Entries start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(width: usize, height: usize) -> Self {
        let len = width * height * height * 2 * 4 * LEARNER_ACTIONS.len();
        Self {
            width,
            height,
            values: vec![0.0; len],
        }
    }

    fn base(&self, s: &TabularState) -> usize {
        debug_assert!(s.agent_x < self.width && s.agent_y < self.height && s.obstacle_row < self.height);
        let cell = s.agent_y * self.width + s.agent_x;
        let obstacle = s.obstacle_row * 2 + s.obstacle_dir.index();
        ((cell * self.height * 2 + obstacle) * 4 + s.heading.index()) * LEARNER_ACTIONS.len()
    }

    fn row(&self, s: &TabularState) -> &[f64] {
        let b = self.base(s);
        &self.values[b..b + LEARNER_ACTIONS.len()]
    }

    pub fn get(&self, s: &TabularState, a: Action) -> f64 {
        self.row(s)[learner_index(a)]
    }

    pub fn set(&mut self, s: &TabularState, a: Action, value: f64) {
        let i = self.base(s) + learner_index(a);
        self.values[i] = value;
    }

    pub fn max_value(&self, s: &TabularState) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax over the learner actions; ties go to the earliest action in
    /// [`LEARNER_ACTIONS`].
    pub fn best_action(&self, s: &TabularState) -> Action {
        let row = self.row(s);
        let mut best = 0;
        for i in 1..row.len() {
            if row[i] > row[best] {
                best = i;
            }
        }
        LEARNER_ACTIONS[best]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Debug dump of every non-zero entry, one per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("agent_x,agent_y,heading,obstacle_row,obstacle_dir,action,value\n");
        for agent_y in 0..self.height {
            for agent_x in 0..self.width {
                for obstacle_row in 0..self.height {
                    for obstacle_dir in VerticalDir::ALL {
                        for heading in Heading::ALL {
                            let s = TabularState {
                                agent_x,
                                agent_y,
                                obstacle_row,
                                obstacle_dir,
                                heading,
                            };
                            for a in LEARNER_ACTIONS {
                                let v = self.get(&s, a);
                                if v != 0.0 {
                                    let _ = writeln!(
                                        out,
                                        "{agent_x},{agent_y},{},{obstacle_row},{},{},{v}",
                                        heading.code(),
                                        obstacle_dir.code(),
                                        a.name()
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// ε-greedy choice among the learner actions, greedy ties broken by
/// [`LEARNER_ACTIONS`] order.
pub fn select_action<R: Rng + ?Sized>(q: &QTable, s: &TabularState, epsilon: f64, rng: &mut R) -> Action {
    select_action_with(q, s, epsilon, TieBreak::Fixed, rng)
}

pub fn select_action_with<R: Rng + ?Sized>(
    q: &QTable,
    s: &TabularState,
    epsilon: f64,
    tie_break: TieBreak,
    rng: &mut R,
) -> Action {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return LEARNER_ACTIONS[rng.gen_range(0..LEARNER_ACTIONS.len())];
    }
    match tie_break {
        TieBreak::Fixed => q.best_action(s),
        TieBreak::Random => {
            let row = q.row(s);
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut tied = [Action::DoNothing; 3];
            let mut n = 0;
            for (a, v) in LEARNER_ACTIONS.iter().zip(row) {
                if *v == best {
                    tied[n] = *a;
                    n += 1;
                }
            }
            if n == 1 {
                tied[0]
            } else {
                tied[rng.gen_range(0..n)]
            }
        }
    }
}

pub fn q_update(
    q: &mut QTable,
    s: &TabularState,
    a: Action,
    reward: f64,
    s_next: &TabularState,
    done: bool,
    cfg: &LearnerConfig,
) {
    let bootstrap = if done { 0.0 } else { q.max_value(s_next) };
    td_update(q, s, a, reward + cfg.gamma * bootstrap, cfg.alpha);
}

/// `a_next` is ignored (and may be `None`) on terminal transitions.
#[allow(clippy::too_many_arguments)]
pub fn sarsa_update(
    q: &mut QTable,
    s: &TabularState,
    a: Action,
    reward: f64,
    s_next: &TabularState,
    a_next: Option<Action>,
    done: bool,
    cfg: &LearnerConfig,
) {
    let bootstrap = match (done, a_next) {
        (true, _) => 0.0,
        (false, Some(a_next)) => q.get(s_next, a_next),
        (false, None) => panic!("SARSA needs the next action on non-terminal transitions"),
    };
    td_update(q, s, a, reward + cfg.gamma * bootstrap, cfg.alpha);
}

fn td_update(q: &mut QTable, s: &TabularState, a: Action, target: f64, alpha: f64) {
    let old = q.get(s, a);
    q.set(s, a, old + alpha * (target - old));
}

/// The deterministic argmax policy of `q`.
pub fn greedy_policy(q: &QTable) -> impl Fn(&TabularState) -> Action + '_ {
    move |s| q.best_action(s)
}
