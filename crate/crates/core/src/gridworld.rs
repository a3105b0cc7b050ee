//! Deterministic grid world with a single vertically patrolling obstacle.
//!
//! Coordinates: `x` is the column (grows rightward), `y` is the row (grows
//! downward). The obstacle lives in a fixed column and bounces between row 0
//! and row `height - 1`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kv::{KvReader, KvWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPos {
    pub x: usize,
    pub y: usize,
}

impl GridPos {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn turn_right(self) -> Self {
        Self::ALL[(self.index() + 1) % 4]
    }

    pub fn turn_left(self) -> Self {
        Self::ALL[(self.index() + 3) % 4]
    }

    /// Unit step `(dx, dy)` in grid coordinates.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub fn code(self) -> char {
        match self {
            Heading::North => 'n',
            Heading::East => 'e',
            Heading::South => 's',
            Heading::West => 'w',
        }
    }
}

impl FromStr for Heading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(Heading::North),
            "e" => Ok(Heading::East),
            "s" => Ok(Heading::South),
            "w" => Ok(Heading::West),
            other => Err(format!("expected one of n,e,s,w, got `{other}`")),
        }
    }
}

/// Direction of the obstacle's vertical motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerticalDir {
    Up,
    Down,
}

impl VerticalDir {
    pub const ALL: [VerticalDir; 2] = [VerticalDir::Up, VerticalDir::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn flip(self) -> Self {
        match self {
            VerticalDir::Up => VerticalDir::Down,
            VerticalDir::Down => VerticalDir::Up,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            VerticalDir::Up => "up",
            VerticalDir::Down => "down",
        }
    }
}

impl FromStr for VerticalDir {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(VerticalDir::Up),
            "down" => Ok(VerticalDir::Down),
            other => Err(format!("expected up or down, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
    /// Only the safe policy issues this; the environment accepts it from anyone.
    DoNothing,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::Forward,
        Action::DoNothing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::Forward => "forward",
            Action::DoNothing => "do_nothing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub goal: GridPos,
    pub blocked: BTreeSet<GridPos>,
    pub obstacle_column: usize,
    pub obstacle_init_row: usize,
    pub obstacle_init_dir: VerticalDir,
    pub agent_start: GridPos,
    pub agent_start_heading: Heading,
    pub max_steps: usize,
    /// False for an obstacle-free layout: the obstacle fields are kept but
    /// the obstacle never moves and never collides.
    pub has_obstacle: bool,
}

/// Episode cap used when none is given: `4 * width * height`.
pub fn default_max_steps(width: usize, height: usize) -> usize {
    4 * width * height
}

impl GridSpec {
    pub fn in_bounds(&self, p: GridPos) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn is_blocked(&self, p: GridPos) -> bool {
        self.blocked.contains(&p)
    }

    /// True when `p` is inside the grid and not blocked.
    pub fn is_free(&self, p: GridPos) -> bool {
        self.in_bounds(p) && !self.is_blocked(p)
    }

    /// The cell one step from `p` along `heading`, if it lies inside the grid.
    pub fn neighbor(&self, p: GridPos, heading: Heading) -> Option<GridPos> {
        let (dx, dy) = heading.delta();
        let x = p.x.checked_add_signed(dx)?;
        let y = p.y.checked_add_signed(dy)?;
        let q = GridPos::new(x, y);
        self.in_bounds(q).then_some(q)
    }

    pub fn obstacle_init_cell(&self) -> GridPos {
        GridPos::new(self.obstacle_column, self.obstacle_init_row)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.width < 2 || self.height < 2 {
            return fail(format!("grid must be at least 2x2, got {}x{}", self.width, self.height));
        }
        if self.max_steps < 1 {
            return fail("max_steps must be at least 1".into());
        }
        for (name, p) in [
            ("goal", self.goal),
            ("agent_start", self.agent_start),
            ("obstacle", self.obstacle_init_cell()),
        ] {
            if !self.in_bounds(p) {
                return fail(format!("{name} {p} is outside the {}x{} grid", self.width, self.height));
            }
        }
        if let Some(p) = self.blocked.iter().find(|p| !self.in_bounds(**p)) {
            return fail(format!("blocked cell {p} is outside the grid"));
        }
        if let Some(p) = self.blocked.iter().find(|p| self.has_obstacle && p.x == self.obstacle_column) {
            return fail(format!("blocked cell {p} lies in the obstacle column"));
        }
        if self.is_blocked(self.goal) {
            return fail(format!("goal {} is blocked", self.goal));
        }
        if self.is_blocked(self.agent_start) {
            return fail(format!("agent start {} is blocked", self.agent_start));
        }
        if self.has_obstacle && self.obstacle_init_cell() == self.goal {
            return fail(format!("obstacle starts on the goal {}", self.goal));
        }
        if self.has_obstacle && self.obstacle_init_cell() == self.agent_start {
            return fail(format!("obstacle starts on the agent {}", self.agent_start));
        }
        if self.agent_start == self.goal {
            return fail(format!("agent starts on the goal {}", self.goal));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let blocked = self
            .blocked
            .iter()
            .map(|p| format!("{},{}", p.x, p.y))
            .collect::<Vec<_>>()
            .join(";");
        let mut w = KvWriter::new();
        w.put("width", self.width)
            .put("height", self.height)
            .put("goal_x", self.goal.x)
            .put("goal_y", self.goal.y)
            .put("blocked", blocked)
            .put("obstacle_column", self.obstacle_column)
            .put("obstacle_init_row", self.obstacle_init_row)
            .put("obstacle_init_dir", self.obstacle_init_dir.code())
            .put("agent_start_x", self.agent_start.x)
            .put("agent_start_y", self.agent_start.y)
            .put("agent_start_heading", self.agent_start_heading.code())
            .put("max_steps", self.max_steps);
        if !self.has_obstacle {
            w.put("obstacle", false);
        }
        w.finish()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kv = KvReader::parse(text)?;
        let (line, blocked_raw) = kv.require_str("blocked")?;
        let mut blocked = BTreeSet::new();
        for pair in blocked_raw.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let parsed = pair
                .split_once(',')
                .and_then(|(x, y)| Some(GridPos::new(x.trim().parse().ok()?, y.trim().parse().ok()?)));
            match parsed {
                Some(p) => {
                    blocked.insert(p);
                }
                None => return Err(Error::parse(line, format!("bad blocked cell `{pair}`"))),
            }
        }
        let spec = GridSpec {
            width: kv.require("width")?,
            height: kv.require("height")?,
            goal: GridPos::new(kv.require("goal_x")?, kv.require("goal_y")?),
            blocked,
            obstacle_column: kv.require("obstacle_column")?,
            obstacle_init_row: kv.require("obstacle_init_row")?,
            obstacle_init_dir: kv.require("obstacle_init_dir")?,
            agent_start: GridPos::new(kv.require("agent_start_x")?, kv.require("agent_start_y")?),
            agent_start_heading: kv.require("agent_start_heading")?,
            max_steps: kv.require("max_steps")?,
            has_obstacle: kv.take("obstacle")?.unwrap_or(true),
        };
        kv.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvState {
    pub agent: GridPos,
    pub heading: Heading,
    pub obstacle_row: usize,
    pub obstacle_dir: VerticalDir,
    pub steps_elapsed: usize,
}

impl EnvState {
    pub fn obstacle_cell(&self, spec: &GridSpec) -> GridPos {
        GridPos::new(spec.obstacle_column, self.obstacle_row)
    }

    pub fn is_collision(&self, spec: &GridSpec) -> bool {
        spec.has_obstacle && self.agent == self.obstacle_cell(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Running,
    Goal,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn code(self) -> &'static str {
        match self {
            Outcome::Running => "running",
            Outcome::Goal => "goal",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }

    pub fn reward(self) -> f64 {
        match self {
            Outcome::Goal => 1.0,
            Outcome::Collision => -1.0,
            Outcome::Running | Outcome::Timeout => 0.0,
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "running" => Ok(Outcome::Running),
            "goal" => Ok(Outcome::Goal),
            "collision" => Ok(Outcome::Collision),
            "timeout" => Ok(Outcome::Timeout),
            other => Err(format!("unknown outcome `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub next: EnvState,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
}

pub fn reset(spec: &GridSpec) -> Result<EnvState> {
    spec.validate()?;
    Ok(EnvState {
        agent: spec.agent_start,
        heading: spec.agent_start_heading,
        obstacle_row: spec.obstacle_init_row,
        obstacle_dir: spec.obstacle_init_dir,
        steps_elapsed: 0,
    })
}

/// Moves the obstacle one row, bouncing off the top and bottom edges.
pub fn advance_obstacle(row: usize, dir: VerticalDir, height: usize) -> (usize, VerticalDir) {
    match dir {
        VerticalDir::Up if row == 0 => (1, VerticalDir::Down),
        VerticalDir::Up => (row - 1, VerticalDir::Up),
        VerticalDir::Down if row + 1 >= height => (row - 1, VerticalDir::Up),
        VerticalDir::Down => (row + 1, VerticalDir::Down),
    }
}

/// Applies the agent's rotation or move. Moves into walls or blocked cells
/// leave the agent in place.
pub fn apply_action(spec: &GridSpec, agent: GridPos, heading: Heading, action: Action) -> (GridPos, Heading) {
    match action {
        Action::TurnLeft => (agent, heading.turn_left()),
        Action::TurnRight => (agent, heading.turn_right()),
        Action::Forward => match spec.neighbor(agent, heading) {
            Some(next) if !spec.is_blocked(next) => (next, heading),
            _ => (agent, heading),
        },
        Action::DoNothing => (agent, heading),
    }
}

/// One tick of the environment.
///
/// Effects happen in this order: the agent acts, collision check, the obstacle
/// moves, collision check, goal check, then the step counter advances and the
/// episode times out if it hit `max_steps`.
pub fn step(state: &EnvState, action: Action, spec: &GridSpec) -> Result<StepResult> {
    if !spec.is_free(state.agent) {
        return Err(Error::Usage(format!("agent {} is not on a free cell", state.agent)));
    }
    if state.obstacle_row >= spec.height {
        return Err(Error::Usage(format!("obstacle row {} is outside the grid", state.obstacle_row)));
    }
    if state.is_collision(spec) || state.agent == spec.goal || state.steps_elapsed >= spec.max_steps {
        return Err(Error::Usage("episode already terminated".into()));
    }

    let (agent, heading) = apply_action(spec, state.agent, state.heading, action);
    let mut next = EnvState {
        agent,
        heading,
        steps_elapsed: state.steps_elapsed + 1,
        ..*state
    };
    let finish = |next: EnvState, outcome: Outcome| StepResult {
        next,
        reward: outcome.reward(),
        done: outcome != Outcome::Running,
        outcome,
    };

    if next.is_collision(spec) {
        return Ok(finish(next, Outcome::Collision));
    }
    if spec.has_obstacle {
        let (row, dir) = advance_obstacle(next.obstacle_row, next.obstacle_dir, spec.height);
        next.obstacle_row = row;
        next.obstacle_dir = dir;
    }
    if next.is_collision(spec) {
        return Ok(finish(next, Outcome::Collision));
    }
    if next.agent == spec.goal {
        return Ok(finish(next, Outcome::Goal));
    }
    if next.steps_elapsed >= spec.max_steps {
        return Ok(finish(next, Outcome::Timeout));
    }
    Ok(finish(next, Outcome::Running))
}

const MAX_GENERATION_ATTEMPTS: usize = 1000;
const TASK_BLOCKED_CELLS: usize = 5;

/// Random task layout: goal in the right third, obstacle column left of it,
/// five blocked cells, and a guaranteed obstacle-free route to the goal.
pub fn generate_task(seed: u64, width: usize, height: usize) -> Result<GridSpec> {
    if width < 6 || height < 6 {
        return Err(Error::InvalidSpec(format!(
            "generated tasks need at least 6x6, got {width}x{height}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = (2 * width).div_ceil(3);
    let agent_start = GridPos::new(0, height / 2);

    let goal = GridPos::new(rng.gen_range(split..width), rng.gen_range(0..height));
    let obstacle_column = rng.gen_range(0..split);
    let obstacle_init_row = loop {
        let row = rng.gen_range(0..height);
        if GridPos::new(obstacle_column, row) != agent_start {
            break row;
        }
    };
    let obstacle_init_dir = if rng.gen_bool(0.5) { VerticalDir::Up } else { VerticalDir::Down };

    let candidates: Vec<GridPos> = (0..height)
        .flat_map(|y| (0..width).map(move |x| GridPos::new(x, y)))
        .filter(|&p| p != goal && p != agent_start && p.x != obstacle_column)
        .collect();

    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let blocked: BTreeSet<GridPos> = candidates
            .choose_multiple(&mut rng, TASK_BLOCKED_CELLS)
            .copied()
            .collect();
        let spec = GridSpec {
            width,
            height,
            goal,
            blocked,
            obstacle_column,
            obstacle_init_row,
            obstacle_init_dir,
            agent_start,
            agent_start_heading: Heading::East,
            max_steps: default_max_steps(width, height),
            has_obstacle: true,
        };
        if goal_reachable(&spec) {
            spec.validate()?;
            return Ok(spec);
        }
    }
    Err(Error::Generation {
        seed,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// Breadth-first search over free cells from the start to the goal,
/// ignoring the obstacle.
pub fn goal_reachable(spec: &GridSpec) -> bool {
    let mut seen = BTreeSet::from([spec.agent_start]);
    let mut queue = VecDeque::from([spec.agent_start]);
    while let Some(p) = queue.pop_front() {
        if p == spec.goal {
            return true;
        }
        for h in Heading::ALL {
            if let Some(q) = spec.neighbor(p, h) {
                if !spec.is_blocked(q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
    }
    false
}

/// The 10x10 pre-training zone: no blocked cells, goal in the right third,
/// obstacle patrolling column 4.
pub fn pretrain_spec() -> GridSpec {
    GridSpec {
        width: 10,
        height: 10,
        goal: GridPos::new(8, 5),
        blocked: BTreeSet::new(),
        obstacle_column: 4,
        obstacle_init_row: 2,
        obstacle_init_dir: VerticalDir::Down,
        agent_start: GridPos::new(0, 5),
        agent_start_heading: Heading::East,
        max_steps: default_max_steps(10, 10),
        has_obstacle: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_spec(width: usize, height: usize) -> GridSpec {
        GridSpec {
            width,
            height,
            goal: GridPos::new(width - 1, 0),
            blocked: BTreeSet::new(),
            obstacle_column: width / 2,
            obstacle_init_row: 0,
            obstacle_init_dir: VerticalDir::Down,
            agent_start: GridPos::new(0, height / 2),
            agent_start_heading: Heading::East,
            max_steps: default_max_steps(width, height),
            has_obstacle: true,
        }
    }

    fn state(x: usize, y: usize, heading: Heading, row: usize, dir: VerticalDir) -> EnvState {
        EnvState {
            agent: GridPos::new(x, y),
            heading,
            obstacle_row: row,
            obstacle_dir: dir,
            steps_elapsed: 0,
        }
    }

    #[test]
    fn reset_copies_spec_fields() {
        let spec = GridSpec {
            obstacle_column: 4,
            obstacle_init_row: 2,
            agent_start: GridPos::new(0, 5),
            ..open_spec(10, 10)
        };
        let s = reset(&spec).unwrap();
        assert_eq!(s, state(0, 5, Heading::East, 2, VerticalDir::Down));
    }

    #[test]
    fn reset_rejects_invalid_specs() {
        let mut spec = open_spec(10, 10);
        spec.blocked.insert(spec.agent_start);
        assert!(matches!(reset(&spec), Err(Error::InvalidSpec(_))));

        let mut spec = open_spec(10, 10);
        spec.goal = spec.obstacle_init_cell();
        assert!(matches!(reset(&spec), Err(Error::InvalidSpec(_))));

        let mut spec = open_spec(10, 10);
        spec.max_steps = 0;
        assert!(reset(&spec).is_err());
    }

    #[test]
    fn forward_moves_along_heading() {
        let spec = open_spec(10, 10);
        let r = step(&state(3, 5, Heading::East, 0, VerticalDir::Down), Action::Forward, &spec).unwrap();
        assert_eq!(r.next.agent, GridPos::new(4, 5));
        assert_eq!(r.outcome, Outcome::Running);
    }

    #[test]
    fn forward_into_wall_or_block_is_noop() {
        let mut spec = open_spec(10, 10);
        let r = step(&state(0, 5, Heading::West, 0, VerticalDir::Down), Action::Forward, &spec).unwrap();
        assert_eq!(r.next.agent, GridPos::new(0, 5));
        spec.blocked.insert(GridPos::new(1, 5));
        let r = step(&state(0, 5, Heading::East, 0, VerticalDir::Down), Action::Forward, &spec).unwrap();
        assert_eq!(r.next.agent, GridPos::new(0, 5));
    }

    #[test]
    fn obstacle_bounces_at_top() {
        let spec = open_spec(10, 10);
        let r = step(&state(0, 5, Heading::East, 0, VerticalDir::Up), Action::TurnLeft, &spec).unwrap();
        assert_eq!((r.next.obstacle_row, r.next.obstacle_dir), (1, VerticalDir::Down));
        assert_eq!(advance_obstacle(9, VerticalDir::Down, 10), (8, VerticalDir::Up));
    }

    #[test]
    fn obstacle_moving_into_agent_collides() {
        let spec = GridSpec {
            obstacle_column: 4,
            ..open_spec(10, 10)
        };
        let r = step(&state(4, 3, Heading::East, 2, VerticalDir::Down), Action::DoNothing, &spec).unwrap();
        assert_eq!(r.outcome, Outcome::Collision);
        assert_eq!(r.reward, -1.0);
        assert!(r.done);
    }

    #[test]
    fn walking_into_obstacle_collides_before_it_moves() {
        let spec = GridSpec {
            obstacle_column: 4,
            ..open_spec(10, 10)
        };
        let r = step(&state(3, 3, Heading::East, 3, VerticalDir::Down), Action::Forward, &spec).unwrap();
        assert_eq!(r.outcome, Outcome::Collision);
        assert_eq!(r.next.obstacle_row, 3);
    }

    #[test]
    fn reaching_goal() {
        let spec = open_spec(10, 10);
        let r = step(&state(8, 0, Heading::East, 9, VerticalDir::Down), Action::Forward, &spec).unwrap();
        assert_eq!(r.outcome, Outcome::Goal);
        assert_eq!(r.reward, 1.0);
    }

    #[test]
    fn timeout_and_terminal_misuse() {
        let spec = GridSpec {
            max_steps: 1,
            has_obstacle: true,
            ..open_spec(10, 10)
        };
        let s0 = reset(&spec).unwrap();
        let r = step(&s0, Action::TurnLeft, &spec).unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.reward, 0.0);
        assert!(matches!(step(&r.next, Action::TurnLeft, &spec), Err(Error::Usage(_))));
    }

    #[test]
    fn turning_cycles() {
        for h in Heading::ALL {
            assert_eq!(h.turn_left().turn_right(), h);
            assert_eq!(h.turn_right().turn_right().turn_right().turn_right(), h);
        }
        assert_eq!(Heading::North.turn_right(), Heading::East);
        assert_eq!(Heading::North.turn_left(), Heading::West);
    }

    #[test]
    fn generated_task_respects_layout_rules() {
        let spec = generate_task(7, 15, 15).unwrap();
        assert!(spec.goal.x >= 10, "{spec:?}");
        assert!(spec.obstacle_column <= 9, "{spec:?}");
        assert_eq!(spec.blocked.len(), 5);
        assert_eq!(spec.agent_start, GridPos::new(0, 7));
        assert_eq!(spec.max_steps, 900);
        assert_eq!(spec, generate_task(7, 15, 15).unwrap());
        assert!(generate_task(7, 5, 15).is_err());
    }

    #[test]
    fn obstacle_free_layout_never_collides() {
        let mut spec = open_spec(6, 6);
        spec.has_obstacle = false;
        spec.obstacle_init_row = spec.agent_start.y;
        spec.obstacle_column = spec.agent_start.x;
        spec.validate().unwrap();
        let mut s = reset(&spec).unwrap();
        for _ in 0..3 {
            let r = step(&s, Action::Forward, &spec).unwrap();
            assert_eq!(r.outcome, Outcome::Running);
            assert_eq!((r.next.obstacle_row, r.next.obstacle_dir), (s.obstacle_row, s.obstacle_dir));
            s = r.next;
        }
        let text = spec.to_kv();
        assert!(text.contains("obstacle = false"));
        assert_eq!(GridSpec::from_kv(&text).unwrap(), spec);
        assert!(!open_spec(6, 6).to_kv().contains("obstacle ="));
    }

    #[test]
    fn pretrain_spec_is_valid_constant() {
        let spec = pretrain_spec();
        assert_eq!((spec.width, spec.height), (10, 10));
        assert!(spec.blocked.is_empty());
        assert!(spec.goal.x >= 7 && spec.obstacle_column < 7);
        assert_eq!(spec.max_steps, 400);
        spec.validate().unwrap();
        assert_eq!(spec, pretrain_spec());
    }

    #[test]
    fn spec_text_round_trip() {
        let spec = generate_task(3, 15, 15).unwrap();
        let text = spec.to_kv();
        assert!(text.contains("obstacle_init_dir = "));
        assert_eq!(GridSpec::from_kv(&text).unwrap(), spec);
        let empty = pretrain_spec().to_kv();
        assert!(empty.contains("blocked = \n"));
        assert_eq!(GridSpec::from_kv(&empty).unwrap(), pretrain_spec());
        assert!(GridSpec::from_kv(&format!("{text}colour = red\n")).is_err());
    }
}
