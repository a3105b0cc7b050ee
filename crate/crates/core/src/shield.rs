//! Policy switching: the learner acts unless the classifier flags the current
//! state as BRS, in which case a rule-based safe policy takes over.
//!
//! The safe policy treats the obstacle's whole column as its path. Off the
//! column the agent waits. In the column it takes the shortest turn-and-move
//! sequence into a neighboring column (east preferred), then waits.

use std::collections::VecDeque;

use rand::Rng;

use crate::classify::{extract_features_with, ClassifierModel};
use crate::gridworld::{Action, GridPos, GridSpec, Heading};
use crate::tabular_rl::{select_action_with, QTable, TabularState, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionSource {
    Learner,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShieldDecision {
    pub source: DecisionSource,
    pub action: Action,
}

/// Actions still owed by an exit manoeuvre.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SafePlan {
    pub queue: VecDeque<Action>,
}

impl SafePlan {
    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }
}

pub fn in_obstacle_path(s: &TabularState, spec: &GridSpec) -> bool {
    spec.has_obstacle && s.agent_x == spec.obstacle_column
}

/// Rotations that turn `from` to face `to`.
fn rotations(from: Heading, to: Heading) -> &'static [Action] {
    if from == to {
        &[]
    } else if from.turn_right() == to {
        &[Action::TurnRight]
    } else if from.turn_left() == to {
        &[Action::TurnLeft]
    } else {
        &[Action::TurnRight, Action::TurnRight]
    }
}

fn exit_plan(s: &TabularState, spec: &GridSpec) -> Option<VecDeque<Action>> {
    let here = s.agent();
    [Heading::East, Heading::West]
        .into_iter()
        .filter(|&h| spec.neighbor(here, h).is_some_and(|p: GridPos| !spec.is_blocked(p)))
        .map(|h| {
            let mut plan: VecDeque<Action> = rotations(s.heading, h).iter().copied().collect();
            plan.push_back(Action::Forward);
            plan
        })
        // min_by_key keeps the first minimum, so ties go east.
        .min_by_key(VecDeque::len)
}

pub fn safe_action(s: &TabularState, plan: SafePlan, spec: &GridSpec) -> (Action, SafePlan) {
    let mut plan = plan;
    if let Some(next) = plan.queue.pop_front() {
        return (next, plan);
    }
    if !in_obstacle_path(s, spec) {
        return (Action::DoNothing, SafePlan::default());
    }
    match exit_plan(s, spec) {
        Some(mut queue) => {
            let first = queue.pop_front().expect("exit plans end with Forward");
            (first, SafePlan { queue })
        }
        None => (Action::DoNothing, SafePlan::default()),
    }
}

/// One shielded action choice. The safe plan is threaded through calls and
/// dropped as soon as the classifier stops flagging the state.
#[allow(clippy::too_many_arguments)]
pub fn shield_decide<R: Rng + ?Sized>(
    s: &TabularState,
    model: &ClassifierModel,
    q: &QTable,
    plan: SafePlan,
    epsilon: f64,
    rng: &mut R,
    spec: &GridSpec,
) -> (ShieldDecision, SafePlan) {
    shield_decide_with(s, model, q, plan, epsilon, TieBreak::Fixed, rng, spec)
}

/// [`shield_decide`] with an explicit tie-break mode for the learner branch.
#[allow(clippy::too_many_arguments)]
pub fn shield_decide_with<R: Rng + ?Sized>(
    s: &TabularState,
    model: &ClassifierModel,
    q: &QTable,
    plan: SafePlan,
    epsilon: f64,
    tie_break: TieBreak,
    rng: &mut R,
    spec: &GridSpec,
) -> (ShieldDecision, SafePlan) {
    let features = extract_features_with(s, spec, model.feature_set());
    if model.predict(&features) {
        let (action, plan) = safe_action(s, plan, spec);
        (
            ShieldDecision {
                source: DecisionSource::Safe,
                action,
            },
            plan,
        )
    } else {
        (
            ShieldDecision {
                source: DecisionSource::Learner,
                action: select_action_with(q, s, epsilon, tie_break, rng),
            },
            SafePlan::default(),
        )
    }
}
