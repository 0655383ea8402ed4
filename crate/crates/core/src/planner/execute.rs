use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PlanError, Policy};
use crate::world::{transition, Action, GridMap, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Goal,
    StepLimit,
    CompletedActions,
}

/// The state an action was taken from, and the action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub state: WorldState,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub final_state: WorldState,
    pub termination: Termination,
}

impl Trajectory {
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// What picks the next action.
#[derive(Debug, Clone)]
pub enum Controller {
    /// Closed loop: consult the universal policy at whatever state we are in.
    Policy(Arc<Policy>),
    /// Open loop: replay a fixed action list.
    Script { actions: Vec<Action>, cursor: usize },
}

/// A task in progress. The world state may be overwritten between steps
/// (see [`perturb`](Self::perturb)); recorded steps are not re-validated.
#[derive(Debug, Clone)]
pub struct Execution {
    map: GridMap,
    controller: Controller,
    slip: f64,
    state: WorldState,
    steps: Vec<Step>,
    max_steps: usize,
    termination: Option<Termination>,
}

impl Execution {
    pub fn with_policy(policy: Arc<Policy>, start: WorldState, max_steps: usize) -> Result<Self, PlanError> {
        let map = policy.map().clone();
        map.check_state(&start)?;
        let slip = policy.slip();
        let mut exec = Self {
            map,
            controller: Controller::Policy(policy),
            slip,
            state: start,
            steps: Vec::new(),
            max_steps,
            termination: None,
        };
        exec.termination = exec.check();
        Ok(exec)
    }

    pub fn with_actions(
        map: &GridMap,
        start: WorldState,
        actions: Vec<Action>,
        slip: f64,
    ) -> Result<Self, PlanError> {
        map.check_state(&start)?;
        if !(0.0..1.0).contains(&slip) {
            return Err(crate::world::WorldError::InvalidSlip(slip).into());
        }
        let max_steps = actions.len();
        let mut exec = Self {
            map: map.clone(),
            controller: Controller::Script { actions, cursor: 0 },
            slip,
            state: start,
            steps: Vec::new(),
            max_steps,
            termination: None,
        };
        exec.termination = exec.check();
        Ok(exec)
    }

    pub fn state(&self) -> WorldState {
        self.state
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    /// Replace the world state, e.g. someone moved the block. A finished
    /// goal task whose goal no longer holds is reopened.
    pub fn perturb(&mut self, state: WorldState) -> Result<(), PlanError> {
        self.map.check_state(&state)?;
        self.state = state;
        if self.termination != Some(Termination::CompletedActions) {
            self.termination = self.check();
        }
        Ok(())
    }

    fn check(&self) -> Option<Termination> {
        match &self.controller {
            Controller::Policy(policy) => {
                if policy.is_goal(&self.state) {
                    Some(Termination::Goal)
                } else if self.steps.len() >= self.max_steps {
                    Some(Termination::StepLimit)
                } else {
                    None
                }
            }
            Controller::Script { actions, cursor } => {
                (*cursor >= actions.len()).then_some(Termination::CompletedActions)
            }
        }
    }

    /// Take one step. Returns the termination reason once the task is over.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Termination> {
        if let Some(t) = self.termination {
            return Some(t);
        }
        let action = match &mut self.controller {
            Controller::Policy(policy) => policy
                .action(&self.state)
                .expect("non-goal state has a greedy action"),
            Controller::Script { actions, cursor } => {
                let a = actions[*cursor];
                *cursor += 1;
                a
            }
        };
        let outcomes =
            transition(&self.map, self.state, action, self.slip).expect("execution state is valid");
        let next = sample(&outcomes, rng);
        self.steps.push(Step {
            state: self.state,
            action,
        });
        self.state = next;
        self.termination = self.check();
        self.termination
    }

    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Termination {
        loop {
            if let Some(t) = self.step(rng) {
                return t;
            }
        }
    }

    /// Snapshot as a trajectory; unfinished executions report `None`.
    pub fn trajectory(&self) -> Option<Trajectory> {
        self.termination.map(|termination| Trajectory {
            steps: self.steps.clone(),
            final_state: self.state,
            termination,
        })
    }
}

fn sample<R: Rng + ?Sized>(outcomes: &[(WorldState, f64)], rng: &mut R) -> WorldState {
    if let [(only, _)] = outcomes {
        return *only;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, p) in outcomes {
        acc += p;
        if u < acc {
            return *s;
        }
    }
    outcomes.last().expect("non-empty distribution").0
}

/// Follow `policy` from `start` until its proposition holds or `max_steps`
/// actions have been taken.
pub fn execute_policy<R: Rng + ?Sized>(
    policy: &Arc<Policy>,
    start: WorldState,
    max_steps: usize,
    rng: &mut R,
) -> Result<Trajectory, PlanError> {
    let mut exec = Execution::with_policy(Arc::clone(policy), start, max_steps)?;
    exec.run(rng);
    Ok(exec.trajectory().expect("run terminates"))
}

/// Execute `actions` verbatim; blocked moves still consume their step.
pub fn execute_actions<R: Rng + ?Sized>(
    map: &GridMap,
    start: WorldState,
    actions: &[Action],
    slip: f64,
    rng: &mut R,
) -> Result<Trajectory, PlanError> {
    let mut exec = Execution::with_actions(map, start, actions.to_vec(), slip)?;
    exec.run(rng);
    Ok(exec.trajectory().expect("run terminates"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{value_iteration, GroundedReward, DEFAULT_TOLERANCE};
    use crate::world::{default_map, Color, Pos, PropositionalFunction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(a: (usize, usize), b: (usize, usize)) -> WorldState {
        WorldState::new(Pos::new(a.0, a.1), Pos::new(b.0, b.1))
    }

    fn solve(color: Color, block: bool) -> Arc<Policy> {
        let map = default_map();
        let room = map.rooms().iter().find(|r| r.color == color).unwrap().id;
        let prop = if block {
            PropositionalFunction::block_in(room)
        } else {
            PropositionalFunction::agent_in(room)
        };
        Arc::new(value_iteration(&map, &GroundedReward::new(prop), 0.0, DEFAULT_TOLERANCE).unwrap())
    }

    #[test]
    fn start_at_goal_is_empty() {
        let policy = solve(Color::Red, false);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = execute_policy(&policy, st((2, 2), (5, 5)), 200, &mut rng).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.termination, Termination::Goal);
    }

    #[test]
    fn one_step_budget_hits_the_limit() {
        let policy = solve(Color::Blue, false);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = execute_policy(&policy, st((1, 1), (5, 5)), 1, &mut rng).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.termination, Termination::StepLimit);
    }

    #[test]
    fn empty_action_list_returns_start() {
        let map = default_map();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = execute_actions(&map, map.start(), &[], 0.0, &mut rng).unwrap();
        assert_eq!(t.final_state, map.start());
        assert_eq!(t.termination, Termination::CompletedActions);
    }

    #[test]
    fn blocked_action_consumes_a_step() {
        let map = default_map();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = st((1, 1), (5, 5));
        let t = execute_actions(&map, s, &[Action::North, Action::West], 0.0, &mut rng).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.final_state, s);
    }

    #[test]
    fn three_south_two_west() {
        let map = default_map();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let actions = [
            Action::South,
            Action::South,
            Action::South,
            Action::West,
            Action::West,
        ];
        let t = execute_actions(&map, st((1, 3), (9, 9)), &actions, 0.0, &mut rng).unwrap();
        assert_eq!(t.actions(), actions.to_vec());
        // (1,3) -> (2,3) -> wall at (3,3) twice -> (2,2) -> (2,1)
        assert_eq!(t.final_state, st((2, 1), (9, 9)));
    }

    #[test]
    fn perturbation_mid_goal_task_still_reaches_goal() {
        let map = default_map();
        let policy = solve(Color::Green, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut exec = Execution::with_policy(policy.clone(), map.start(), 200).unwrap();
        for _ in 0..4 {
            assert_eq!(exec.step(&mut rng), None);
        }
        let s = exec.state();
        assert_ne!(s.agent, Pos::new(4, 3));
        let moved = WorldState::new(s.agent, Pos::new(4, 3));
        assert_ne!(moved.block, s.block);
        exec.perturb(moved).unwrap();
        assert_eq!(exec.run(&mut rng), Termination::Goal);
        assert!(policy.is_goal(&exec.state()));
    }

    #[test]
    fn perturbation_onto_wall_is_rejected() {
        let map = default_map();
        let mut exec = Execution::with_actions(&map, map.start(), vec![Action::East], 0.0).unwrap();
        let bad = WorldState::new(map.start().agent, Pos::new(0, 0));
        assert!(exec.perturb(bad).is_err());
        assert_eq!(exec.state(), map.start());
    }
}
