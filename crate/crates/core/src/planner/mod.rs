//! Tabular value iteration over the full (agent, block) state space and
//! closed-loop execution of the resulting universal policy.

mod execute;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{evaluate, Action, GridMap, PropositionalFunction, WorldError, WorldState};

pub use execute::{execute_actions, execute_policy, Controller, Execution, Step, Termination, Trajectory};

pub const DEFAULT_DISCOUNT: f64 = 0.95;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 10_000;
pub const DEFAULT_MAX_STEPS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("value iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("discount must lie in (0, 1), got {0}")]
    InvalidDiscount(f64),
}

/// A propositional function used as a reward: reaching a state where it holds
/// ends the episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundedReward {
    pub proposition: PropositionalFunction,
    pub goal_reward: f64,
    pub step_reward: f64,
    pub discount: f64,
}

impl GroundedReward {
    pub fn new(proposition: PropositionalFunction) -> Self {
        Self {
            proposition,
            goal_reward: 1.0,
            step_reward: 0.0,
            discount: DEFAULT_DISCOUNT,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            goal_reward: self.goal_reward * c,
            step_reward: self.step_reward * c,
            ..self
        }
    }
}

/// Greedy policy and converged values over every enumerated state.
#[derive(Debug, Clone)]
pub struct Policy {
    map: GridMap,
    reward: GroundedReward,
    slip: f64,
    free: usize,
    values: Vec<f64>,
    actions: Vec<Action>,
    goal: Vec<bool>,
    residuals: Vec<f64>,
}

impl Policy {
    fn index(&self, s: &WorldState) -> Option<usize> {
        let a = self.map.free_index(s.agent)?;
        let b = self.map.free_index(s.block)?;
        (a != b).then_some(a * self.free + b)
    }

    /// Greedy action at `s`. Goal states and states outside the map have none.
    pub fn action(&self, s: &WorldState) -> Option<Action> {
        let i = self.index(s)?;
        (!self.goal[i]).then(|| self.actions[i])
    }

    pub fn value(&self, s: &WorldState) -> Option<f64> {
        self.index(s).map(|i| self.values[i])
    }

    pub fn is_goal(&self, s: &WorldState) -> bool {
        self.index(s).is_some_and(|i| self.goal[i])
    }

    pub fn reward(&self) -> &GroundedReward {
        &self.reward
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    /// Max-norm change of the value table after each sweep.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }
}

pub fn value_iteration(
    map: &GridMap,
    reward: &GroundedReward,
    slip: f64,
    tol: f64,
) -> Result<Policy, PlanError> {
    value_iteration_capped(map, reward, slip, tol, MAX_SWEEPS)
}

/// Synchronous value iteration with goal states held terminal at
/// `goal_reward`. Greedy ties go to the earliest action in [`Action::ALL`].
pub fn value_iteration_capped(
    map: &GridMap,
    reward: &GroundedReward,
    slip: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<Policy, PlanError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(PlanError::InvalidTolerance(tol));
    }
    if !(reward.discount > 0.0 && reward.discount < 1.0) {
        return Err(PlanError::InvalidDiscount(reward.discount));
    }
    if !(0.0..1.0).contains(&slip) {
        return Err(WorldError::InvalidSlip(slip).into());
    }
    map.room(reward.proposition.room)?;

    let cells = map.free_cells();
    let free = cells.len();
    let n = free * free;
    let mut valid = vec![false; n];
    let mut goal = vec![false; n];
    // successor index under each deterministic action
    let mut next = vec![[0usize; 4]; n];
    for (a, &agent) in cells.iter().enumerate() {
        for (b, &block) in cells.iter().enumerate() {
            if a == b {
                continue;
            }
            let i = a * free + b;
            let s = WorldState::new(agent, block);
            valid[i] = true;
            goal[i] = evaluate(&reward.proposition, map, &s)?;
            for action in Action::ALL {
                let t = map.apply(s, action);
                let ta = map.free_index(t.agent).expect("successor on free cell");
                let tb = map.free_index(t.block).expect("successor on free cell");
                next[i][action.index()] = ta * free + tb;
            }
        }
    }

    let gamma = reward.discount;
    let q = |values: &[f64], i: usize, action: usize| -> f64 {
        let succ = &next[i];
        let expected = if slip == 0.0 {
            values[succ[action]]
        } else {
            let others: f64 = (0..4).filter(|&b| b != action).map(|b| values[succ[b]]).sum();
            (1.0 - slip) * values[succ[action]] + slip / 3.0 * others
        };
        reward.step_reward + gamma * expected
    };

    let mut values: Vec<f64> = goal
        .iter()
        .map(|&g| if g { reward.goal_reward } else { 0.0 })
        .collect();
    let mut scratch = values.clone();
    let mut residuals = Vec::new();
    loop {
        let mut residual: f64 = 0.0;
        for i in 0..n {
            if !valid[i] || goal[i] {
                continue;
            }
            let best = (0..4).map(|a| q(&values, i, a)).fold(f64::NEG_INFINITY, f64::max);
            residual = residual.max((best - values[i]).abs());
            scratch[i] = best;
        }
        std::mem::swap(&mut values, &mut scratch);
        residuals.push(residual);
        if residual < tol {
            break;
        }
        if residuals.len() >= max_sweeps {
            return Err(PlanError::NotConverged {
                sweeps: residuals.len(),
                residual,
            });
        }
    }

    let mut actions = vec![Action::North; n];
    for i in 0..n {
        if !valid[i] || goal[i] {
            continue;
        }
        let mut best_action = Action::ALL[0];
        let mut best = q(&values, i, 0);
        for action in &Action::ALL[1..] {
            let v = q(&values, i, action.index());
            if strictly_better(v, best) {
                best = v;
                best_action = *action;
            }
        }
        actions[i] = best_action;
    }

    Ok(Policy {
        map: map.clone(),
        reward: *reward,
        slip,
        free,
        values,
        actions,
        goal,
        residuals,
    })
}

// Relative comparison so that positive reward scaling cannot flip a tie.
fn strictly_better(candidate: f64, best: f64) -> bool {
    candidate - best > 1e-12 * candidate.abs().max(best.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{default_map, parse_map, Color, Pos};

    fn room(map: &GridMap, color: Color) -> crate::world::RoomId {
        map.rooms().iter().find(|r| r.color == color).unwrap().id
    }

    #[test]
    fn goal_states_are_terminal() {
        let map = default_map();
        let reward = GroundedReward::new(PropositionalFunction::agent_in(room(&map, Color::Red)));
        let policy = value_iteration(&map, &reward, 0.0, DEFAULT_TOLERANCE).unwrap();
        let inside = WorldState::new(Pos::new(2, 2), Pos::new(5, 5));
        assert!(policy.is_goal(&inside));
        assert_eq!(policy.action(&inside), None);
        assert_eq!(policy.value(&inside), Some(1.0));
        assert!(*policy.residuals().last().unwrap() < DEFAULT_TOLERANCE);
    }

    #[test]
    fn values_decay_geometrically_with_distance() {
        let map = default_map();
        let reward = GroundedReward::new(PropositionalFunction::agent_in(room(&map, Color::Red)));
        let policy = value_iteration(&map, &reward, 0.0, 1e-9).unwrap();
        // (4,2) -> door (3,2) -> room (2,2): two moves
        let s = WorldState::new(Pos::new(4, 2), Pos::new(6, 8));
        assert!((policy.value(&s).unwrap() - 0.95f64.powi(2)).abs() < 1e-9);
        assert_eq!(policy.action(&s), Some(Action::North));
    }

    #[test]
    fn equal_length_paths_break_ties_in_fixed_order() {
        let text = "#####\n#rr.#\n#r..#\n#.A.#\n#.B.#\n#gg.#\n#####\nA=. B=.\n";
        let map = parse_map(text).unwrap();
        let red = room(&map, Color::Red);
        let reward = GroundedReward::new(PropositionalFunction::agent_in(red));
        let policy = value_iteration(&map, &reward, 0.0, DEFAULT_TOLERANCE).unwrap();
        // agent at (2,2): north reaches (1,2) red, west reaches (2,1) red; both one step
        let s = WorldState::new(Pos::new(2, 2), Pos::new(4, 2));
        assert_eq!(policy.action(&s), Some(Action::North));
    }

    #[test]
    fn non_convergence_is_reported() {
        let map = default_map();
        let reward = GroundedReward::new(PropositionalFunction::block_in(room(&map, Color::Blue)));
        match value_iteration_capped(&map, &reward, 0.1, 1e-12, 3) {
            Err(PlanError::NotConverged { sweeps, residual }) => {
                assert_eq!(sweeps, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let map = default_map();
        let reward = GroundedReward::new(PropositionalFunction::agent_in(room(&map, Color::Red)));
        assert!(matches!(
            value_iteration(&map, &reward, 0.0, 0.0),
            Err(PlanError::InvalidTolerance(_))
        ));
        let bad = GroundedReward {
            discount: 1.0,
            ..reward
        };
        assert!(matches!(
            value_iteration(&map, &bad, 0.0, 1e-6),
            Err(PlanError::InvalidDiscount(_))
        ));
        let unknown = GroundedReward::new(PropositionalFunction::agent_in(crate::world::RoomId(7)));
        assert!(matches!(
            value_iteration(&map, &unknown, 0.0, 1e-6),
            Err(PlanError::World(WorldError::UnknownRoom(_)))
        ));
    }
}
