use super::{Action, GridMap, PropKind, PropositionalFunction, WorldError, WorldState};

impl GridMap {
    /// Deterministic effect of `action`: walls block, the block is pushed one
    /// cell if the cell beyond it is free, otherwise the move is a no-op.
    pub fn apply(&self, s: WorldState, action: Action) -> WorldState {
        let Some(target) = s.agent.step(action).filter(|p| self.is_free(*p)) else {
            return s;
        };
        if target != s.block {
            return WorldState::new(target, s.block);
        }
        match s.block.step(action).filter(|p| self.is_free(*p)) {
            Some(beyond) => WorldState::new(target, beyond),
            None => s,
        }
    }
}

/// Outcome distribution of taking `action` in `s`.
///
/// With probability `1 - slip` the intended action applies; each of the three
/// other actions applies with probability `slip / 3`. Outcomes reaching the
/// same state are merged, in order of first appearance along [`Action::ALL`].
pub fn transition(
    map: &GridMap,
    s: WorldState,
    action: Action,
    slip: f64,
) -> Result<Vec<(WorldState, f64)>, WorldError> {
    if !(0.0..1.0).contains(&slip) {
        return Err(WorldError::InvalidSlip(slip));
    }
    map.check_state(&s)?;
    let mut out: Vec<(WorldState, f64)> = Vec::with_capacity(4);
    for b in Action::ALL {
        let p = if b == action { 1.0 - slip } else { slip / 3.0 };
        if p == 0.0 {
            continue;
        }
        let next = map.apply(s, b);
        match out.iter_mut().find(|(t, _)| *t == next) {
            Some((_, q)) => *q += p,
            None => out.push((next, p)),
        }
    }
    Ok(out)
}

pub fn evaluate(prop: &PropositionalFunction, map: &GridMap, s: &WorldState) -> Result<bool, WorldError> {
    let room = map.room(prop.room)?;
    Ok(match prop.kind {
        PropKind::AgentInRoom => room.contains(s.agent),
        PropKind::BlockInRoom => room.contains(s.block),
    })
}

/// Every placement of agent and block on distinct free cells; agent-major,
/// both in row-major cell order.
pub fn enumerate_states(map: &GridMap) -> Vec<WorldState> {
    let free = map.free_cells();
    let mut out = Vec::with_capacity(free.len() * free.len().saturating_sub(1));
    for &agent in free {
        for &block in free {
            if agent != block {
                out.push(WorldState::new(agent, block));
            }
        }
    }
    out
}
