#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use draggn::world::{evaluate, Action, GridMap, PropositionalFunction, WorldState};
use rand::Rng;

/// Shortest number of deterministic moves from `start` to any state where
/// `goal` holds, by breadth-first search over the push dynamics.
pub fn bfs_distance(map: &GridMap, start: WorldState, goal: &PropositionalFunction) -> Option<usize> {
    let holds = |s: &WorldState| evaluate(goal, map, s).expect("goal refers to a room of this map");
    if holds(&start) {
        return Some(0);
    }
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((s, d)) = queue.pop_front() {
        for a in Action::ALL {
            let next = map.apply(s, a);
            if seen.insert(next) {
                if holds(&next) {
                    return Some(d + 1);
                }
                queue.push_back((next, d + 1));
            }
        }
    }
    None
}

pub fn random_state<R: Rng + ?Sized>(map: &GridMap, rng: &mut R) -> WorldState {
    let free = map.free_cells();
    loop {
        let agent = free[rng.random_range(0..free.len())];
        let block = free[rng.random_range(0..free.len())];
        if agent != block {
            return WorldState { agent, block };
        }
    }
}

pub fn random_goal<R: Rng + ?Sized>(map: &GridMap, rng: &mut R) -> PropositionalFunction {
    let room = map.rooms()[rng.random_range(0..map.rooms().len())].id;
    if rng.random_bool(0.5) {
        PropositionalFunction::agent_in(room)
    } else {
        PropositionalFunction::block_in(room)
    }
}
