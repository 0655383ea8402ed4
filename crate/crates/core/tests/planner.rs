mod common;

use std::sync::Arc;

use draggn::planner::{execute_policy, value_iteration, GroundedReward, Termination, DEFAULT_TOLERANCE};
use draggn::world::{
    default_map, enumerate_states, parse_map, transition, Action, Pos, PropositionalFunction, RoomId,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{bfs_distance, random_goal, random_state};

#[test]
fn greedy_rollouts_match_breadth_first_shortest_paths() {
    let map = default_map();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut unreachable = 0;
    while checked < 100 {
        let start = random_state(&map, &mut rng);
        let goal = random_goal(&map, &mut rng);
        let policy =
            Arc::new(value_iteration(&map, &GroundedReward::new(goal), 0.0, DEFAULT_TOLERANCE).unwrap());
        assert!(*policy.residuals().last().unwrap() < 1e-6);
        let trajectory = execute_policy(&policy, start, 500, &mut rng).unwrap();
        match bfs_distance(&map, start, &goal) {
            Some(d) => {
                assert_eq!(trajectory.termination, Termination::Goal, "{start:?} -> {goal:?}");
                assert_eq!(trajectory.len(), d, "{start:?} -> {goal:?}");
                checked += 1;
            }
            None => {
                assert_eq!(trajectory.termination, Termination::StepLimit);
                unreachable += 1;
            }
        }
    }
    assert!(unreachable < 100);
}

#[test]
fn state_count_matches_brute_force() {
    let small = parse_map("######\n#rr#g#\n#AdBg#\n######\nA=r B=.\n").unwrap();
    for map in [default_map(), small] {
        let mut expected = 0;
        for r in 0..map.height() {
            for c in 0..map.width() {
                for r2 in 0..map.height() {
                    for c2 in 0..map.width() {
                        let (a, b) = (Pos::new(r, c), Pos::new(r2, c2));
                        if a != b && map.is_free(a) && map.is_free(b) {
                            expected += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(enumerate_states(&map).len(), expected);
    }
}

#[test]
fn transition_distributions_sum_to_one() {
    let map = default_map();
    for s in enumerate_states(&map).into_iter().step_by(37) {
        for slip in [0.0, 0.1, 0.5] {
            for a in Action::ALL {
                let outcomes = transition(&map, s, a, slip).unwrap();
                let total: f64 = outcomes.iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(outcomes.iter().all(|(t, _)| map.check_state(t).is_ok()));
            }
        }
    }
}

#[test]
fn residuals_contract_by_the_discount() {
    let map = default_map();
    for slip in [0.0, 0.2] {
        let reward = GroundedReward::new(PropositionalFunction::block_in(RoomId(1)));
        let policy = value_iteration(&map, &reward, slip, DEFAULT_TOLERANCE).unwrap();
        let r = policy.residuals();
        assert!(r.len() > 1);
        for w in r.windows(2) {
            assert!(w[1] <= reward.discount * w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
        assert!(*r.last().unwrap() < DEFAULT_TOLERANCE);
    }
}

#[test]
fn positive_reward_scaling_keeps_the_policy() {
    let map = default_map();
    let states = enumerate_states(&map);
    for (slip, prop) in [
        (0.0, PropositionalFunction::agent_in(RoomId(2))),
        (0.1, PropositionalFunction::block_in(RoomId(0))),
    ] {
        let base = GroundedReward::new(prop);
        let reference = value_iteration(&map, &base, slip, DEFAULT_TOLERANCE).unwrap();
        for c in [0.25, 3.0, 40.0] {
            let scaled = value_iteration(&map, &base.scaled(c), slip, DEFAULT_TOLERANCE).unwrap();
            for s in &states {
                assert_eq!(scaled.action(s), reference.action(s), "c = {c} at {s:?}");
                let (v, w) = (reference.value(s).unwrap(), scaled.value(s).unwrap());
                assert!(
                    (w - c * v).abs() <= 1e-4 * c.max(1.0),
                    "c = {c}: {w} vs {}",
                    c * v
                );
            }
        }
    }
}
