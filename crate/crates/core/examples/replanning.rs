//! Move the block while a task is running. The goal-based policy recovers;
//! replaying the same actions does not.

use std::sync::Arc;

use draggn::planner::{value_iteration, Execution, GroundedReward, DEFAULT_MAX_STEPS, DEFAULT_TOLERANCE};
use draggn::semantics::GroundingModule;
use draggn::world::{default_map, evaluate, Color, Pos, PropositionalFunction, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let map = default_map();
    let green = GroundingModule::for_map(&map)
        .unwrap()
        .room(Color::Green)
        .unwrap();
    let goal = PropositionalFunction::block_in(green);
    let policy = Arc::new(value_iteration(&map, &GroundedReward::new(goal), 0.0, DEFAULT_TOLERANCE).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut plan = Execution::with_policy(Arc::clone(&policy), map.start(), DEFAULT_MAX_STEPS).unwrap();
    plan.run(&mut rng);
    let actions = plan.trajectory().unwrap().actions();
    println!("unperturbed plan: {} steps", actions.len());

    let mut closed = Execution::with_policy(policy, map.start(), DEFAULT_MAX_STEPS).unwrap();
    let mut open = Execution::with_actions(&map, map.start(), actions, 0.0).unwrap();
    for exec in [&mut closed, &mut open] {
        for _ in 0..3 {
            exec.step(&mut rng);
        }
        let s = exec.state();
        exec.perturb(WorldState::new(s.agent, Pos::new(4, 3))).unwrap();
    }
    println!("block moved to (4, 3) after 3 steps");

    for (name, exec) in [("goal policy", &mut closed), ("action replay", &mut open)] {
        let end = exec.run(&mut rng);
        let s = exec.state();
        println!(
            "{name:>13}: {end:?} after {} steps, block {}, goal holds: {}",
            exec.steps().len(),
            s.block,
            evaluate(&goal, &map, &s).unwrap()
        );
    }
}
