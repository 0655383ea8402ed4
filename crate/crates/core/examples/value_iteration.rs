//! Solve a goal reward with value iteration and follow the greedy policy.

use std::sync::Arc;

use draggn::planner::{
    execute_policy, value_iteration, GroundedReward, DEFAULT_MAX_STEPS, DEFAULT_TOLERANCE,
};
use draggn::semantics::GroundingModule;
use draggn::world::{default_map, Color, PropositionalFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let map = default_map();
    let green = GroundingModule::for_map(&map)
        .unwrap()
        .room(Color::Green)
        .unwrap();
    let reward = GroundedReward::new(PropositionalFunction::block_in(green));

    for slip in [0.0, 0.1] {
        let policy = Arc::new(value_iteration(&map, &reward, slip, DEFAULT_TOLERANCE).unwrap());
        let start = map.start();
        println!(
            "slip {slip}: {} sweeps, final residual {:.1e}, V(start) = {:.4}",
            policy.sweeps(),
            policy.residuals().last().unwrap(),
            policy.value(&start).unwrap()
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trajectory = execute_policy(&policy, start, DEFAULT_MAX_STEPS, &mut rng).unwrap();
        let actions: Vec<String> = trajectory.actions().iter().map(|a| a.to_string()).collect();
        println!(
            "  {:?} after {} steps: {}",
            trajectory.termination,
            trajectory.len(),
            actions.join(" ")
        );
    }
}
