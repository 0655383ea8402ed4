//! Ground unit/argument pairs and dispatch them: action pairs run open
//! loop, goal pairs go through the planner.

use draggn::planner::DEFAULT_MAX_STEPS;
use draggn::semantics::{dispatch, GroundingModule, UnitArgPair};
use draggn::world::default_map;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let map = default_map();
    let grounding = GroundingModule::for_map(&map).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = map.start();
    for text in [
        "goDown 3",
        "goUp 2",
        "goLeft 4",
        "agentInRoom roomIsRed",
        "blockInRoom roomIsBlue",
    ] {
        let pair: UnitArgPair = text.parse().unwrap();
        let task = grounding.ground(&pair).unwrap();
        let trajectory = dispatch(&task, &map, state, 0.0, DEFAULT_MAX_STEPS, &mut rng).unwrap();
        state = trajectory.final_state;
        println!(
            "{:<24} -> {:<34} {:>3} steps, {:?}, agent {} block {}",
            pair.to_string(),
            task.to_string(),
            trajectory.len(),
            trajectory.termination,
            state.agent,
            state.block
        );
    }

    let yellow: UnitArgPair = "agentInRoom roomIsYellow".parse().unwrap();
    println!("{yellow}: {}", grounding.ground(&yellow).unwrap_err());
}
