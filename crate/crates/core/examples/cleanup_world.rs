//! Load the default Cleanup World map, push the block around and look at
//! the slip transition distribution.

use draggn::world::{default_map, render_map, transition, Action};

fn main() {
    let map = default_map();
    print!("{}", render_map(&map));
    for room in map.rooms() {
        println!(
            "{} is {} ({} cells)",
            room.id,
            room.color.name(),
            room.cells.len()
        );
    }

    let mut s = map.start();
    println!("start: agent {}, block {}", s.agent, s.block);
    for a in [Action::East, Action::East, Action::East, Action::North] {
        s = map.apply(s, a);
        println!("{a:>5}: agent {}, block {}", s.agent, s.block);
    }

    println!("moving north with slip 0.2 from the start:");
    for (next, p) in transition(&map, map.start(), Action::North, 0.2).unwrap() {
        println!("  p = {p:.3}: agent {}", next.agent);
    }
}
