use rand::seq::IndexedRandom;
use rand::Rng;

use crate::semantics::{BindingArgument, CallableUnit, UnitArgPair};
use crate::world::Color;

pub const DEFAULT_TEMPLATE_SET: &str = "default";

pub const NUMBER_WORDS: [&str; 8] = ["one", "two", "three", "four", "five", "six", "seven", "eight"];

const VERBS: [&str; 4] = ["move", "go", "walk", "head"];
const UNITS: [(&str, &str); 4] = [
    ("step", "steps"),
    ("space", "spaces"),
    ("pace", "paces"),
    ("square", "squares"),
];
const FILLERS: [&str; 6] = ["then", "finally", "now", "next", "and", "please"];
const OBJECTS: [&str; 4] = ["block", "chair", "box", "basket"];

/// `{v}` verb, `{d}` direction (plain or compass), `{c}` compass only,
/// `{n}` count, `{u}` distance unit.
pub(super) const ACTION_FRAMES: [&str; 7] = [
    "{v} {d} {n} {u}",
    "{d} {n} {u}",
    "{n} {u} {d}",
    "{v} {n} {u} {d}",
    "{n} {u} to the {c}",
    "take {n} {u} {d}",
    "{v} {d} for {n} {u}",
];

/// `{r}` room color.
pub(super) const AGENT_FRAMES: [&str; 7] = [
    "go to the {r} room",
    "move into the {r} room",
    "walk to the {r} room",
    "enter the {r} room",
    "head over to the {r} room",
    "navigate to the {r} room",
    "make your way to the {r} room",
];

/// `{o}` object, `{r}` room color.
pub(super) const BLOCK_FRAMES: [&str; 7] = [
    "put the {o} in the {r} room",
    "take the {o} to the {r} room",
    "push the {o} into the {r} room",
    "move the {o} to the {r} room",
    "bring the {o} to the {r} room",
    "get the {o} into the {r} room",
    "the {o} goes in the {r} room",
];

fn directions(unit: CallableUnit) -> (&'static str, &'static str) {
    match unit {
        CallableUnit::GoUp => ("up", "north"),
        CallableUnit::GoDown => ("down", "south"),
        CallableUnit::GoLeft => ("left", "west"),
        CallableUnit::GoRight => ("right", "east"),
        CallableUnit::AgentInRoom | CallableUnit::BlockInRoom => unreachable!("goal units have no direction"),
    }
}

fn pick<'a, R: Rng + ?Sized>(items: &[&'a str], rng: &mut R) -> &'a str {
    items.choose(rng).expect("template tables are non-empty")
}

/// Produce one paraphrase of `pair`. With probability `noise_rate` a filler
/// word is prepended.
pub fn realize<R: Rng + ?Sized>(pair: &UnitArgPair, noise_rate: f64, rng: &mut R) -> String {
    let body = match (pair.unit(), pair.arg()) {
        (
            unit @ (CallableUnit::GoUp | CallableUnit::GoDown | CallableUnit::GoLeft | CallableUnit::GoRight),
            BindingArgument::Steps(n),
        ) => {
            let (plain, compass) = directions(unit);
            let frame = pick(&ACTION_FRAMES, rng);
            let count = if rng.random_bool(0.5) {
                NUMBER_WORDS[n as usize - 1].to_string()
            } else {
                n.to_string()
            };
            let (singular, plural) = UNITS[rng.random_range(0..UNITS.len())];
            frame
                .replace("{v}", pick(&VERBS, rng))
                .replace("{d}", if rng.random_bool(0.5) { plain } else { compass })
                .replace("{c}", compass)
                .replace("{n}", &count)
                .replace("{u}", if n == 1 { singular } else { plural })
        }
        (CallableUnit::AgentInRoom, BindingArgument::RoomIs(color)) => {
            pick(&AGENT_FRAMES, rng).replace("{r}", color_word(color))
        }
        (CallableUnit::BlockInRoom, BindingArgument::RoomIs(color)) => pick(&BLOCK_FRAMES, rng)
            .replace("{o}", pick(&OBJECTS, rng))
            .replace("{r}", color_word(color)),
        _ => unreachable!("UnitArgPair is always valid"),
    };
    if noise_rate > 0.0 && rng.random_bool(noise_rate.min(1.0)) {
        format!("{} {body}", pick(&FILLERS, rng))
    } else {
        body
    }
}

fn color_word(color: Color) -> &'static str {
    color.name()
}
