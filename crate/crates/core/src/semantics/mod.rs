//! Callable units and binding arguments, the validity table that pairs them,
//! the color-to-room lookup that grounds goal units, and dispatch of grounded
//! tasks to the planner or the open-loop executor.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::{
    execute_actions, execute_policy, value_iteration, GroundedReward, PlanError, Policy, Trajectory,
    DEFAULT_TOLERANCE,
};
use crate::world::{Action, Color, GridMap, PropositionalFunction, Room, RoomId, WorldState};

pub const MAX_STEPS_ARG: u8 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("argument {arg} is not valid for {unit}")]
    InvalidPair {
        unit: CallableUnit,
        arg: BindingArgument,
    },
    #[error("unknown callable unit {0:?}")]
    UnknownUnit(String),
    #[error("unknown binding argument {0:?}")]
    UnknownArgument(String),
    #[error("malformed pair {0:?}, expected \"<unit> <argument>\"")]
    MalformedPair(String),
    #[error("no {0} room in this map")]
    NoSuchRoom(Color),
    #[error("{color} names more than one room ({first}, {second})")]
    AmbiguousRoom {
        color: Color,
        first: RoomId,
        second: RoomId,
    },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "action")]
    Action,
    #[serde(rename = "goal")]
    Goal,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Action => "action",
            Category::Goal => "goal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CallableUnit {
    GoUp,
    GoDown,
    GoLeft,
    GoRight,
    AgentInRoom,
    BlockInRoom,
}

impl CallableUnit {
    pub const ALL: [CallableUnit; 6] = [
        CallableUnit::GoUp,
        CallableUnit::GoDown,
        CallableUnit::GoLeft,
        CallableUnit::GoRight,
        CallableUnit::AgentInRoom,
        CallableUnit::BlockInRoom,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn category(self) -> Category {
        match self {
            CallableUnit::AgentInRoom | CallableUnit::BlockInRoom => Category::Goal,
            _ => Category::Action,
        }
    }

    /// Primitive action repeated by an action-oriented unit.
    pub fn action(self) -> Option<Action> {
        match self {
            CallableUnit::GoUp => Some(Action::North),
            CallableUnit::GoDown => Some(Action::South),
            CallableUnit::GoLeft => Some(Action::West),
            CallableUnit::GoRight => Some(Action::East),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            CallableUnit::GoUp => "goUp",
            CallableUnit::GoDown => "goDown",
            CallableUnit::GoLeft => "goLeft",
            CallableUnit::GoRight => "goRight",
            CallableUnit::AgentInRoom => "agentInRoom",
            CallableUnit::BlockInRoom => "blockInRoom",
        }
    }
}

impl fmt::Display for CallableUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for CallableUnit {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|u| u.token() == s)
            .ok_or_else(|| SemanticsError::UnknownUnit(s.to_string()))
    }
}

/// A step count `1..=8` or a room color attribute. Output index order: the
/// eight step counts, then red, green, blue, yellow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BindingArgument {
    Steps(u8),
    RoomIs(Color),
}

impl BindingArgument {
    pub const COUNT: usize = MAX_STEPS_ARG as usize + 4;

    pub fn all() -> impl Iterator<Item = BindingArgument> {
        (0..Self::COUNT).map(|i| Self::from_index(i).expect("in range"))
    }

    pub fn index(self) -> usize {
        match self {
            BindingArgument::Steps(n) => usize::from(n) - 1,
            BindingArgument::RoomIs(c) => MAX_STEPS_ARG as usize + c as usize,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        let steps = MAX_STEPS_ARG as usize;
        if i < steps {
            Some(BindingArgument::Steps(i as u8 + 1))
        } else {
            Color::ALL.get(i - steps).map(|&c| BindingArgument::RoomIs(c))
        }
    }

    pub fn token(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BindingArgument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingArgument::Steps(n) => write!(f, "{n}"),
            BindingArgument::RoomIs(Color::Red) => f.write_str("roomIsRed"),
            BindingArgument::RoomIs(Color::Green) => f.write_str("roomIsGreen"),
            BindingArgument::RoomIs(Color::Blue) => f.write_str("roomIsBlue"),
            BindingArgument::RoomIs(Color::Yellow) => f.write_str("roomIsYellow"),
        }
    }
}

impl FromStr for BindingArgument {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::all()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| SemanticsError::UnknownArgument(s.to_string()))
    }
}

/// Arguments the environment allows for `unit`.
pub fn valid_arguments(unit: CallableUnit) -> Vec<BindingArgument> {
    match unit.category() {
        Category::Action => (1..=MAX_STEPS_ARG).map(BindingArgument::Steps).collect(),
        Category::Goal => Color::ALL.into_iter().map(BindingArgument::RoomIs).collect(),
    }
}

pub fn is_valid(unit: CallableUnit, arg: BindingArgument) -> bool {
    matches!(
        (unit.category(), arg),
        (Category::Action, BindingArgument::Steps(1..=MAX_STEPS_ARG))
            | (Category::Goal, BindingArgument::RoomIs(_))
    )
}

/// A callable unit with an argument it accepts. Canonical text form is
/// `"<unit> <argument>"`, e.g. `goUp 3` or `agentInRoom roomIsRed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitArgPair {
    unit: CallableUnit,
    arg: BindingArgument,
}

impl UnitArgPair {
    pub fn new(unit: CallableUnit, arg: BindingArgument) -> Result<Self, SemanticsError> {
        if is_valid(unit, arg) {
            Ok(Self { unit, arg })
        } else {
            Err(SemanticsError::InvalidPair { unit, arg })
        }
    }

    pub fn unit(&self) -> CallableUnit {
        self.unit
    }

    pub fn arg(&self) -> BindingArgument {
        self.arg
    }

    pub fn category(&self) -> Category {
        self.unit.category()
    }

    /// All 40 valid pairs, unit-major.
    pub fn all() -> Vec<UnitArgPair> {
        CallableUnit::ALL
            .into_iter()
            .flat_map(|u| {
                valid_arguments(u)
                    .into_iter()
                    .map(move |a| UnitArgPair { unit: u, arg: a })
            })
            .collect()
    }
}

impl fmt::Display for UnitArgPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.unit, self.arg)
    }
}

impl FromStr for UnitArgPair {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(' ');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(a), None) => UnitArgPair::new(u.parse()?, a.parse()?),
            _ => Err(SemanticsError::MalformedPair(s.to_string())),
        }
    }
}

impl Serialize for UnitArgPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("UnitArgPair", 2)?;
        st.serialize_field("unit", self.unit.token())?;
        st.serialize_field("arg", &self.arg.to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for UnitArgPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            unit: String,
            arg: String,
        }
        let raw = Raw::deserialize(d)?;
        let unit = raw.unit.parse().map_err(serde::de::Error::custom)?;
        let arg = raw.arg.parse().map_err(serde::de::Error::custom)?;
        UnitArgPair::new(unit, arg).map_err(serde::de::Error::custom)
    }
}

/// Output of grounding: either a repeated primitive action or a reward
/// function for the planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundedTask {
    ActionSequence { action: Action, count: u8 },
    Goal { reward: GroundedReward },
}

impl GroundedTask {
    pub fn category(&self) -> Category {
        match self {
            GroundedTask::ActionSequence { .. } => Category::Action,
            GroundedTask::Goal { .. } => Category::Goal,
        }
    }
}

impl fmt::Display for GroundedTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundedTask::ActionSequence { action, count } => write!(f, "{action} x{count}"),
            GroundedTask::Goal { reward } => write!(f, "reach {}", reward.proposition),
        }
    }
}

/// Color attribute to room id lookup for one map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundingModule {
    rooms: BTreeMap<Color, RoomId>,
}

impl GroundingModule {
    pub fn from_rooms<'a>(rooms: impl IntoIterator<Item = &'a Room>) -> Result<Self, SemanticsError> {
        let mut table = BTreeMap::new();
        for room in rooms {
            if let Some(first) = table.insert(room.color, room.id) {
                return Err(SemanticsError::AmbiguousRoom {
                    color: room.color,
                    first,
                    second: room.id,
                });
            }
        }
        Ok(Self { rooms: table })
    }

    pub fn for_map(map: &GridMap) -> Result<Self, SemanticsError> {
        Self::from_rooms(map.rooms())
    }

    pub fn room(&self, color: Color) -> Result<RoomId, SemanticsError> {
        self.rooms
            .get(&color)
            .copied()
            .ok_or(SemanticsError::NoSuchRoom(color))
    }

    pub fn ground(&self, pair: &UnitArgPair) -> Result<GroundedTask, SemanticsError> {
        match (pair.unit, pair.arg) {
            (unit, BindingArgument::Steps(count)) => Ok(GroundedTask::ActionSequence {
                action: unit.action().expect("validated action unit"),
                count,
            }),
            (unit, BindingArgument::RoomIs(color)) => {
                let room = self.room(color)?;
                let proposition = if unit == CallableUnit::AgentInRoom {
                    PropositionalFunction::agent_in(room)
                } else {
                    PropositionalFunction::block_in(room)
                };
                Ok(GroundedTask::Goal {
                    reward: GroundedReward::new(proposition),
                })
            }
        }
    }
}

pub fn ground(pair: &UnitArgPair, map: &GridMap) -> Result<GroundedTask, SemanticsError> {
    GroundingModule::for_map(map)?.ground(pair)
}

/// Solve a goal task's reward on `map`.
pub fn plan(map: &GridMap, reward: &GroundedReward, slip: f64) -> Result<Arc<Policy>, SemanticsError> {
    Ok(Arc::new(value_iteration(map, reward, slip, DEFAULT_TOLERANCE)?))
}

/// Route a grounded task: action sequences run open loop, goals are planned
/// and run closed loop for at most `max_steps`.
pub fn dispatch<R: Rng + ?Sized>(
    task: &GroundedTask,
    map: &GridMap,
    start: WorldState,
    slip: f64,
    max_steps: usize,
    rng: &mut R,
) -> Result<Trajectory, SemanticsError> {
    match task {
        GroundedTask::ActionSequence { action, count } => {
            let actions = vec![*action; usize::from(*count)];
            Ok(execute_actions(map, start, &actions, slip, rng)?)
        }
        GroundedTask::Goal { reward } => {
            let policy = plan(map, reward, slip)?;
            Ok(execute_policy(&policy, start, max_steps, rng)?)
        }
    }
}
