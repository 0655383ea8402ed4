//! Cleanup World: a grid of colored rooms joined by a corridor, one agent and
//! one pushable block.
//!
//! Coordinates are `(row, col)`. North is decreasing row index, east is
//! increasing column index.

mod dynamics;
mod map;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dynamics::{enumerate_states, evaluate, transition};
pub use map::{default_map, parse_map, render_map, DEFAULT_MAP_TEXT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("map parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate room color {color}: {first} and {second}")]
    DuplicateColor {
        color: Color,
        first: RoomId,
        second: RoomId,
    },
    #[error("invalid state for map: {0}")]
    InvalidState(String),
    #[error("unknown room {0}")]
    UnknownRoom(RoomId),
    #[error("slip probability must lie in [0, 1), got {0}")]
    InvalidSlip(f64),
}

/// A grid cell coordinate. Serializes as `[row, col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// The neighbouring cell in `action`'s direction, if it has non-negative coordinates.
    pub fn step(self, action: Action) -> Option<Pos> {
        let (dr, dc) = action.delta();
        let row = self.row.checked_add_signed(dr)?;
        let col = self.col.checked_add_signed(dc)?;
        Some(Pos { row, col })
    }
}

impl From<[usize; 2]> for Pos {
    fn from([row, col]: [usize; 2]) -> Self {
        Pos { row, col }
    }
}

impl From<Pos> for [usize; 2] {
    fn from(p: Pos) -> Self {
        [p.row, p.col]
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Blue, Color::Yellow];

    pub fn glyph(self) -> char {
        match self {
            Color::Red => 'r',
            Color::Green => 'g',
            Color::Blue => 'b',
            Color::Yellow => 'y',
        }
    }

    pub fn from_glyph(c: char) -> Option<Color> {
        match c {
            'r' => Some(Color::Red),
            'g' => Some(Color::Green),
            'b' => Some(Color::Blue),
            'y' => Some(Color::Yellow),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Wall,
    Floor,
    Door,
}

impl CellKind {
    pub fn is_free(self) -> bool {
        !matches!(self, CellKind::Wall)
    }
}

/// Room identifier token, rendered as `room<N>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoomId(pub usize);

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "room{}", self.0)
    }
}

impl FromStr for RoomId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("room")
            .and_then(|n| n.parse().ok())
            .map(RoomId)
            .ok_or_else(|| format!("invalid room id {s:?}"))
    }
}

impl Serialize for RoomId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RoomId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A maximal 4-connected region of same-colored floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Room {
    pub id: RoomId,
    pub color: Color,
    pub cells: BTreeSet<Pos>,
}

impl Room {
    pub fn contains(&self, p: Pos) -> bool {
        self.cells.contains(&p)
    }
}

/// Parsed, validated Cleanup World geometry plus the start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    room_of: Vec<Option<usize>>,
    rooms: Vec<Room>,
    start: WorldState,
    free: Vec<Pos>,
    free_index: Vec<Option<usize>>,
}

impl GridMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn room(&self, id: RoomId) -> Result<&Room, WorldError> {
        self.rooms.get(id.0).ok_or(WorldError::UnknownRoom(id))
    }

    pub fn start(&self) -> WorldState {
        self.start
    }

    pub fn kind(&self, p: Pos) -> CellKind {
        if p.row >= self.height || p.col >= self.width {
            return CellKind::Wall;
        }
        self.cells[p.row * self.width + p.col]
    }

    pub fn is_free(&self, p: Pos) -> bool {
        self.kind(p).is_free()
    }

    /// Room containing `p`, or `None` for corridor, door and wall cells.
    pub fn room_at(&self, p: Pos) -> Option<&Room> {
        if p.row >= self.height || p.col >= self.width {
            return None;
        }
        self.room_of[p.row * self.width + p.col].map(|i| &self.rooms[i])
    }

    /// Floor and door cells in row-major order.
    pub fn free_cells(&self) -> &[Pos] {
        &self.free
    }

    /// Position of `p` within [`free_cells`](Self::free_cells).
    pub fn free_index(&self, p: Pos) -> Option<usize> {
        if p.row >= self.height || p.col >= self.width {
            return None;
        }
        self.free_index[p.row * self.width + p.col]
    }

    pub fn check_state(&self, s: &WorldState) -> Result<(), WorldError> {
        if !self.is_free(s.agent) {
            return Err(WorldError::InvalidState(format!(
                "agent at {} is not a floor or door cell",
                s.agent
            )));
        }
        if !self.is_free(s.block) {
            return Err(WorldError::InvalidState(format!(
                "block at {} is not a floor or door cell",
                s.block
            )));
        }
        if s.agent == s.block {
            return Err(WorldError::InvalidState(format!(
                "agent and block share cell {}",
                s.agent
            )));
        }
        Ok(())
    }
}

/// Positions of the two movable objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorldState {
    pub agent: Pos,
    #[serde(rename = "block")]
    pub block: Pos,
}

impl WorldState {
    pub const fn new(agent: Pos, block: Pos) -> Self {
        Self { agent, block }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    North,
    South,
    East,
    West,
}

impl Action {
    /// Fixed order, also used for greedy tie-breaking.
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Action::North => (-1, 0),
            Action::South => (1, 0),
            Action::East => (0, 1),
            Action::West => (0, -1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::North => "north",
            Action::South => "south",
            Action::East => "east",
            Action::West => "west",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropKind {
    #[serde(rename = "agentInRoom")]
    AgentInRoom,
    #[serde(rename = "blockInRoom")]
    BlockInRoom,
}

/// A propositional function over world states, e.g. `blockInRoom block0 room1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropositionalFunction {
    pub kind: PropKind,
    pub room: RoomId,
}

impl PropositionalFunction {
    pub fn agent_in(room: RoomId) -> Self {
        Self {
            kind: PropKind::AgentInRoom,
            room,
        }
    }

    pub fn block_in(room: RoomId) -> Self {
        Self {
            kind: PropKind::BlockInRoom,
            room,
        }
    }
}

impl fmt::Display for PropositionalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PropKind::AgentInRoom => write!(f, "agentInRoom agent0 {}", self.room),
            PropKind::BlockInRoom => write!(f, "blockInRoom block0 {}", self.room),
        }
    }
}
