//! ASCII map format.
//!
//! One line per grid row, then a single metadata line naming the glyphs under
//! the agent and block:
//!
//! ```text
//! #######
//! #rr.bb#
//! #rA.Bb#
//! #######
//! A=r B=b
//! ```
//!
//! Glyphs: `#` wall, `.` corridor floor, `r`/`g`/`b`/`y` room floor, `d` door,
//! `A` agent start, `B` block start. Rooms are the maximal 4-connected regions
//! of one color and are numbered `room0`, `room1`, ... in row-major order of
//! their first cell.

use std::collections::{BTreeSet, VecDeque};

use super::{CellKind, Color, GridMap, Pos, Room, RoomId, WorldError, WorldState};

pub const DEFAULT_MAP_TEXT: &str = include_str!("../../data/cleanup_default.map");

/// The shipped 11x11 map: red, green and blue rooms around a corridor.
pub fn default_map() -> GridMap {
    parse_map(DEFAULT_MAP_TEXT).expect("shipped default map is valid")
}

#[derive(Clone, Copy, PartialEq)]
enum Under {
    Corridor,
    Door,
    Room(Color),
}

fn under_glyph(c: char) -> Option<Under> {
    match c {
        '.' => Some(Under::Corridor),
        'd' => Some(Under::Door),
        _ => Color::from_glyph(c).map(Under::Room),
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> WorldError {
    WorldError::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_map(text: &str) -> Result<GridMap, WorldError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut end = lines.len();
    while end > 0 && lines[end - 1].trim().is_empty() {
        end -= 1;
    }
    if end < 2 {
        return Err(err(1, 1, "map needs grid rows and a metadata line"));
    }
    let meta_line = end;
    let meta = lines[end - 1];
    let rows = &lines[..end - 1];

    let (under_agent, under_block) = parse_metadata(meta, meta_line)?;

    let width = rows[0].chars().count();
    if width == 0 {
        return Err(err(1, 1, "empty grid row"));
    }
    let height = rows.len();
    let mut cells = Vec::with_capacity(width * height);
    let mut color_of: Vec<Option<Color>> = Vec::with_capacity(width * height);
    let mut agent: Option<Pos> = None;
    let mut block: Option<Pos> = None;

    for (r, row) in rows.iter().enumerate() {
        let len = row.chars().count();
        if len != width {
            return Err(err(
                r + 1,
                len.min(width) + 1,
                format!("row has {len} cells, expected {width}"),
            ));
        }
        for (c, glyph) in row.chars().enumerate() {
            let pos = Pos::new(r, c);
            let under = match glyph {
                '#' => None,
                'A' => {
                    if agent.replace(pos).is_some() {
                        return Err(err(r + 1, c + 1, "second agent glyph"));
                    }
                    Some(under_agent)
                }
                'B' => {
                    if block.replace(pos).is_some() {
                        return Err(err(r + 1, c + 1, "second block glyph"));
                    }
                    Some(under_block)
                }
                g => match under_glyph(g) {
                    Some(u) => Some(u),
                    None => return Err(err(r + 1, c + 1, format!("unknown glyph {g:?}"))),
                },
            };
            let on_border = r == 0 || c == 0 || r + 1 == height || c + 1 == width;
            if on_border && under.is_some() {
                return Err(err(r + 1, c + 1, "border cells must be walls"));
            }
            let (kind, color) = match under {
                None => (CellKind::Wall, None),
                Some(Under::Corridor) => (CellKind::Floor, None),
                Some(Under::Door) => (CellKind::Door, None),
                Some(Under::Room(col)) => (CellKind::Floor, Some(col)),
            };
            cells.push(kind);
            color_of.push(color);
        }
    }

    let agent = agent.ok_or_else(|| err(meta_line, 1, "map has no agent glyph 'A'"))?;
    let block = block.ok_or_else(|| err(meta_line, 1, "map has no block glyph 'B'"))?;

    let (rooms, room_of) = label_rooms(width, height, &color_of)?;
    if rooms.len() < 2 {
        return Err(err(meta_line, 1, "map needs at least two rooms"));
    }

    let mut free = Vec::new();
    let mut free_index = vec![None; width * height];
    for (i, kind) in cells.iter().enumerate() {
        if kind.is_free() {
            free_index[i] = Some(free.len());
            free.push(Pos::new(i / width, i % width));
        }
    }

    Ok(GridMap {
        width,
        height,
        cells,
        room_of,
        rooms,
        start: WorldState::new(agent, block),
        free,
        free_index,
    })
}

fn parse_metadata(meta: &str, line: usize) -> Result<(Under, Under), WorldError> {
    let mut agent = None;
    let mut block = None;
    for token in meta.split_whitespace() {
        let column = meta.find(token).map_or(1, |i| i + 1);
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err(line, column, format!("expected KEY=GLYPH, got {token:?}")))?;
        let mut chars = value.chars();
        let under = match (chars.next(), chars.next()) {
            (Some(g), None) => under_glyph(g),
            _ => None,
        }
        .ok_or_else(|| err(line, column, format!("invalid underlying glyph {value:?}")))?;
        match key {
            "A" => agent = Some(under),
            "B" => block = Some(under),
            _ => return Err(err(line, column, format!("unknown metadata key {key:?}"))),
        }
    }
    match (agent, block) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(err(line, 1, "metadata line must give A=<glyph> and B=<glyph>")),
    }
}

type RoomLabels = (Vec<Room>, Vec<Option<usize>>);

fn label_rooms(width: usize, height: usize, color_of: &[Option<Color>]) -> Result<RoomLabels, WorldError> {
    let mut room_of: Vec<Option<usize>> = vec![None; width * height];
    let mut rooms: Vec<Room> = Vec::new();
    for start in 0..width * height {
        let Some(color) = color_of[start] else { continue };
        if room_of[start].is_some() {
            continue;
        }
        let id = RoomId(rooms.len());
        let mut cells = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        room_of[start] = Some(id.0);
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / width, i % width);
            cells.insert(Pos::new(r, c));
            let neighbours = [
                (r > 0).then(|| i - width),
                (r + 1 < height).then(|| i + width),
                (c > 0).then(|| i - 1),
                (c + 1 < width).then(|| i + 1),
            ];
            for j in neighbours.into_iter().flatten() {
                if room_of[j].is_none() && color_of[j] == Some(color) {
                    room_of[j] = Some(id.0);
                    queue.push_back(j);
                }
            }
        }
        if let Some(prev) = rooms.iter().find(|room| room.color == color) {
            return Err(WorldError::DuplicateColor {
                color,
                first: prev.id,
                second: id,
            });
        }
        rooms.push(Room { id, color, cells });
    }
    Ok((rooms, room_of))
}

fn glyph_under(map: &GridMap, p: Pos) -> char {
    match map.kind(p) {
        CellKind::Wall => '#',
        CellKind::Door => 'd',
        CellKind::Floor => map.room_at(p).map_or('.', |room| room.color.glyph()),
    }
}

/// Inverse of [`parse_map`].
pub fn render_map(map: &GridMap) -> String {
    let start = map.start();
    let mut out = String::with_capacity((map.width() + 1) * (map.height() + 1));
    for r in 0..map.height() {
        for c in 0..map.width() {
            let p = Pos::new(r, c);
            let glyph = if p == start.agent {
                'A'
            } else if p == start.block {
                'B'
            } else {
                glyph_under(map, p)
            };
            out.push(glyph);
        }
        out.push('\n');
    }
    out.push_str(&format!(
        "A={} B={}\n",
        glyph_under(map, start.agent),
        glyph_under(map, start.block)
    ));
    out
}
