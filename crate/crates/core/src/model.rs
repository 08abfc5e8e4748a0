//! MAPF world model: 4-connected grid maps, agents and shortest-path helpers,
//! plus readers for the MovingAI `.map` / `.scen` benchmark formats.
//!
//! Coordinates follow the benchmark convention: `x` is the column, `y` the
//! row, both zero-based.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while reading benchmark files or building instances.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("map has no passable cells")]
    EmptyMap,

    #[error("at least one agent required")]
    NoAgents,

    #[error("scenario has {available} rows, {requested} requested")]
    NotEnoughAgents { requested: usize, available: usize },

    #[error("agent {agent}: {cell} is out of bounds or blocked")]
    InvalidCell { agent: usize, cell: Cell },

    #[error("agents {first} and {second} share a {which} cell {cell}")]
    DuplicateEndpoint {
        first: usize,
        second: usize,
        which: &'static str,
        cell: Cell,
    },

    #[error("map is disconnected")]
    Disconnected,
}

fn parse_err(line: usize, reason: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        reason: reason.into(),
    }
}

/// A grid cell, `(x, y)` = (column, row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    /// True when `other` is one 4-connected move away.
    pub fn is_adjacent(self, other: Cell) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }
}

/// Row-major order, matching [`GridMap::index`].
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A rectangular 4-connected grid with blocked cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    passable: Vec<bool>,
    passable_count: usize,
}

impl GridMap {
    /// Builds a map from a row-major passability mask.
    pub fn from_mask(width: usize, height: usize, passable: Vec<bool>) -> Result<Self, ModelError> {
        if width == 0 || height == 0 || passable.len() != width * height {
            return Err(parse_err(0, "mask does not match the stated dimensions"));
        }
        let passable_count = passable.iter().filter(|&&p| p).count();
        if passable_count == 0 {
            return Err(ModelError::EmptyMap);
        }
        Ok(GridMap {
            width,
            height,
            passable,
            passable_count,
        })
    }

    /// An obstacle-free `width x height` grid.
    pub fn open(width: usize, height: usize) -> Self {
        GridMap::from_mask(width, height, vec![true; width * height])
            .expect("open grid with positive dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of passable cells, the `n` of every bound.
    pub fn vertex_count(&self) -> usize {
        self.passable_count
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    pub fn is_passable(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.passable[self.index(cell)]
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn passable_mask(&self) -> &[bool] {
        &self.passable
    }

    /// All passable cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.passable.len())
            .filter(|&i| self.passable[i])
            .map(|i| self.cell_at(i))
    }

    /// Passable 4-neighbours of `cell`, in the fixed order up, left, right, down.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let Cell { x, y } = cell;
        let candidates = [
            (y > 0).then(|| Cell::new(x, y - 1)),
            (x > 0).then(|| Cell::new(x - 1, y)),
            Some(Cell::new(x + 1, y)),
            Some(Cell::new(x, y + 1)),
        ];
        candidates
            .into_iter()
            .flatten()
            .filter(move |&c| self.is_passable(c))
    }

    /// Serializes to the `.map` format, using `.` and `@`.
    pub fn to_map_text(&self) -> String {
        let mut out = format!(
            "type octile\nheight {}\nwidth {}\nmap\n",
            self.height, self.width
        );
        for row in self.passable.chunks(self.width) {
            out.extend(row.iter().map(|&p| if p { '.' } else { '@' }));
            out.push('\n');
        }
        out
    }
}

/// Reads a MovingAI `.map` file.
pub fn parse_map(text: &str) -> Result<GridMap, ModelError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header.split_whitespace().next() != Some("type") {
        return Err(parse_err(line, "expected `type <name>` header"));
    }

    let mut width = None;
    let mut height = None;
    loop {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(line + 1, "missing `map` line"))?;
        let mut parts = l.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some("map"), None, _) => break,
            (Some(key @ ("height" | "width")), Some(value), None) => {
                let v: usize = value
                    .parse()
                    .map_err(|_| parse_err(line, format!("invalid {key} `{value}`")))?;
                if v == 0 {
                    return Err(parse_err(line, format!("{key} must be positive")));
                }
                if key == "height" {
                    height = Some(v);
                } else {
                    width = Some(v);
                }
            }
            _ => return Err(parse_err(line, format!("malformed header line `{l}`"))),
        }
    }
    let width = width.ok_or_else(|| parse_err(1, "missing width"))?;
    let height = height.ok_or_else(|| parse_err(1, "missing height"))?;

    let mut passable = Vec::with_capacity(width * height);
    let mut last_line = 0;
    for row in 0..height {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(last_line + 1, format!("expected {height} rows, found {row}")))?;
        last_line = line;
        let row_len = l.chars().count();
        if row_len != width {
            return Err(parse_err(line, format!("row has {row_len} symbols, expected {width}")));
        }
        for ch in l.chars() {
            passable.push(match ch {
                '.' | 'G' => true,
                '@' | 'O' | 'T' | 'W' => false,
                other => return Err(parse_err(line, format!("unknown symbol `{other}`"))),
            });
        }
    }
    if let Some((line, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(line, format!("unexpected trailing content `{l}`")));
    }
    GridMap::from_mask(width, height, passable)
}

/// One row of a `.scen` file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map_name: String,
    pub map_width: usize,
    pub map_height: usize,
    pub start: Cell,
    pub goal: Cell,
    /// Reference path length as written in the file (octile for classic sets).
    pub optimal_length: f64,
}

/// Reads every agent row of a `.scen` file.
pub fn parse_scen_entries(text: &str) -> Result<Vec<ScenarioEntry>, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["version", "1" | "1.0"] => {}
        ["version", other] => return Err(parse_err(line, format!("unsupported version `{other}`"))),
        _ => return Err(parse_err(line, "expected `version 1` header")),
    }

    let mut entries = Vec::new();
    for (line, l) in lines {
        let mut fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 9 {
            fields = l.split_whitespace().collect();
        }
        if fields.len() != 9 {
            return Err(parse_err(line, format!("expected 9 fields, found {}", fields.len())));
        }
        let int = |i: usize, what: &str| -> Result<usize, ModelError> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("invalid {what} `{}`", fields[i])))
        };
        entries.push(ScenarioEntry {
            bucket: int(0, "bucket")? as u32,
            map_name: fields[1].trim().to_string(),
            map_width: int(2, "map width")?,
            map_height: int(3, "map height")?,
            start: Cell::new(int(4, "start x")?, int(5, "start y")?),
            goal: Cell::new(int(6, "goal x")?, int(7, "goal y")?),
            optimal_length: fields[8]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("invalid optimal length `{}`", fields[8])))?,
        });
    }
    Ok(entries)
}

/// Reads the first `count` agents of a `.scen` file against `map`.
pub fn parse_scen(text: &str, count: usize, map: &GridMap) -> Result<Instance, ModelError> {
    if count == 0 {
        return Err(ModelError::NoAgents);
    }
    let entries = parse_scen_entries(text)?;
    if entries.len() < count {
        return Err(ModelError::NotEnoughAgents {
            requested: count,
            available: entries.len(),
        });
    }
    let agents = entries[..count].iter().map(|e| (e.start, e.goal)).collect();
    Instance::new(map.clone(), agents)
}

/// A MAPF instance: a map and an ordered list of (start, goal) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    map: GridMap,
    agents: Vec<(Cell, Cell)>,
}

impl Instance {
    pub fn new(map: GridMap, agents: Vec<(Cell, Cell)>) -> Result<Self, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        for (agent, &(start, goal)) in agents.iter().enumerate() {
            for cell in [start, goal] {
                if !map.is_passable(cell) {
                    return Err(ModelError::InvalidCell { agent, cell });
                }
            }
        }
        for (i, a) in agents.iter().enumerate() {
            for (j, b) in agents.iter().enumerate().skip(i + 1) {
                let clash = if a.0 == b.0 {
                    Some(("start", a.0))
                } else if a.1 == b.1 {
                    Some(("goal", a.1))
                } else {
                    None
                };
                if let Some((which, cell)) = clash {
                    return Err(ModelError::DuplicateEndpoint {
                        first: i,
                        second: j,
                        which,
                        cell,
                    });
                }
            }
        }
        Ok(Instance { map, agents })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn agents(&self) -> &[(Cell, Cell)] {
        &self.agents
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn start(&self, agent: usize) -> Cell {
        self.agents[agent].0
    }

    pub fn goal(&self, agent: usize) -> Cell {
        self.agents[agent].1
    }

    pub fn summary(&self, cost: usize) -> InstanceSummary {
        InstanceSummary {
            n: self.map.vertex_count(),
            k: self.agents.len(),
            c: cost,
        }
    }
}

/// A timed single-agent path; index = timestep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    pub waypoints: Vec<Cell>,
}

impl Path {
    pub fn new(waypoints: Vec<Cell>) -> Self {
        Path { waypoints }
    }

    /// Termination time: the index of the last waypoint.
    pub fn cost(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }

    /// Position at time `t`; after the last waypoint the agent rests there.
    pub fn at(&self, t: usize) -> Cell {
        *self
            .waypoints
            .get(t)
            .or_else(|| self.waypoints.last())
            .expect("path has at least one waypoint")
    }

    /// Consecutive waypoints are equal (wait) or 4-adjacent (move).
    pub fn is_well_formed(&self) -> bool {
        !self.waypoints.is_empty()
            && self
                .waypoints
                .windows(2)
                .all(|w| w[0] == w[1] || w[0].is_adjacent(w[1]))
    }
}

/// The `(n, k, C)` triple that feeds every bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "C")]
    pub c: usize,
}

impl InstanceSummary {
    /// One `name,n,k,C` CSV row, without newline.
    pub fn csv_row(&self, name: &str) -> String {
        format!("{name},{},{},{}", self.n, self.k, self.c)
    }
}

/// BFS distances from `from` to every cell (row-major, `None` = unreachable).
pub fn distance_map(map: &GridMap, from: Cell) -> Vec<Option<usize>> {
    let mut dist = vec![None; map.width() * map.height()];
    if !map.is_passable(from) {
        return dist;
    }
    let mut queue = VecDeque::new();
    dist[map.index(from)] = Some(0);
    queue.push_back(from);
    while let Some(cell) = queue.pop_front() {
        let d = dist[map.index(cell)].expect("queued cells have distances");
        for next in map.neighbors(cell) {
            let slot = &mut dist[map.index(next)];
            if slot.is_none() {
                *slot = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Unweighted shortest-path length, or `None` when `to` is unreachable.
pub fn bfs_distance(map: &GridMap, from: Cell, to: Cell) -> Option<usize> {
    if !map.is_passable(to) {
        return None;
    }
    distance_map(map, from)[map.index(to)]
}

/// Minimum eccentricity over passable cells and the first cell (row-major)
/// attaining it.
pub fn radius(map: &GridMap) -> Result<(usize, Cell), ModelError> {
    let mut best: Option<(usize, Cell)> = None;
    for cell in map.cells() {
        let mut ecc = 0;
        for d in distance_map(map, cell).iter().zip(map.passable_mask()) {
            match d {
                (Some(d), true) => ecc = ecc.max(*d),
                (None, true) => return Err(ModelError::Disconnected),
                _ => {}
            }
        }
        if best.is_none_or(|(r, _)| ecc < r) {
            best = Some((ecc, cell));
        }
    }
    best.ok_or(ModelError::EmptyMap)
}
