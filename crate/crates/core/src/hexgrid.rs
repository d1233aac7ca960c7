//! Axial hex coordinates and the finite world map.
//!
//! The map is stored as an odd-r offset rectangle (odd rows shifted half a
//! tile to the right) and addressed through axial coordinates. Anything
//! outside the rectangle is treated as inaccessible.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axial hex coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

/// Neighbor offsets in axial space.
pub const DIRECTIONS: [HexCoord; 6] = [
    HexCoord { q: 1, r: 0 },
    HexCoord { q: 1, r: -1 },
    HexCoord { q: 0, r: -1 },
    HexCoord { q: -1, r: 0 },
    HexCoord { q: -1, r: 1 },
    HexCoord { q: 0, r: 1 },
];

impl HexCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    /// Axial coordinate of an odd-r offset (column, row) position.
    pub fn from_offset(col: i32, row: i32) -> Self {
        Self::new(col - (row - (row & 1)) / 2, row)
    }

    pub fn to_offset(self) -> (i32, i32) {
        (self.q + (self.r - (self.r & 1)) / 2, self.r)
    }

    pub fn distance(self, other: HexCoord) -> u32 {
        distance(self, other)
    }

    pub fn neighbors(self) -> [HexCoord; 6] {
        DIRECTIONS.map(|d| HexCoord::new(self.q + d.q, self.r + d.r))
    }
}

impl fmt::Display for HexCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

/// Hex grid distance: max(|dq|, |dr|, |dq + dr|).
pub fn distance(a: HexCoord, b: HexCoord) -> u32 {
    let dq = a.q - b.q;
    let dr = a.r - b.r;
    dq.abs().max(dr.abs()).max((dq + dr).abs()) as u32
}

/// Every coordinate within `radius` of `center`, ignoring map bounds, in
/// lexicographic (q, r) order.
pub fn disc(center: HexCoord, radius: u32) -> impl Iterator<Item = HexCoord> {
    let r = radius as i32;
    (-r..=r).flat_map(move |dq| {
        let lo = (-r).max(-dq - r);
        let hi = r.min(-dq + r);
        (lo..=hi).map(move |dr| HexCoord::new(center.q + dq, center.r + dr))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileKind {
    Grassland,
    Mountain,
    Forest,
    Ocean,
}

impl TileKind {
    pub fn is_accessible(self) -> bool {
        matches!(self, TileKind::Grassland)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Spawn1,
    Contested,
    Spawn2,
    None,
}

/// Tile lookups used by [`find_path`] to restrict the search to what an
/// agent has already discovered.
pub trait KnownTiles {
    fn knows(&self, c: HexCoord) -> bool;
}

impl KnownTiles for HashSet<HexCoord> {
    fn knows(&self, c: HexCoord) -> bool {
        self.contains(&c)
    }
}

impl KnownTiles for BTreeSet<HexCoord> {
    fn knows(&self, c: HexCoord) -> bool {
        self.contains(&c)
    }
}

/// Marker for "every tile is known".
pub struct Omniscient;

impl KnownTiles for Omniscient {
    fn knows(&self, _c: HexCoord) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no path through known accessible tiles")]
pub struct NoPath;

/// Static terrain plus region labels and food spawn points.
///
/// Food counts live in the world, not here; the map is immutable once loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    width: i32,
    height: i32,
    kinds: Vec<TileKind>,
    regions: Vec<Region>,
    food_spawn_points: Vec<HexCoord>,
}

impl WorldMap {
    /// Builds a map from per-tile data in row-major offset order.
    pub fn from_tiles(
        width: i32,
        height: i32,
        kinds: Vec<TileKind>,
        regions: Vec<Region>,
        food_spawn_points: Vec<HexCoord>,
    ) -> Result<Self> {
        let n = (width.max(0) * height.max(0)) as usize;
        if width <= 0 || height <= 0 {
            return Err(Error::Map("map must have positive dimensions".into()));
        }
        if kinds.len() != n || regions.len() != n {
            return Err(Error::Map("tile data does not match map dimensions".into()));
        }
        let mut map = Self {
            width,
            height,
            kinds,
            regions,
            food_spawn_points: Vec::new(),
        };
        let mut spawns = food_spawn_points;
        spawns.sort();
        spawns.dedup();
        for &p in &spawns {
            if !map.is_accessible(p) {
                return Err(Error::Map(format!("food spawn point {p} is not grassland")));
            }
        }
        map.food_spawn_points = spawns;
        Ok(map)
    }

    /// An all-grassland map without regions or food; handy for tests.
    pub fn open(width: i32, height: i32) -> Self {
        let n = (width * height) as usize;
        Self {
            width,
            height,
            kinds: vec![TileKind::Grassland; n],
            regions: vec![Region::None; n],
            food_spawn_points: Vec::new(),
        }
    }

    /// The map shipped with the crate.
    pub fn default_map() -> Self {
        Self::parse(include_str!("../data/maps/default.map")).expect("embedded map is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Map(format!("cannot read map {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses the plain-text map format.
    ///
    /// One line per offset row, one character per tile. Lines starting with
    /// `#` and blank lines are ignored. Legend:
    ///
    /// | char | terrain   | region    | food spawn |
    /// |------|-----------|-----------|------------|
    /// | `1`  | grassland | spawn 1   | no         |
    /// | `2`  | grassland | spawn 2   | no         |
    /// | `c`  | grassland | contested | no         |
    /// | `*`  | grassland | contested | yes        |
    /// | `.`  | grassland | none      | no         |
    /// | `+`  | grassland | none      | yes        |
    /// | `M`  | mountain  | none      | no         |
    /// | `F`  | forest    | none      | no         |
    /// | `~`  | ocean     | none      | no         |
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if rows.is_empty() {
            return Err(Error::Map("map has no rows".into()));
        }
        let width = rows[0].chars().count() as i32;
        let height = rows.len() as i32;
        let mut kinds = Vec::with_capacity((width * height) as usize);
        let mut regions = Vec::with_capacity(kinds.capacity());
        let mut food = Vec::new();
        for (row, line) in rows.iter().enumerate() {
            if line.chars().count() as i32 != width {
                return Err(Error::Map(format!(
                    "row {row} has {} tiles, expected {width}",
                    line.chars().count()
                )));
            }
            for (col, ch) in line.chars().enumerate() {
                let (kind, region, spawn) = match ch {
                    '1' => (TileKind::Grassland, Region::Spawn1, false),
                    '2' => (TileKind::Grassland, Region::Spawn2, false),
                    'c' => (TileKind::Grassland, Region::Contested, false),
                    '*' => (TileKind::Grassland, Region::Contested, true),
                    '.' => (TileKind::Grassland, Region::None, false),
                    '+' => (TileKind::Grassland, Region::None, true),
                    'M' => (TileKind::Mountain, Region::None, false),
                    'F' => (TileKind::Forest, Region::None, false),
                    '~' => (TileKind::Ocean, Region::None, false),
                    other => {
                        return Err(Error::Map(format!(
                            "unknown tile '{other}' at row {row}, column {col}"
                        )))
                    }
                };
                kinds.push(kind);
                regions.push(region);
                if spawn {
                    food.push(HexCoord::from_offset(col as i32, row as i32));
                }
            }
        }
        Self::from_tiles(width, height, kinds, regions, food)
    }

    /// Renders the map back into the text format (without comments).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in 0..self.height {
            for col in 0..self.width {
                let c = HexCoord::from_offset(col, row);
                let i = self.index(c).expect("in bounds");
                let spawn = self.food_spawn_points.binary_search(&c).is_ok();
                let ch = match (self.kinds[i], self.regions[i], spawn) {
                    (TileKind::Mountain, _, _) => 'M',
                    (TileKind::Forest, _, _) => 'F',
                    (TileKind::Ocean, _, _) => '~',
                    (TileKind::Grassland, Region::Spawn1, _) => '1',
                    (TileKind::Grassland, Region::Spawn2, _) => '2',
                    (TileKind::Grassland, Region::Contested, true) => '*',
                    (TileKind::Grassland, Region::Contested, false) => 'c',
                    (TileKind::Grassland, Region::None, true) => '+',
                    (TileKind::Grassland, Region::None, false) => '.',
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    /// Number of tiles in the bounding rectangle.
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Dense index of an in-bounds coordinate.
    pub fn index(&self, c: HexCoord) -> Option<usize> {
        let (col, row) = c.to_offset();
        if col < 0 || row < 0 || col >= self.width || row >= self.height {
            None
        } else {
            Some((row * self.width + col) as usize)
        }
    }

    pub fn coord(&self, index: usize) -> HexCoord {
        let i = index as i32;
        HexCoord::from_offset(i % self.width, i / self.width)
    }

    pub fn contains(&self, c: HexCoord) -> bool {
        self.index(c).is_some()
    }

    pub fn kind(&self, c: HexCoord) -> Option<TileKind> {
        self.index(c).map(|i| self.kinds[i])
    }

    pub fn region(&self, c: HexCoord) -> Region {
        self.index(c).map_or(Region::None, |i| self.regions[i])
    }

    /// In bounds and walkable.
    pub fn is_accessible(&self, c: HexCoord) -> bool {
        self.index(c).is_some_and(|i| self.kinds[i].is_accessible())
    }

    pub fn food_spawn_points(&self) -> &[HexCoord] {
        &self.food_spawn_points
    }

    /// All coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = HexCoord> + '_ {
        (0..self.len()).map(|i| self.coord(i))
    }

    /// Accessible tiles of a region, sorted by (q, r).
    pub fn region_tiles(&self, region: Region) -> Vec<HexCoord> {
        let mut tiles: Vec<HexCoord> = self
            .coords()
            .filter(|&c| self.region(c) == region && self.is_accessible(c))
            .collect();
        tiles.sort();
        tiles
    }

    /// `{t : distance(center, t) <= radius}` intersected with the map, in
    /// (q, r) order.
    pub fn tiles_within(&self, center: HexCoord, radius: u32) -> Vec<HexCoord> {
        disc(center, radius).filter(|&c| self.contains(c)).collect()
    }
}

/// Shortest path from `start` to `goal` over accessible tiles in `known`.
///
/// Uniform-cost BFS; neighbors are expanded in (q, r) order so ties between
/// equal-length paths resolve lexicographically. The returned path includes
/// both endpoints.
pub fn find_path<K: KnownTiles + ?Sized>(
    map: &WorldMap,
    known: &K,
    start: HexCoord,
    goal: HexCoord,
) -> std::result::Result<Vec<HexCoord>, NoPath> {
    if start == goal {
        return Ok(vec![start]);
    }
    let passable = |c: HexCoord| map.is_accessible(c) && known.knows(c);
    let (Some(start_i), Some(goal_i)) = (map.index(start), map.index(goal)) else {
        return Err(NoPath);
    };
    if !passable(goal) {
        return Err(NoPath);
    }
    let mut prev = vec![usize::MAX; map.len()];
    prev[start_i] = start_i;
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        let mut next = cur.neighbors();
        next.sort();
        for n in next {
            let Some(ni) = map.index(n) else { continue };
            if prev[ni] != usize::MAX || !passable(n) {
                continue;
            }
            prev[ni] = map.index(cur).expect("visited tiles are in bounds");
            if ni == goal_i {
                let mut path = vec![goal];
                let mut i = ni;
                while i != start_i {
                    i = prev[i];
                    path.push(map.coord(i));
                }
                path.reverse();
                return Ok(path);
            }
            queue.push_back(n);
        }
    }
    Err(NoPath)
}
