use super::{ScenarioChange, WorldError};
use crate::geom::{Cell, Point};
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

/// Axis-aligned rectangle of cells, both corners inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Region {
    /// Builds a region from two corners given in any order.
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Region {
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.x0..=self.x1).contains(&c.x) && (self.y0..=self.y1).contains(&c.y)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| Cell::new(x, y)))
    }

    pub fn area(&self) -> usize {
        (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Door {
    pub id: String,
    pub region: Region,
    pub open: bool,
}

/// Occupancy grid. Cell `(x, y)` is centred on `(x * res, y * res)` meters and
/// covers half a cell on either side.
///
/// For the ground-truth map the occupancy array is always derivable from the
/// static walls, the closed doors and the added obstacles. Believed maps are
/// edited cell by cell through [`GridMap::set_occupied`] and only promise the
/// occupancy array itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    resolution: f64,
    walls: Vec<bool>,
    cells: Vec<bool>,
    doors: Vec<Door>,
    obstacles: Vec<Region>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, resolution: f64) -> Self {
        assert!(width > 0 && height > 0, "empty grid");
        assert!(resolution > 0.0, "non-positive resolution");
        GridMap {
            width,
            height,
            resolution,
            walls: vec![false; width * height],
            cells: vec![false; width * height],
            doors: Vec::new(),
            obstacles: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn idx(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    #[inline]
    pub fn cell_at(&self, idx: usize) -> Cell {
        Cell::new(idx % self.width, idx / self.width)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Cell containing `p`, or `None` when `p` lies outside the grid.
    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let gx = (p.x / self.resolution + 0.5).floor();
        let gy = (p.y / self.resolution + 0.5).floor();
        if !(gx >= 0.0 && gy >= 0.0) || gx >= self.width as f64 || gy >= self.height as f64 {
            return None;
        }
        Some(Cell::new(gx as usize, gy as usize))
    }

    pub fn center(&self, c: Cell) -> Point {
        Point::new(c.x as f64 * self.resolution, c.y as f64 * self.resolution)
    }

    /// Snaps a point to the centre of its cell.
    pub fn snap(&self, p: Point) -> Option<Point> {
        self.cell_of(p).map(|c| self.center(c))
    }

    #[inline]
    pub fn is_occupied(&self, c: Cell) -> bool {
        self.cells[self.idx(c)]
    }

    #[inline]
    pub fn occupied_idx(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.is_occupied(c)
    }

    /// True when `p` is inside the grid and its cell is free.
    pub fn is_free_point(&self, p: Point) -> bool {
        self.cell_of(p).is_some_and(|c| self.is_free(c))
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn doors(&self) -> &[Door] {
        &self.doors
    }

    pub fn door(&self, id: &str) -> Option<&Door> {
        self.doors.iter().find(|d| d.id == id)
    }

    pub fn obstacles(&self) -> &[Region] {
        &self.obstacles
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls[self.idx(c)]
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cells.len())
            .filter(|&i| !self.cells[i])
            .map(|i| self.cell_at(i))
    }

    fn check_region(&self, r: &Region) -> Result<(), WorldError> {
        if r.x1 >= self.width || r.y1 >= self.height {
            return Err(WorldError::RegionOutOfBounds(*r));
        }
        Ok(())
    }

    pub fn set_wall(&mut self, c: Cell, wall: bool) {
        let i = self.idx(c);
        self.walls[i] = wall;
        self.cells[i] = self.derived(c);
    }

    pub fn fill_walls(&mut self, r: Region) -> Result<(), WorldError> {
        self.check_region(&r)?;
        for c in r.cells() {
            self.set_wall(c, true);
        }
        Ok(())
    }

    /// Declares a door. Static walls under the door region are carved out so
    /// the door state alone decides occupancy there.
    pub fn add_door(&mut self, id: &str, region: Region, open: bool) -> Result<(), WorldError> {
        self.check_region(&region)?;
        if self.door(id).is_some() {
            return Err(WorldError::DuplicateDoor(id.to_string()));
        }
        for c in region.cells() {
            let i = self.idx(c);
            self.walls[i] = false;
        }
        self.doors.push(Door {
            id: id.to_string(),
            region,
            open,
        });
        self.recompute_region(region);
        Ok(())
    }

    /// Raw occupancy write used for believed maps.
    pub fn set_occupied(&mut self, c: Cell, occupied: bool) {
        let i = self.idx(c);
        self.cells[i] = occupied;
    }

    pub(crate) fn set_occupied_idx(&mut self, i: usize, occupied: bool) {
        self.cells[i] = occupied;
    }

    fn derived(&self, c: Cell) -> bool {
        self.walls[self.idx(c)]
            || self.doors.iter().any(|d| !d.open && d.region.contains(c))
            || self.obstacles.iter().any(|o| o.contains(c))
    }

    fn recompute_region(&mut self, r: Region) {
        for c in r.cells() {
            let v = self.derived(c);
            let i = self.idx(c);
            self.cells[i] = v;
        }
    }

    /// Rebuilds the occupancy array from walls, doors and obstacles.
    pub fn recompute_occupancy(&mut self) {
        for i in 0..self.cells.len() {
            let c = self.cell_at(i);
            self.cells[i] = self.derived(c);
        }
    }

    /// Whether the stored occupancy equals the one derived from walls, doors
    /// and obstacles.
    pub fn occupancy_consistent(&self) -> bool {
        (0..self.cells.len()).all(|i| self.cells[i] == self.derived(self.cell_at(i)))
    }

    /// Returns a copy of the map with `change` applied.
    pub fn apply_change(&self, change: &ScenarioChange) -> Result<GridMap, WorldError> {
        let mut out = self.clone();
        out.apply_change_mut(change)?;
        Ok(out)
    }

    pub fn apply_change_mut(&mut self, change: &ScenarioChange) -> Result<(), WorldError> {
        use super::ChangeKind;
        match &change.kind {
            ChangeKind::DoorClose { door } | ChangeKind::DoorOpen { door } => {
                let open = matches!(change.kind, ChangeKind::DoorOpen { .. });
                let d = self
                    .doors
                    .iter_mut()
                    .find(|d| &d.id == door)
                    .ok_or_else(|| WorldError::UnknownDoor(door.clone()))?;
                if d.open == open {
                    return Ok(());
                }
                d.open = open;
                let r = d.region;
                self.recompute_region(r);
            }
            ChangeKind::ObstacleAdd { region } => {
                self.check_region(region)?;
                self.obstacles.push(*region);
                self.recompute_region(*region);
            }
        }
        Ok(())
    }

    /// Content hash of the occupancy array.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.width.hash(&mut h);
        self.height.hash(&mut h);
        self.resolution.to_bits().hash(&mut h);
        // pack eight cells per byte
        let mut byte = 0u8;
        for (i, &occ) in self.cells.iter().enumerate() {
            byte |= (occ as u8) << (i % 8);
            if i % 8 == 7 {
                h.write_u8(byte);
                byte = 0;
            }
        }
        h.write_u8(byte);
        h.finish()
    }

    /// Parses the text map format:
    ///
    /// ```text
    /// width height resolution
    /// <height rows of '.' and '#', top row first>
    /// door <id> <x0> <y0> <x1> <y1> <open|closed>
    /// ```
    pub fn parse(text: &str) -> Result<GridMap, WorldError> {
        let mut lines = text.lines().enumerate();
        let (hdr_no, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| WorldError::parse(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(WorldError::parse(
                hdr_no + 1,
                "header must be `width height resolution`",
            ));
        }
        let width: usize = fields[0]
            .parse()
            .map_err(|_| WorldError::parse(hdr_no + 1, "width"))?;
        let height: usize = fields[1]
            .parse()
            .map_err(|_| WorldError::parse(hdr_no + 1, "height"))?;
        let resolution: f64 = fields[2]
            .parse()
            .map_err(|_| WorldError::parse(hdr_no + 1, "resolution"))?;
        if width == 0 || height == 0 || !(resolution > 0.0) {
            return Err(WorldError::parse(hdr_no + 1, "dimensions must be positive"));
        }
        let mut map = GridMap::new(width, height, resolution);
        for row in 0..height {
            let (no, line) = lines
                .next()
                .ok_or_else(|| WorldError::parse(hdr_no + 2 + row, "missing grid row"))?;
            let line = line.trim_end();
            if line.chars().count() != width {
                return Err(WorldError::parse(
                    no + 1,
                    &format!("row has {} cells, expected {width}", line.chars().count()),
                ));
            }
            let y = height - 1 - row;
            for (x, ch) in line.chars().enumerate() {
                match ch {
                    '.' => {}
                    '#' => map.walls[y * width + x] = true,
                    other => {
                        return Err(WorldError::parse(no + 1, &format!("unexpected cell `{other}`")))
                    }
                }
            }
        }
        for (no, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f[0] != "door" || f.len() != 7 {
                return Err(WorldError::parse(
                    no + 1,
                    "expected `door <id> <x0> <y0> <x1> <y1> <open|closed>`",
                ));
            }
            let coord = |s: &str, name: &str| {
                s.parse::<usize>()
                    .map_err(|_| WorldError::parse(no + 1, &format!("door {name}")))
            };
            let region = Region::new(
                coord(f[2], "x0")?,
                coord(f[3], "y0")?,
                coord(f[4], "x1")?,
                coord(f[5], "y1")?,
            );
            let open = match f[6] {
                "open" => true,
                "closed" => false,
                _ => return Err(WorldError::parse(no + 1, "door state must be open or closed")),
            };
            map.add_door(f[1], region, open)
                .map_err(|e| WorldError::parse(no + 1, &e.to_string()))?;
        }
        map.recompute_occupancy();
        Ok(map)
    }

    /// Serializes walls and doors back into the text format. Runtime obstacles
    /// are not part of the format.
    pub fn to_map_string(&self) -> String {
        let mut s = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                s.push(if self.walls[y * self.width + x] { '#' } else { '.' });
            }
            s.push('\n');
        }
        for d in &self.doors {
            let _ = writeln!(
                s,
                "door {} {} {} {} {} {}",
                d.id,
                d.region.x0,
                d.region.y0,
                d.region.x1,
                d.region.y1,
                if d.open { "open" } else { "closed" }
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::ChangeKind;

    fn room() -> GridMap {
        let mut m = GridMap::new(10, 10, 1.0);
        m.fill_walls(Region::new(5, 0, 5, 9)).unwrap();
        m.add_door("d", Region::new(5, 4, 5, 5), false).unwrap();
        m
    }

    #[test]
    fn cell_of_rounds_to_nearest_centre() {
        let m = GridMap::new(10, 10, 1.0);
        assert_eq!(m.cell_of(Point::new(2.0, 2.0)), Some(Cell::new(2, 2)));
        assert_eq!(m.cell_of(Point::new(2.49, 1.51)), Some(Cell::new(2, 2)));
        assert_eq!(m.cell_of(Point::new(-0.5, 0.0)), Some(Cell::new(0, 0)));
        assert_eq!(m.cell_of(Point::new(-0.51, 0.0)), None);
        assert_eq!(m.cell_of(Point::new(9.5, 0.0)), None);
    }

    #[test]
    fn door_toggles() {
        let m = room();
        assert!(m.is_occupied(Cell::new(5, 4)));
        let open = m
            .apply_change(&ScenarioChange::new(0.0, ChangeKind::DoorOpen { door: "d".into() }))
            .unwrap();
        assert!(open.is_free(Cell::new(5, 4)));
        assert!(open.is_occupied(Cell::new(5, 3)));
        let again = open
            .apply_change(&ScenarioChange::new(0.0, ChangeKind::DoorOpen { door: "d".into() }))
            .unwrap();
        assert_eq!(open, again);
        let closed = open
            .apply_change(&ScenarioChange::new(0.0, ChangeKind::DoorClose { door: "d".into() }))
            .unwrap();
        assert_eq!(closed.cells(), m.cells());
        assert!(closed.occupancy_consistent());
    }

    #[test]
    fn unknown_door_is_an_error() {
        let err = room()
            .apply_change(&ScenarioChange::new(0.0, ChangeKind::DoorOpen { door: "x".into() }))
            .unwrap_err();
        assert!(matches!(err, WorldError::UnknownDoor(_)));
    }

    #[test]
    fn obstacle_marks_exactly_its_region() {
        let m = GridMap::new(10, 10, 1.0);
        let r = Region::new(2, 3, 4, 4);
        let out = m
            .apply_change(&ScenarioChange::new(0.0, ChangeKind::ObstacleAdd { region: r }))
            .unwrap();
        for i in 0..out.len() {
            let c = out.cell_at(i);
            assert_eq!(out.is_occupied(c), r.contains(c), "{c}");
        }
    }

    #[test]
    fn parse_round_trip() {
        let m = room();
        let text = m.to_map_string();
        let back = GridMap::parse(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parse_reports_line() {
        let err = GridMap::parse("3 2 1\n...\n.x.\n").unwrap_err();
        match err {
            WorldError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        let err = GridMap::parse("3 2 1\n...\n").unwrap_err();
        assert!(matches!(err, WorldError::Parse { line: 3, .. }));
    }

    #[test]
    fn top_row_is_highest_y() {
        let m = GridMap::parse("2 2 1\n#.\n..\n").unwrap();
        assert!(m.is_occupied(Cell::new(0, 1)));
        assert!(m.is_free(Cell::new(0, 0)));
    }
}
