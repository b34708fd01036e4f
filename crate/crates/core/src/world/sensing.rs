use super::los::cell_visible;
use super::GridMap;
use crate::geom::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Sensing radius in meters.
    pub v_range: f64,
    /// Whether walls hide what lies behind them.
    pub occlusion: bool,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            v_range: 30.0,
            occlusion: true,
        }
    }
}

/// Indices of every cell of `truth` sensed from `observer`: within `v_range`
/// of it (cell centre distance) and, with occlusion on, in sight.
pub fn visible_cells(truth: &GridMap, observer: Point, sensor: &SensorModel) -> Vec<usize> {
    let res = truth.resolution();
    let r_cells = (sensor.v_range / res).ceil() as isize + 1;
    let Some(oc) = truth.cell_of(observer) else {
        return Vec::new();
    };
    let r2 = sensor.v_range * sensor.v_range;
    let mut out = Vec::new();
    for dy in -r_cells..=r_cells {
        let y = oc.y as isize + dy;
        if y < 0 || y >= truth.height() as isize {
            continue;
        }
        for dx in -r_cells..=r_cells {
            let x = oc.x as isize + dx;
            if x < 0 || x >= truth.width() as isize {
                continue;
            }
            let c = crate::geom::Cell::new(x as usize, y as usize);
            let center = truth.center(c);
            let (ddx, ddy) = (center.x - observer.x, center.y - observer.y);
            if ddx * ddx + ddy * ddy > r2 {
                continue;
            }
            if sensor.occlusion && !cell_visible(truth, observer, c) {
                continue;
            }
            out.push(truth.idx(c));
        }
    }
    out
}

/// Copies every sensed cell of `truth` into a copy of `belief`. Returns the
/// updated map and whether any cell changed.
pub fn observe(
    truth: &GridMap,
    belief: &GridMap,
    observer: Point,
    sensor: &SensorModel,
) -> (GridMap, bool) {
    let mut out = belief.clone();
    let mut changed = false;
    for i in visible_cells(truth, observer, sensor) {
        let v = truth.occupied_idx(i);
        if out.occupied_idx(i) != v {
            out.set_occupied_idx(i, v);
            changed = true;
        }
    }
    (out, changed)
}

/// A believed map whose cells remember when they were last observed, so
/// beliefs from different groups can be merged cell by cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    pub map: GridMap,
    stamps: Vec<u32>,
}

impl Belief {
    /// Initial knowledge, stamped at tick 0.
    pub fn new(map: GridMap) -> Self {
        let n = map.len();
        Belief {
            map,
            stamps: vec![0; n],
        }
    }

    pub fn stamp(&self, i: usize) -> u32 {
        self.stamps[i]
    }

    /// Applies an observation of `cells` of `truth` made at `tick`.
    /// Returns whether any occupancy value changed.
    pub fn observe_cells(&mut self, truth: &GridMap, cells: &[usize], tick: u32) -> bool {
        let mut changed = false;
        for &i in cells {
            let v = truth.occupied_idx(i);
            if self.map.occupied_idx(i) != v {
                self.map.set_occupied_idx(i, v);
                changed = true;
            }
            if self.stamps[i] < tick {
                self.stamps[i] = tick;
            }
        }
        changed
    }

    /// Cell-wise most recent merge of `other` into `self`. On equal stamps
    /// with different values the occupied reading wins, which keeps the merge
    /// commutative. Returns whether any occupancy value changed.
    pub fn merge_from(&mut self, other: &Belief) -> bool {
        let mut changed = false;
        for i in 0..self.stamps.len() {
            let (sa, sb) = (self.stamps[i], other.stamps[i]);
            let (va, vb) = (self.map.occupied_idx(i), other.map.occupied_idx(i));
            let v = if sb > sa {
                vb
            } else if sa > sb {
                va
            } else {
                va || vb
            };
            if v != va {
                self.map.set_occupied_idx(i, v);
                changed = true;
            }
            self.stamps[i] = sa.max(sb);
        }
        changed
    }

    pub fn merged(a: &Belief, b: &Belief) -> Belief {
        let mut out = a.clone();
        out.merge_from(b);
        out
    }
}
