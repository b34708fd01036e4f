use crate::fmm::{propagate_cached, FmmError};
use crate::geom::{Path, Point};
use crate::world::GridMap;

/// Route to the best meeting point on another agent's path.
#[derive(Debug, Clone, PartialEq)]
pub struct Interception {
    pub path: Path,
    /// Index of the chosen waypoint of the target path, `None` when no
    /// waypoint could be reached.
    pub waypoint: Option<usize>,
}

impl Interception {
    pub fn reachable(&self) -> bool {
        self.waypoint.is_some()
    }
}

/// Path from `x` to the waypoint of `target_path` with the lowest geodesic
/// cost from `x` (earliest waypoint on ties), using a single propagation from
/// `x`. When no waypoint is reachable the path leads to the reachable cell
/// nearest the final waypoint instead.
pub fn intercept(target_path: &[Point], x: Point, map: &GridMap) -> Result<Interception, FmmError> {
    let field = propagate_cached(map, x)?;
    let best = target_path
        .iter()
        .enumerate()
        .map(|(k, &p)| (k, field.value_at(p)))
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    if let Some((k, _)) = best {
        let mut path = field.extract_path(target_path[k])?;
        path.reverse();
        return Ok(Interception {
            path,
            waypoint: Some(k),
        });
    }
    let Some(&last) = target_path.last() else {
        return Ok(Interception {
            path: vec![x],
            waypoint: None,
        });
    };
    let mut nearest: Option<(f64, usize)> = None;
    for (i, v) in field.values().iter().enumerate() {
        if v.is_finite() {
            let d = map.center(map.cell_at(i)).dist(last);
            if nearest.is_none_or(|(bd, _)| d < bd) {
                nearest = Some((d, i));
            }
        }
    }
    let (_, i) = nearest.expect("the source cell is always reachable");
    let mut path = field.extract_path(map.center(map.cell_at(i)))?;
    path.reverse();
    Ok(Interception {
        path,
        waypoint: None,
    })
}
