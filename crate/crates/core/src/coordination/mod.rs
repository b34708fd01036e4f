//! Planning inside one group of connected agents when the team is split:
//! each group plans the whole chain on its own map, predicts the plans of
//! the neighbouring groups from what it believes they know, and sends agents
//! to intercept chain neighbours that are heading to the wrong place.

mod intercept;
mod trapped;

pub use intercept::{intercept, Interception};
pub use trapped::{free_component, trapped_routine, TrappedTour};
pub(crate) use trapped::nearest_free;

use crate::chain::{plan_chain, ChainParams, Infeasibility, TeamPlan};
use crate::fmm::propagate_cached;
use crate::geom::{path_length, point_along, Path, Point};
use crate::world::{linked, Belief, DisjointSet, GridMap};
use serde::{Deserialize, Serialize};

/// Where an agent outside the group is believed to go: `path` started at
/// time `start` and is followed at the common speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub path: Path,
    pub start: f64,
}

impl Track {
    pub fn stationary(p: Point, start: f64) -> Self {
        Track {
            path: vec![p],
            start,
        }
    }

    pub fn position_at(&self, t: f64, speed: f64) -> Point {
        point_along(&self.path, speed * (t - self.start).max(0.0)).expect("tracks are nonempty")
    }

    /// The rest of the track from the position at `t`.
    pub fn remaining(&self, t: f64, speed: f64) -> Path {
        let mut left = speed * (t - self.start).max(0.0);
        let mut out = vec![self.position_at(t, speed)];
        for (k, w) in self.path.windows(2).enumerate() {
            let seg = w[0].dist(w[1]);
            if left < seg {
                out.extend_from_slice(&self.path[k + 1..]);
                break;
            }
            left -= seg;
        }
        out.dedup();
        out
    }

    pub fn end(&self) -> Point {
        *self.path.last().expect("tracks are nonempty")
    }

    /// When the track first reaches waypoint `p`, if it does.
    pub fn arrival(&self, p: Point, speed: f64) -> Option<f64> {
        let k = self.path.iter().position(|&q| q == p)?;
        Some(self.start + path_length(&self.path[..=k]) / speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Parent,
    Descendant,
    /// The group has no plan of its own and looks for others.
    Seek,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// Meet `target` on its predicted path.
    Intercept { target: usize, role: Role },
    /// Move next to a room that cannot be entered.
    Approach { targets: Vec<usize> },
    /// Walk the walls of that room; `targets` are lost if it stays sealed.
    Explore { targets: Vec<usize> },
    /// To the allocated chain goal.
    Own,
    /// To the relay an excluded agent waits at.
    Standby,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub path: Path,
}

/// Ordered segments for one agent; each starts where the previous ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentDirective {
    pub agent: usize,
    pub segments: Vec<Segment>,
}

impl AgentDirective {
    pub fn single(agent: usize, kind: SegmentKind, path: Path) -> Self {
        AgentDirective {
            agent,
            segments: vec![Segment { kind, path }],
        }
    }

    pub fn hold(agent: usize, at: Point) -> Self {
        Self::single(agent, SegmentKind::Hold, vec![at])
    }

    /// All segments joined into one path.
    pub fn concat(&self) -> Path {
        let mut out: Path = Vec::new();
        for s in &self.segments {
            let skip = usize::from(out.last().is_some() && out.last() == s.path.first());
            out.extend(s.path.iter().skip(skip));
        }
        out
    }

    pub fn intercepts(&self) -> impl Iterator<Item = (usize, Role)> + '_ {
        self.segments.iter().filter_map(|s| match s.kind {
            SegmentKind::Intercept { target, role } => Some((target, role)),
            _ => None,
        })
    }

    /// Only chain-goal, standby or hold segments.
    pub fn is_plain(&self) -> bool {
        self.segments.iter().all(|s| {
            matches!(
                s.kind,
                SegmentKind::Own | SegmentKind::Standby | SegmentKind::Hold
            )
        })
    }

    pub fn explores(&self) -> Option<&[usize]> {
        self.segments.iter().find_map(|s| match &s.kind {
            SegmentKind::Explore { targets } => Some(targets.as_slice()),
            _ => None,
        })
    }
}

/// Plan this group predicts for another one.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedGroup {
    pub members: Vec<usize>,
    pub plan: TeamPlan,
    pub rank: usize,
}

/// What one group knows and plans.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupView {
    pub members: Vec<usize>,
    /// I_k, the group's own map.
    pub belief: Belief,
    /// Per agent, the map this group believes that agent's group holds.
    pub attributed: Vec<Belief>,
    /// Per agent, where the group believes it is going.
    pub tracks: Vec<Track>,
    /// Agents given up as unreachable.
    pub lost: Vec<bool>,
    pub own_plan: Option<TeamPlan>,
    pub predicted: Vec<PredictedGroup>,
    pub chain_rank: usize,
    pub chain_order: Vec<usize>,
    /// Set once the group concludes no chain can be formed.
    pub concluded: Option<Infeasibility>,
    /// Follow the own plan without intercepting anyone.
    pub frozen: bool,
}

impl GroupView {
    /// A group whose knowledge is shared by the whole team.
    pub fn new(members: Vec<usize>, belief: Belief, tracks: Vec<Track>) -> Self {
        let n = tracks.len();
        GroupView {
            members,
            attributed: vec![belief.clone(); n],
            belief,
            tracks,
            lost: vec![false; n],
            own_plan: None,
            predicted: Vec::new(),
            chain_rank: 0,
            chain_order: Vec::new(),
            concluded: None,
            frozen: false,
        }
    }

    pub fn is_member(&self, a: usize) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    /// Fingerprint of the own plan, if any.
    pub fn plan_fingerprint(&self) -> Option<u64> {
        self.own_plan
            .as_ref()
            .map(|p| p.fingerprint(self.belief.map.resolution()))
    }

    /// The part of this group that keeps `members`; agents that left are
    /// credited with this group's current map and follow `departed`.
    pub fn restrict(&self, members: Vec<usize>, departed: impl Fn(usize) -> Track) -> GroupView {
        let mut out = self.clone();
        for &a in &self.members {
            if members.binary_search(&a).is_err() {
                out.attributed[a] = self.belief.clone();
                out.tracks[a] = departed(a);
            }
        }
        out.members = members;
        out.predicted.clear();
        out
    }

    /// Attributed map of a set of agents: most recent of their attributions.
    pub fn attributed_to(&self, agents: &[usize]) -> Belief {
        let mut it = agents.iter();
        let first = it.next().expect("nonempty group");
        let mut b = self.attributed[*first].clone();
        for &a in it {
            b.merge_from(&self.attributed[a]);
        }
        b
    }
}

/// Joins two groups that came into contact: merged membership, cell-wise most
/// recent map, most recent attributions and tracks. The own plan survives
/// only when both groups had the same one.
pub fn merge_groups(a: &GroupView, b: &GroupView) -> GroupView {
    let mut members: Vec<usize> = a.members.iter().chain(&b.members).copied().collect();
    members.sort_unstable();
    members.dedup();
    let mut belief = a.belief.clone();
    belief.merge_from(&b.belief);
    let n = a.tracks.len();
    let mut out = a.clone();
    for i in 0..n {
        let member = members.binary_search(&i).is_ok();
        out.attributed[i] = if member {
            belief.clone()
        } else {
            Belief::merged(&a.attributed[i], &b.attributed[i])
        };
        if b.tracks[i].start > a.tracks[i].start {
            out.tracks[i] = b.tracks[i].clone();
        }
        out.lost[i] = !member && (a.lost[i] || b.lost[i]);
    }
    let same_plan = a.plan_fingerprint() == b.plan_fingerprint() && a.belief.map.cells() == b.belief.map.cells();
    if !same_plan {
        out.own_plan = None;
        out.predicted.clear();
    }
    out.members = members;
    out.belief = belief;
    out.concluded = None;
    out.frozen = a.frozen && b.frozen;
    out
}

/// Shared planning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanContext {
    pub base: Point,
    pub goal: Point,
    pub chain: ChainParams,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionStats {
    /// Chain plans computed: the own plan plus one per predicted group, or
    /// zero when the group is alone.
    pub predictions: usize,
    /// Groups the planning group believes exist, itself included.
    pub groups: usize,
    pub intercepts: usize,
}

/// A detected disagreement on a chain neighbour's goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub agent: usize,
    pub neighbour: usize,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlan {
    pub directives: Vec<AgentDirective>,
    pub stats: PredictionStats,
    pub mismatches: Vec<Mismatch>,
}

fn same_cell(map: &GridMap, a: Option<Point>, b: Option<Point>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => map.cell_of(a) == map.cell_of(b),
        (None, None) => true,
        _ => false,
    }
}

fn route_from(map: &GridMap, from: Point, to: Point) -> Option<Path> {
    let f = propagate_cached(map, from).ok()?;
    let mut p = f.extract_path(to).ok()?;
    p.reverse();
    Some(p)
}

/// Believed positions at `now`: actual for members, dead-reckoned along
/// tracks for everyone else.
pub fn believed_positions(view: &GroupView, positions: &[Point], now: f64, speed: f64) -> Vec<Point> {
    (0..view.tracks.len())
        .map(|i| {
            if view.is_member(i) {
                positions[i]
            } else {
                view.tracks[i].position_at(now, speed)
            }
        })
        .collect()
}

/// Replans group `view` at time `now`: own chain plan on its map, plans
/// predicted for the relevant other groups, and member directives.
pub fn group_plan(view: &mut GroupView, positions: &[Point], now: f64, ctx: &PlanContext) -> GroupPlan {
    let n = view.tracks.len();
    let map = view.belief.map.clone();
    let pos = believed_positions(view, positions, now, ctx.speed);
    let active: Vec<bool> = (0..n).map(|i| !view.lost[i]).collect();
    let own = plan_chain(&pos, &active, ctx.base, ctx.goal, &map, &ctx.chain);

    // other groups as this group believes them
    let outsiders: Vec<usize> = (0..n).filter(|&i| !view.is_member(i) && !view.lost[i]).collect();
    let mut ds = DisjointSet::new(n);
    for (k, &i) in outsiders.iter().enumerate() {
        for &j in &outsiders[k + 1..] {
            if linked(&map, pos[i], pos[j], ctx.chain.c_range) {
                ds.union(i, j);
            }
        }
    }
    let mut others: Vec<Vec<usize>> = Vec::new();
    for &i in &outsiders {
        let r = ds.find(i);
        match others.iter_mut().find(|g| ds.find(g[0]) == r) {
            Some(g) => g.push(i),
            None => others.push(vec![i]),
        }
    }

    // rank groups by the base distance of their closest member
    let base_field = propagate_cached(&map, ctx.base).ok();
    let closeness = |g: &[usize]| {
        g.iter()
            .map(|&a| base_field.as_ref().map_or(f64::INFINITY, |f| f.value_at(pos[a])))
            .fold(f64::INFINITY, f64::min)
    };
    let mut ranking: Vec<(f64, usize, Option<usize>)> = others
        .iter()
        .enumerate()
        .map(|(k, g)| (closeness(g), g[0], Some(k)))
        .collect();
    ranking.push((closeness(&view.members), view.members[0], None));
    ranking.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let own_rank = ranking.iter().position(|r| r.2.is_none()).expect("own group ranked");
    let rank_of = |k: usize| ranking.iter().position(|r| r.2 == Some(k)).expect("ranked");

    // groups this one depends on: rank neighbours and owners of chain
    // neighbours of members
    let group_of = |a: usize| others.iter().position(|g| g.contains(&a));
    let mut relevant: Vec<usize> = Vec::new();
    for r in [own_rank.wrapping_sub(1), own_rank + 1] {
        if let Some(&(_, _, Some(k))) = ranking.get(r) {
            relevant.push(k);
        }
    }
    let order: Vec<usize> = own
        .chain_order()
        .into_iter()
        .filter(|&a| own.allocation[a].is_some())
        .collect();
    for (k, &a) in order.iter().enumerate() {
        if !view.is_member(a) {
            continue;
        }
        for nb in [k.checked_sub(1), Some(k + 1)].into_iter().flatten() {
            if let Some(g) = order.get(nb).and_then(|&b| group_of(b)) {
                relevant.push(g);
            }
        }
    }
    relevant.sort_unstable();
    relevant.dedup();

    let predicted: Vec<PredictedGroup> = relevant
        .iter()
        .map(|&k| {
            let att = view.attributed_to(&others[k]);
            let plan = if att.map == map {
                own.clone()
            } else {
                plan_chain(&pos, &active, ctx.base, ctx.goal, &att.map, &ctx.chain)
            };
            PredictedGroup {
                members: others[k].clone(),
                plan,
                rank: rank_of(k),
            }
        })
        .collect();
    let mut stats = PredictionStats {
        predictions: if predicted.is_empty() { 0 } else { predicted.len() + 1 },
        groups: others.len() + 1,
        intercepts: 0,
    };

    let mut mismatches = Vec::new();
    let directives = if own.feasible {
        view.concluded = None;
        predict_agent_paths(view, &own, &predicted, &pos, &map, &mut mismatches)
    } else {
        let d = seek(view, &outsiders, &pos, now, ctx.speed, &map);
        view.concluded = d
            .iter()
            .all(|d| d.segments.iter().all(|s| s.kind == SegmentKind::Hold))
            .then(|| own.reason.expect("infeasible plans carry a reason"));
        d
    };
    stats.intercepts = directives.iter().map(|d| d.intercepts().count()).sum();

    for p in &predicted {
        for &a in &p.members {
            let route = p.plan.route_of(a);
            view.tracks[a] = if route.is_empty() {
                Track::stationary(pos[a], now)
            } else {
                Track {
                    path: route.clone(),
                    start: now,
                }
            };
        }
    }
    for d in &directives {
        view.tracks[d.agent] = Track {
            path: d.concat(),
            start: now,
        };
    }
    view.chain_rank = own_rank;
    view.chain_order = order;
    view.own_plan = Some(own);
    view.predicted = predicted;
    GroupPlan {
        directives,
        stats,
        mismatches,
    }
}

/// Route toward `target_path` (or, if unreachable, next to its room and
/// around it) appended to `segs`. Returns the end point and whether the
/// route ends in an exploration.
fn push_intercept(
    segs: &mut Vec<Segment>,
    from: Point,
    target: usize,
    role: Role,
    target_path: &[Point],
    group: &[usize],
    map: &GridMap,
) -> (Point, bool) {
    let Ok(i) = intercept(target_path, from, map) else {
        return (from, false);
    };
    let end = *i.path.last().expect("nonempty");
    if i.reachable() {
        segs.push(Segment {
            kind: SegmentKind::Intercept { target, role },
            path: i.path,
        });
        return (end, false);
    }
    let blocked = *target_path.last().expect("nonempty");
    segs.push(Segment {
        kind: SegmentKind::Approach {
            targets: group.to_vec(),
        },
        path: i.path,
    });
    match trapped_routine(end, map, blocked) {
        Some(t) => {
            let tend = *t.path.last().expect("nonempty");
            segs.push(Segment {
                kind: SegmentKind::Explore {
                    targets: group.to_vec(),
                },
                path: t.path,
            });
            (tend, true)
        }
        None => {
            segs.push(Segment {
                kind: SegmentKind::Explore {
                    targets: group.to_vec(),
                },
                path: vec![end],
            });
            (end, true)
        }
    }
}

/// Member directives under a feasible own plan: intercept a chain parent or
/// descendant from another group whose predicted goal differs from the own
/// plan's, then head to the own goal.
pub fn predict_agent_paths(
    view: &GroupView,
    own: &TeamPlan,
    predicted: &[PredictedGroup],
    pos: &[Point],
    map: &GridMap,
    mismatches: &mut Vec<Mismatch>,
) -> Vec<AgentDirective> {
    let order: Vec<usize> = own
        .chain_order()
        .into_iter()
        .filter(|&a| own.allocation[a].is_some())
        .collect();
    let owner = |a: usize| predicted.iter().find(|p| p.members.contains(&a));
    let mut out = Vec::with_capacity(view.members.len());
    for &a in &view.members {
        let mut segs: Vec<Segment> = Vec::new();
        let mut cursor = pos[a];
        let mut exploring = false;
        if let (Some(k), false) = (order.iter().position(|&o| o == a), view.frozen) {
            let neighbours = [
                (k.checked_sub(1).map(|j| order[j]), Role::Parent),
                (order.get(k + 1).copied(), Role::Descendant),
            ];
            for (nb, role) in neighbours {
                let Some(nb) = nb else { continue };
                if view.is_member(nb) || view.lost[nb] {
                    continue;
                }
                let Some(g) = owner(nb) else { continue };
                if same_cell(map, g.plan.goal_of(nb), own.goal_of(nb)) {
                    continue;
                }
                mismatches.push(Mismatch {
                    agent: a,
                    neighbour: nb,
                    role,
                });
                if exploring {
                    continue;
                }
                let route = g.plan.route_of(nb);
                let target_path: Path = if route.is_empty() { vec![pos[nb]] } else { route.clone() };
                let (end, explore) = push_intercept(&mut segs, cursor, nb, role, &target_path, &g.members, map);
                cursor = end;
                exploring = explore;
            }
        }
        if !exploring {
            let kind = if own.allocation[a].is_some() {
                SegmentKind::Own
            } else {
                SegmentKind::Standby
            };
            match own.target_of(a) {
                Some(_) if segs.is_empty() => segs.push(Segment {
                    kind,
                    path: own.route_of(a).clone(),
                }),
                Some(t) => {
                    if let Some(p) = route_from(map, cursor, t) {
                        segs.push(Segment { kind, path: p });
                    }
                }
                None if segs.is_empty() => segs.push(Segment {
                    kind: SegmentKind::Hold,
                    path: vec![cursor],
                }),
                None => {}
            }
        }
        out.push(AgentDirective { agent: a, segments: segs });
    }
    out
}

/// Directives when the group cannot plan a chain itself: every member heads
/// for the nearest reachable agent of another group to exchange maps, or
/// explores around it if it cannot be reached. Members hold when nobody is
/// left to look for.
fn seek(view: &GroupView, outsiders: &[usize], pos: &[Point], now: f64, speed: f64, map: &GridMap) -> Vec<AgentDirective> {
    let mut out = Vec::with_capacity(view.members.len());
    for &a in &view.members {
        let hold = AgentDirective::hold(a, pos[a]);
        if outsiders.is_empty() || view.frozen {
            out.push(hold);
            continue;
        }
        let Ok(field) = propagate_cached(map, pos[a]) else {
            out.push(hold);
            continue;
        };
        let nearest = outsiders
            .iter()
            .map(|&o| (field.value_at(pos[o]), o))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .expect("nonempty");
        let mut segs = Vec::new();
        if nearest.0.is_finite() {
            let o = nearest.1;
            let track = view.tracks[o].remaining(now, speed);
            push_intercept(&mut segs, pos[a], o, Role::Seek, &track, &[o], map);
        } else {
            let o = *outsiders
                .iter()
                .min_by(|&&x, &&y| pos[a].dist(pos[x]).total_cmp(&pos[a].dist(pos[y])).then(x.cmp(&y)))
                .expect("nonempty");
            let targets: Vec<usize> = outsiders.to_vec();
            push_intercept(&mut segs, pos[a], o, Role::Seek, &[pos[o]], &targets, map);
        }
        if segs.is_empty() {
            out.push(hold);
        } else {
            out.push(AgentDirective { agent: a, segments: segs });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Region;

    #[test]
    fn track_dead_reckoning() {
        let t = Track {
            path: vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)],
            start: 5.0,
        };
        assert_eq!(t.position_at(0.0, 2.0), Point::new(0.0, 0.0));
        assert_eq!(t.position_at(7.0, 2.0), Point::new(4.0, 0.0));
        assert_eq!(t.position_at(12.0, 2.0), Point::new(10.0, 4.0));
        assert_eq!(t.position_at(100.0, 2.0), Point::new(10.0, 10.0));
        assert_eq!(
            t.remaining(7.0, 2.0),
            vec![Point::new(4.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)]
        );
        assert_eq!(t.remaining(100.0, 2.0), vec![Point::new(10.0, 10.0)]);
        assert_eq!(t.arrival(Point::new(10.0, 0.0), 2.0), Some(10.0));
        assert_eq!(t.arrival(Point::new(0.0, 0.0), 2.0), Some(5.0));
        assert_eq!(t.arrival(Point::new(3.0, 0.0), 2.0), None);
    }

    #[test]
    fn directive_concat_is_continuous() {
        let d = AgentDirective {
            agent: 0,
            segments: vec![
                Segment {
                    kind: SegmentKind::Intercept { target: 1, role: Role::Parent },
                    path: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
                },
                Segment {
                    kind: SegmentKind::Own,
                    path: vec![Point::new(1.0, 0.0), Point::new(1.0, 1.0)],
                },
            ],
        };
        assert_eq!(d.concat().len(), 3);
        assert!(!d.is_plain());
        assert_eq!(d.intercepts().collect::<Vec<_>>(), vec![(1, Role::Parent)]);
    }

    fn ctx() -> PlanContext {
        PlanContext {
            base: Point::new(5.0, 5.0),
            goal: Point::new(80.0, 80.0),
            chain: ChainParams::default(),
            speed: 2.0,
        }
    }

    #[test]
    fn single_group_reduces_to_plan_chain() {
        let m = GridMap::new(100, 100, 1.0);
        let pos: Vec<Point> = (0..7).map(|i| Point::new(3.0 + i as f64, 3.0)).collect();
        let tracks = pos.iter().map(|&p| Track::stationary(p, 0.0)).collect();
        let mut v = GroupView::new((0..7).collect(), Belief::new(m.clone()), tracks);
        let out = group_plan(&mut v, &pos, 0.0, &ctx());
        assert_eq!(out.stats.predictions, 0);
        assert_eq!(out.stats.intercepts, 0);
        let expect = plan_chain(&pos, &[true; 7], ctx().base, ctx().goal, &m, &ctx().chain);
        assert_eq!(v.own_plan.as_ref(), Some(&expect));
        for d in &out.directives {
            assert_eq!(&d.concat(), expect.route_of(d.agent));
        }
    }

    #[test]
    fn consistent_groups_do_not_intercept() {
        let m = GridMap::new(100, 100, 1.0);
        let pos: Vec<Point> = (0..7)
            .map(|i| if i < 4 { Point::new(3.0 + i as f64, 3.0) } else { Point::new(60.0 + i as f64, 80.0) })
            .collect();
        let tracks = pos.iter().map(|&p| Track::stationary(p, 0.0)).collect();
        let mut v = GroupView::new(vec![0, 1, 2, 3], Belief::new(m), tracks);
        let out = group_plan(&mut v, &pos, 0.0, &ctx());
        assert_eq!(out.stats.groups, 2);
        assert_eq!(out.stats.predictions, 2);
        assert!(out.mismatches.is_empty());
        assert_eq!(out.stats.intercepts, 0);
    }

    #[test]
    fn merge_with_self_is_identity() {
        let m = GridMap::new(20, 20, 1.0);
        let tracks = vec![Track::stationary(Point::new(1.0, 1.0), 0.0); 3];
        let v = GroupView::new(vec![0, 2], Belief::new(m), tracks);
        assert_eq!(merge_groups(&v, &v), v);
    }

    #[test]
    fn merged_belief_has_both_updates() {
        let m = GridMap::new(20, 20, 1.0);
        let mut truth = m.clone();
        truth.fill_walls(Region::new(3, 3, 4, 4)).unwrap();
        truth.fill_walls(Region::new(15, 15, 15, 16)).unwrap();
        let tracks = vec![Track::stationary(Point::new(1.0, 1.0), 0.0); 2];
        let mut a = GroupView::new(vec![0], Belief::new(m.clone()), tracks.clone());
        let mut b = GroupView::new(vec![1], Belief::new(m), tracks);
        let left: Vec<usize> = (0..truth.len()).filter(|&i| truth.cell_at(i).x < 10).collect();
        let right: Vec<usize> = (0..truth.len()).filter(|&i| truth.cell_at(i).x >= 10).collect();
        a.belief.observe_cells(&truth, &left, 1);
        b.belief.observe_cells(&truth, &right, 2);
        let ab = merge_groups(&a, &b);
        let ba = merge_groups(&b, &a);
        assert_eq!(ab.belief.map.cells(), truth.cells());
        assert_eq!(ab.belief, ba.belief);
        assert_eq!(ab.members, vec![0, 1]);
    }
}
