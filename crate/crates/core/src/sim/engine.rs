//! The discrete-time trial loop, agent motion and the omniscient baseline.

use super::config::{SimConfig, Strategy};
use super::pred::PredState;
use super::record::{state_hash, CycleDetector, Event, Outcome, TickRecord, TrialRecord};
use super::search::SearchState;
use crate::chain::{plan_chain, plan_chain_by, ChainParams, Objective, TeamPlan};
use crate::coordination::{nearest_free, AgentDirective, PlanContext, Role, Segment, SegmentKind};
use crate::geom::{Path, Point};
use crate::world::{
    comm_graph, partition_positions, visible_cells, AgentMode, ChangeKind, GridMap, Partition, Scenario, ScenarioChange,
    SensorModel,
};
use std::collections::HashMap;
use std::sync::Arc;

const EPS: f64 = 1e-9;
/// Motion is checked against the true map every this many meters.
const SAMPLE: f64 = 0.1;

/// Cells sensed from a cell centre, per true-map version. One cache can
/// serve every strategy run on the same scenario.
#[derive(Debug, Default)]
pub struct VisCache {
    sensed: HashMap<(usize, u64), Arc<Vec<usize>>>,
}

impl VisCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.sensed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensed.is_empty()
    }

    fn cells(&mut self, truth: &GridMap, truth_fp: u64, cell: usize, sensor: &SensorModel) -> Arc<Vec<usize>> {
        self.sensed
            .entry((cell, truth_fp))
            .or_insert_with(|| Arc::new(visible_cells(truth, truth.center(truth.cell_at(cell)), sensor)))
            .clone()
    }
}

/// Per-agent sensing bookkeeping: an agent only senses again after moving
/// to another cell or after the world changed.
pub(crate) struct Senses<'c> {
    cache: &'c mut VisCache,
    sensor: SensorModel,
    last: Vec<Option<(usize, u64)>>,
    /// Cell an agent ran into during the last move.
    bumped: Vec<Option<usize>>,
}

impl<'c> Senses<'c> {
    fn new(cache: &'c mut VisCache, sensor: SensorModel, n: usize) -> Self {
        Senses {
            cache,
            sensor,
            last: vec![None; n],
            bumped: vec![None; n],
        }
    }

    /// Cells agent `a` senses now, or `None` when it learns nothing new. A
    /// cell it ran into counts as sensed whatever the range.
    pub(crate) fn observe(&mut self, a: usize, p: Point, truth: &GridMap, truth_fp: u64) -> Option<Arc<Vec<usize>>> {
        let bump = self.bumped[a].take();
        let c = truth.idx(truth.cell_of(p)?);
        let fresh = self.last[a] != Some((c, truth_fp));
        let cells = if fresh {
            self.last[a] = Some((c, truth_fp));
            self.cache.cells(truth, truth_fp, c, &self.sensor)
        } else if bump.is_some() {
            Arc::new(Vec::new())
        } else {
            return None;
        };
        match bump {
            Some(b) if !cells.contains(&b) => {
                let mut v = (*cells).clone();
                v.push(b);
                Some(Arc::new(v))
            }
            _ => Some(cells),
        }
    }

    fn bump(&mut self, a: usize, cell: usize) {
        self.bumped[a] = Some(cell);
    }
}

/// An agent's directive being executed: segment `k`, next waypoint `j`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Course {
    pub segs: Vec<Segment>,
    k: usize,
    j: usize,
}

impl Course {
    pub(crate) fn new(d: &AgentDirective) -> Self {
        Course {
            segs: d.segments.clone(),
            k: 0,
            j: 0,
        }
    }

    pub(crate) fn hold(p: Point) -> Self {
        Self::new(&AgentDirective::hold(usize::MAX, p))
    }

    pub(crate) fn current(&self) -> Option<&SegmentKind> {
        self.segs.get(self.k).map(|s| &s.kind)
    }

    pub(crate) fn finished(&self) -> bool {
        self.k >= self.segs.len()
    }

    /// Unvisited segments, including the current one.
    pub(crate) fn pending(&self) -> &[Segment] {
        &self.segs[self.k.min(self.segs.len())..]
    }

    /// Only chain-goal, standby or hold segments left.
    pub(crate) fn is_plain(&self) -> bool {
        self.pending()
            .iter()
            .all(|s| matches!(s.kind, SegmentKind::Own | SegmentKind::Standby | SegmentKind::Hold))
    }

    /// Path still to travel from `pos`.
    pub(crate) fn remaining(&self, pos: Point) -> Path {
        let mut out = vec![pos];
        for (k, s) in self.segs.iter().enumerate().skip(self.k) {
            let from = if k == self.k { self.j } else { 0 };
            for &p in s.path.iter().skip(from) {
                if out.last() != Some(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    fn mode(&self) -> AgentMode {
        match self.current() {
            Some(SegmentKind::Own | SegmentKind::Standby) => AgentMode::Deploying,
            Some(SegmentKind::Intercept { .. } | SegmentKind::Approach { .. }) => AgentMode::Intercepting,
            Some(SegmentKind::Explore { .. }) => AgentMode::TrappedExplore,
            Some(SegmentKind::Hold) => AgentMode::Waiting,
            None => match self.segs.last().map(|s| &s.kind) {
                Some(SegmentKind::Own | SegmentKind::Standby) => AgentMode::Done,
                _ => AgentMode::Waiting,
            },
        }
    }
}

/// What happened to one agent while moving in a tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Moved {
    /// Completed segments and their lengths.
    pub completed: Vec<(SegmentKind, f64)>,
    pub collided: bool,
    /// The occupied cell that stopped the agent.
    pub blocked: Option<usize>,
    pub distance: f64,
}

/// Free on the true map, allowing for points on cell borders.
pub(crate) fn free_at(map: &GridMap, p: Point) -> bool {
    const E: f64 = 1e-7;
    [0.0, -E, E]
        .iter()
        .any(|&dx| [0.0, -E, E].iter().any(|&dy| map.is_free_point(Point::new(p.x + dx, p.y + dy))))
}

/// Moves along `course` for up to `budget` meters, stopping before any
/// sampled point that is occupied on `truth`.
pub(crate) fn advance(pos: &mut Point, course: &mut Course, budget: f64, truth: &GridMap) -> Moved {
    let mut out = Moved::default();
    let mut left = budget;
    while course.k < course.segs.len() {
        let seg = &course.segs[course.k];
        if course.j >= seg.path.len() {
            let len = crate::geom::path_length(&seg.path);
            out.completed.push((seg.kind.clone(), len));
            course.k += 1;
            course.j = 0;
            continue;
        }
        if matches!(seg.kind, SegmentKind::Hold) {
            break;
        }
        let target = seg.path[course.j];
        let d = pos.dist(target);
        if d <= EPS {
            *pos = target;
            course.j += 1;
            continue;
        }
        if left <= EPS {
            break;
        }
        let reach = d.min(left);
        let end = if reach >= d { target } else { pos.lerp(target, reach / d) };
        let steps = (reach / SAMPLE).ceil().max(1.0) as usize;
        let start = *pos;
        let ahead = Point::new((end.x - start.x) / reach * 1e-6, (end.y - start.y) / reach * 1e-6);
        let mut last_ok = start;
        for s in 1..=steps {
            let q = if s == steps { end } else { start.lerp(end, s as f64 / steps as f64) };
            // a point on a cell border passes only when the motion continues into free space
            if !truth.is_free_point(q) && !truth.is_free_point(Point::new(q.x + ahead.x, q.y + ahead.y)) {
                out.collided = true;
                out.blocked = truth.cell_of(q).map(|c| truth.idx(c));
                break;
            }
            last_ok = q;
        }
        out.distance += start.dist(last_ok);
        *pos = last_ok;
        if out.collided {
            break;
        }
        left -= reach;
        if reach >= d {
            course.j += 1;
        }
    }
    out
}

/// Directive for agent `a` under a whole-team plan.
pub(crate) fn plan_directive(plan: &TeamPlan, a: usize, pos: Point) -> AgentDirective {
    let route = plan.route_of(a);
    if route.is_empty() {
        AgentDirective::hold(a, pos)
    } else if plan.allocation[a].is_some() {
        AgentDirective::single(a, SegmentKind::Own, route.clone())
    } else {
        AgentDirective::single(a, SegmentKind::Standby, route.clone())
    }
}

/// Whether some agent stands on the goal cell and is linked to the base
/// through the communication graph on `truth`.
pub fn chain_formed(truth: &GridMap, base: Point, goal: Point, positions: &[Point], c_range: f64) -> bool {
    let Some(gc) = truth.cell_of(goal) else {
        return false;
    };
    let on_goal: Vec<usize> = (0..positions.len())
        .filter(|&i| truth.cell_of(positions[i]) == Some(gc))
        .collect();
    if on_goal.is_empty() {
        return false;
    }
    let mut nodes = Vec::with_capacity(positions.len() + 1);
    nodes.push(base);
    nodes.extend_from_slice(positions);
    let reach = comm_graph(&nodes, truth, c_range).reachable_from(0);
    on_goal.iter().any(|&i| reach[i + 1])
}

/// Shared state of a running trial, handed to the strategies.
pub(crate) struct World {
    pub truth: GridMap,
    pub truth_fp: u64,
    pub truth_changed: bool,
    pub pos: Vec<Point>,
    pub courses: Vec<Course>,
    pub moved: Vec<Moved>,
    /// Followers that wait this tick to keep their spacing.
    pub paused: Vec<bool>,
    pub tick: u32,
    pub now: f64,
    pub change_time: Option<f64>,
    pub ctx: PlanContext,
    pub events: Vec<Event>,
}

impl World {
    pub(crate) fn n(&self) -> usize {
        self.pos.len()
    }

    /// Stamp for observations made this tick; initial knowledge is stamp 0.
    pub(crate) fn stamp(&self) -> u32 {
        self.tick + 1
    }

    pub(crate) fn set_directive(&mut self, d: &AgentDirective) {
        self.courses[d.agent] = Course::new(d);
    }
}

/// What a strategy reports after planning a tick.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct PlanStep {
    pub outcome: Option<Outcome>,
    /// Some group's map changed (resets cycle detection).
    pub knowledge_changed: bool,
}

struct FullState {
    plan: TeamPlan,
    initial_map: GridMap,
    dt: f64,
    timeout: f64,
}

impl FullState {
    /// At a change the omniscient team carries on or follows a fresh plan,
    /// whichever it forecasts to form the chain first. Fresh plans are made
    /// on the true map, on it without the newly opened doors and on the
    /// initial map, each with both relay spacings and both allocation
    /// objectives.
    fn step(&mut self, w: &mut World, initial: &TeamPlan) -> PlanStep {
        if w.tick == 0 {
            self.plan = initial.clone();
        } else if w.truth_changed {
            let active = vec![true; w.n()];
            let mut maps = vec![w.truth.clone()];
            // the same world with the doors that just opened still shut
            let opened: Vec<String> = w
                .truth
                .doors()
                .iter()
                .filter(|d| d.open && self.initial_map.door(&d.id).is_some_and(|i| !i.open))
                .map(|d| d.id.clone())
                .collect();
            if !opened.is_empty() {
                let mut m = w.truth.clone();
                for door in opened {
                    m.apply_change_mut(&ScenarioChange::new(w.now, ChangeKind::DoorClose { door }))
                        .expect("door exists");
                }
                maps.push(m);
            }
            maps.push(self.initial_map.clone());
            let tight = ChainParams {
                safety: 1.0,
                ..w.ctx.chain
            };
            let mut plans: Vec<TeamPlan> = Vec::new();
            for objective in [Objective::Total, Objective::Makespan] {
                for params in [w.ctx.chain, tight] {
                    for m in &maps {
                        plans.push(plan_chain_by(&w.pos, &active, w.ctx.base, w.ctx.goal, m, &params, objective));
                    }
                }
            }
            let mut best: Option<(f64, Option<usize>)> = self.forecast(w, w.courses.clone()).map(|t| (t, None));
            for (k, p) in plans.iter().enumerate() {
                if !p.feasible {
                    continue;
                }
                let courses = (0..w.n()).map(|a| Course::new(&plan_directive(p, a, w.pos[a]))).collect();
                if let Some(t) = self.forecast(w, courses) {
                    if best.is_none_or(|(b, _)| t + EPS < b) {
                        best = Some((t, Some(k)));
                    }
                }
            }
            match best {
                Some((_, None)) => return PlanStep::default(),
                Some((_, Some(k))) => self.plan = plans[k].clone(),
                None => self.plan = plans.into_iter().next().expect("the true map is planned on"),
            }
        } else {
            return PlanStep::default();
        }
        if !self.plan.feasible {
            return PlanStep {
                outcome: Some(Outcome::Infeasible(self.plan.reason.expect("reason"))),
                knowledge_changed: true,
            };
        }
        for a in 0..w.n() {
            let d = plan_directive(&self.plan, a, w.pos[a]);
            w.set_directive(&d);
        }
        PlanStep {
            outcome: None,
            knowledge_changed: true,
        }
    }

    /// When `courses` would complete the chain on the current true map,
    /// moving everyone from their present positions.
    fn forecast(&self, w: &World, mut courses: Vec<Course>) -> Option<f64> {
        let mut pos = w.pos.clone();
        let budget = w.ctx.speed * self.dt;
        let c_range = w.ctx.chain.c_range;
        let mut tick = w.tick;
        loop {
            let mut moved = false;
            for (p, c) in pos.iter_mut().zip(courses.iter_mut()) {
                moved |= advance(p, c, budget, &w.truth).distance > 0.0;
            }
            tick += 1;
            let now = tick as f64 * self.dt;
            if chain_formed(&w.truth, w.ctx.base, w.ctx.goal, &pos, c_range)
                && (!moved || partition_positions(&pos, &w.truth, c_range).len() == 1)
            {
                return Some(now);
            }
            if !moved || now + EPS >= self.timeout {
                return None;
            }
        }
    }
}

enum Policy {
    Full(FullState),
    Pred(Box<PredState>),
    Search(Box<SearchState>),
}

fn groups_of(part: &Partition) -> Vec<usize> {
    part.group_of.iter().map(|&g| part.group_id(g)).collect()
}

/// Merge and split events between consecutive partitions.
fn partition_events(old: &Partition, new: &Partition) -> Vec<Event> {
    let mut out = Vec::new();
    for g in &new.groups {
        let mut sources: Vec<usize> = g.iter().map(|&a| old.group_of[a]).collect();
        sources.sort_unstable();
        sources.dedup();
        if sources.len() > 1 {
            out.push(Event::Merge {
                groups: sources.iter().map(|&s| old.groups[s].clone()).collect(),
                into: g.clone(),
            });
        }
    }
    for g in &old.groups {
        let mut parts: Vec<usize> = g.iter().map(|&a| new.group_of[a]).collect();
        parts.sort_unstable();
        parts.dedup();
        if parts.len() > 1 {
            out.push(Event::Split {
                group: g.clone(),
                into: parts.iter().map(|&p| new.groups[p].clone()).collect(),
            });
        }
    }
    out
}

/// Runs one trial of `strategy` on `scenario` over `map`.
pub fn run_trial(map: &GridMap, scenario: &Scenario, cfg: &SimConfig, strategy: Strategy) -> TrialRecord {
    run_trial_cached(map, scenario, cfg, strategy, &mut VisCache::new())
}

/// [`run_trial`] sharing sensing results through `cache`; the cache must
/// only be reused for the same map, scenario and sensor.
pub fn run_trial_cached(
    map: &GridMap,
    scenario: &Scenario,
    cfg: &SimConfig,
    strategy: Strategy,
    cache: &mut VisCache,
) -> TrialRecord {
    let n = scenario.agents.len();
    let ctx = PlanContext {
        base: scenario.base,
        goal: scenario.goal,
        chain: cfg.chain(),
        speed: cfg.speed,
    };
    let mut changes = scenario.changes.clone();
    changes.sort_by(|a, b| a.time.total_cmp(&b.time));
    let change_time = scenario.change_time();
    let t0 = change_time.unwrap_or(0.0);
    let initial = plan_chain(&scenario.agents, &vec![true; n], ctx.base, ctx.goal, map, &ctx.chain);

    let mut w = World {
        truth: map.clone(),
        truth_fp: map.fingerprint(),
        truth_changed: false,
        pos: scenario.agents.clone(),
        courses: scenario.agents.iter().map(|&p| Course::hold(p)).collect(),
        moved: vec![Moved::default(); n],
        paused: vec![false; n],
        tick: 0,
        now: 0.0,
        change_time,
        ctx,
        events: Vec::new(),
    };
    let mut senses = Senses::new(cache, cfg.sensor(), n);
    let first_part = partition_positions(&w.pos, &w.truth, cfg.c_range);
    let mut policy = match strategy {
        Strategy::Full => Policy::Full(FullState {
            plan: initial.clone(),
            initial_map: map.clone(),
            dt: cfg.dt,
            timeout: cfg.timeout,
        }),
        Strategy::Pred => Policy::Pred(Box::new(PredState::from_initial(map, &initial, &first_part, &w.pos))),
        Strategy::Search => Policy::Search(Box::new(SearchState::new(map, &initial))),
    };
    if !matches!(policy, Policy::Full(_)) && initial.feasible {
        for a in 0..n {
            let d = plan_directive(&initial, a, w.pos[a]);
            w.set_directive(&d);
        }
    }

    let mut detector = CycleDetector::new(cfg.cycle_window);
    let mut ticks: Vec<TickRecord> = Vec::new();
    let mut prev_part = first_part;
    let mut moved_last = true;
    let mut knowledge_changed = false;
    let mut certificate = None;
    let outcome = loop {
        w.now = w.tick as f64 * cfg.dt;
        w.truth_changed = false;
        while changes.first().is_some_and(|c| c.time <= w.now + EPS) {
            let c = changes.remove(0);
            w.truth.apply_change_mut(&c).expect("scenario changes are validated");
            w.events.push(Event::Change { kind: c.kind });
            w.truth_changed = true;
        }
        if w.truth_changed {
            w.truth_fp = w.truth.fingerprint();
            for a in 0..n {
                if !free_at(&w.truth, w.pos[a]) {
                    if let Some(c) = nearest_free(&w.truth, w.pos[a], 12) {
                        w.pos[a] = w.truth.center(c);
                        w.events.push(Event::Displaced { agent: a });
                    }
                }
            }
        }
        let part = partition_positions(&w.pos, &w.truth, cfg.c_range);
        if w.tick > 0 {
            let ev = partition_events(&prev_part, &part);
            w.events.extend(ev);
        }
        let chain = chain_formed(&w.truth, ctx.base, ctx.goal, &w.pos, cfg.c_range);
        ticks.push(TickRecord {
            tick: w.tick,
            time: w.now,
            positions: w.pos.clone(),
            modes: w.courses.iter().map(Course::mode).collect(),
            groups: groups_of(&part),
            chain,
            events: std::mem::take(&mut w.events),
        });

        if !initial.feasible {
            break Outcome::Infeasible(initial.reason.expect("infeasible plans carry a reason"));
        }
        if chain && w.now + EPS >= t0 && (part.len() == 1 || !moved_last) {
            certificate = Some(w.pos.clone());
            break Outcome::ChainFormed;
        }
        if knowledge_changed || w.truth_changed {
            detector.reset();
        }
        let mut cycle_fix = false;
        if let Some(period) = detector.push(state_hash(&w.pos, &groups_of(&part), w.truth.resolution())) {
            w.events.push(Event::CycleDetected { period });
            if !cfg.cycle_fix {
                break Outcome::CycleDetected;
            }
            cycle_fix = true;
            detector.reset();
        }
        if w.now + EPS >= cfg.timeout {
            break Outcome::Timeout;
        }

        w.paused.iter_mut().for_each(|p| *p = false);
        let step = match &mut policy {
            Policy::Full(s) => s.step(&mut w, &initial),
            Policy::Pred(s) => {
                if cycle_fix {
                    s.fix_cycle(&mut w);
                }
                s.step(&mut w, &part, &mut senses)
            }
            Policy::Search(s) => {
                if cycle_fix {
                    s.fix_cycle(&mut w);
                }
                s.step(&mut w, &part, &mut senses)
            }
        };
        knowledge_changed = step.knowledge_changed;
        if let Some(o) = step.outcome {
            break o;
        }

        let budget = cfg.speed * cfg.dt;
        moved_last = false;
        for a in 0..n {
            let m = if w.paused[a] {
                Moved::default()
            } else {
                advance(&mut w.pos[a], &mut w.courses[a], budget, &w.truth)
            };
            if m.collided {
                w.events.push(Event::Collision { agent: a });
                if let Some(c) = m.blocked {
                    senses.bump(a, c);
                }
            }
            moved_last |= m.distance > 0.0;
            w.moved[a] = m;
        }
        prev_part = part;
        w.tick += 1;
    };
    if let Some(last) = ticks.last_mut() {
        last.events.append(&mut w.events);
    }
    TrialRecord {
        strategy,
        seed: cfg.seed,
        dt: cfg.dt,
        change_time,
        ticks,
        outcome,
        certificate,
    }
}

/// Runs every strategy on the same scenario, sharing sensing work.
pub fn run_strategies(map: &GridMap, scenario: &Scenario, cfg: &SimConfig, strategies: &[Strategy]) -> Vec<TrialRecord> {
    let mut cache = VisCache::new();
    strategies
        .iter()
        .map(|&s| run_trial_cached(map, scenario, cfg, s, &mut cache))
        .collect()
}

/// A seek intercept of `target` by a Search follower or leader.
pub(crate) fn seek_segment(target: usize, path: Path) -> Segment {
    Segment {
        kind: SegmentKind::Intercept {
            target,
            role: Role::Seek,
        },
        path,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Region;

    fn straight(path: Path) -> Course {
        Course::new(&AgentDirective::single(0, SegmentKind::Own, path))
    }

    #[test]
    fn advance_moves_exactly_the_budget() {
        let m = GridMap::new(20, 20, 1.0);
        let mut c = straight(vec![Point::new(1.0, 1.0), Point::new(5.0, 1.0), Point::new(5.0, 5.0)]);
        let mut p = Point::new(1.0, 1.0);
        let r = advance(&mut p, &mut c, 0.5, &m);
        assert!((r.distance - 0.5).abs() < 1e-12);
        assert_eq!(p, Point::new(1.5, 1.0));
        let r = advance(&mut p, &mut c, 4.0, &m);
        assert_eq!(p, Point::new(5.0, 1.5));
        assert!((r.distance - 4.0).abs() < 1e-12);
        advance(&mut p, &mut c, 10.0, &m);
        assert_eq!(p, Point::new(5.0, 5.0));
        assert!(c.finished());
        assert_eq!(c.mode(), AgentMode::Done);
    }

    #[test]
    fn advance_halts_before_a_wall() {
        let mut m = GridMap::new(20, 20, 1.0);
        m.fill_walls(Region::new(4, 0, 4, 19)).unwrap();
        let mut c = straight(vec![Point::new(1.0, 1.0), Point::new(8.0, 1.0)]);
        let mut p = Point::new(1.0, 1.0);
        let mut hit = false;
        for _ in 0..20 {
            hit |= advance(&mut p, &mut c, 0.5, &m).collided;
        }
        assert!(hit);
        assert!(p.x <= 3.5 && p.x > 3.3, "{p}");
        assert!(free_at(&m, p));
    }

    #[test]
    fn remaining_starts_at_the_agent() {
        let mut c = straight(vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(4.0, 4.0)]);
        let mut p = Point::new(0.0, 0.0);
        advance(&mut p, &mut c, 1.0, &GridMap::new(10, 10, 1.0));
        assert_eq!(
            c.remaining(p),
            vec![Point::new(1.0, 0.0), Point::new(4.0, 0.0), Point::new(4.0, 4.0)]
        );
    }

    #[test]
    fn chain_needs_goal_agent_linked_to_base() {
        let m = GridMap::new(100, 100, 1.0);
        let base = Point::new(5.0, 5.0);
        let goal = Point::new(5.0, 60.0);
        let relays = vec![Point::new(5.0, 32.0), Point::new(5.0, 60.0)];
        assert!(chain_formed(&m, base, goal, &relays, 30.0));
        assert!(!chain_formed(&m, base, goal, &[Point::new(5.0, 60.0)], 30.0));
        assert!(!chain_formed(&m, base, goal, &[Point::new(5.0, 32.0)], 30.0));
    }
}
