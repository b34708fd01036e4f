//! The search baseline: after the change one group, the closest to the base
//! that is not trapped, collects the others one by one while they wait; the
//! reunited team then plans the chain on what it has learnt.

use super::engine::{seek_segment, Course, PlanStep, Senses, World};
use super::pred::PredState;
use super::record::Event;
use crate::chain::TeamPlan;
use crate::coordination::{free_component, intercept, trapped_routine, AgentDirective, Segment, SegmentKind, Track};
use crate::fmm::{propagate_cached, DistanceField};
use crate::geom::Point;
use crate::world::{Belief, GridMap, Partition};

/// Followers keep this many meters per rank behind the leader.
const LAG: f64 = 1.5;

enum Phase {
    /// Before the change: the shared initial plan.
    Deploy,
    Searching(Box<Searching>),
    Unified(Box<PredState>),
}

struct Searching {
    searcher: Vec<bool>,
    unreachable: Vec<bool>,
    /// Map shared by the searchers.
    belief: Belief,
    /// Maps of the waiting agents.
    beliefs: Vec<Belief>,
    /// Where the searchers believe each waiting agent stopped.
    waiting_at: Vec<Point>,
    target: Option<usize>,
    leader: usize,
    /// Agents sought by an exploration under way.
    exploring: Vec<usize>,
}

pub(crate) struct SearchState {
    phase: Phase,
    initial_map: GridMap,
    initial: TeamPlan,
}

impl SearchState {
    pub(crate) fn new(map: &GridMap, initial: &TeamPlan) -> Self {
        SearchState {
            phase: Phase::Deploy,
            initial_map: map.clone(),
            initial: initial.clone(),
        }
    }

    pub(crate) fn fix_cycle(&mut self, w: &mut World) {
        if let Phase::Unified(p) = &mut self.phase {
            p.fix_cycle(w);
        }
    }

    pub(crate) fn step(&mut self, w: &mut World, part: &Partition, senses: &mut Senses) -> PlanStep {
        match &mut self.phase {
            Phase::Deploy => {
                let Some(t0) = w.change_time else {
                    return PlanStep::default();
                };
                if w.now + 1e-9 < t0 {
                    return PlanStep::default();
                }
                self.start(w, part, senses)
            }
            Phase::Searching(s) => {
                let (step, done) = s.step(w, part, senses);
                if done {
                    let mut p = PredState::from_views(part, &s.searcher, &s.belief, &s.beliefs, &w.pos, w.now);
                    let mut out = p.step(w, part, senses);
                    out.knowledge_changed |= step.knowledge_changed;
                    self.phase = Phase::Unified(Box::new(p));
                    return out;
                }
                step
            }
            Phase::Unified(p) => p.step(w, part, senses),
        }
    }

    /// The change happened: everyone stops, senses, and the searcher group
    /// is chosen.
    fn start(&mut self, w: &mut World, part: &Partition, senses: &mut Senses) -> PlanStep {
        let n = w.n();
        let stamp = w.stamp();
        let mut group_beliefs: Vec<Belief> = Vec::with_capacity(part.len());
        let mut changed = false;
        for g in &part.groups {
            let mut b = Belief::new(self.initial_map.clone());
            for &a in g {
                if let Some(cells) = senses.observe(a, w.pos[a], &w.truth, w.truth_fp) {
                    changed |= b.observe_cells(&w.truth, &cells, stamp);
                }
            }
            group_beliefs.push(b);
        }
        if part.len() == 1 {
            let mut p = PredState::from_views(part, &vec![true; n], &group_beliefs[0], &group_beliefs, &w.pos, w.now);
            let mut out = p.step(w, part, senses);
            out.knowledge_changed |= changed;
            self.phase = Phase::Unified(Box::new(p));
            return out;
        }

        // closest group to the base that can still reach it
        let closeness: Vec<f64> = part
            .groups
            .iter()
            .zip(&group_beliefs)
            .map(|(g, b)| match propagate_cached(&b.map, w.ctx.base) {
                Ok(f) => g.iter().map(|&a| f.value_at(w.pos[a])).fold(f64::INFINITY, f64::min),
                Err(_) => f64::INFINITY,
            })
            .collect();
        let chosen = (0..part.len())
            .min_by(|&x, &y| closeness[x].total_cmp(&closeness[y]).then(x.cmp(&y)))
            .expect("at least one group");
        let waiting_at: Vec<Point> = (0..n)
            .map(|a| {
                let r = self.initial.route_of(a);
                if r.is_empty() {
                    w.pos[a]
                } else {
                    Track {
                        path: r.clone(),
                        start: 0.0,
                    }
                    .position_at(w.now, w.ctx.speed)
                }
            })
            .collect();
        let mut s = Searching {
            searcher: (0..n).map(|a| part.group_of[a] == chosen).collect(),
            unreachable: vec![false; n],
            belief: group_beliefs[chosen].clone(),
            beliefs: (0..n).map(|a| group_beliefs[part.group_of[a]].clone()).collect(),
            waiting_at,
            target: None,
            leader: part.groups[chosen][0],
            exploring: Vec::new(),
        };
        for a in 0..n {
            if !s.searcher[a] {
                w.courses[a] = Course::hold(w.pos[a]);
            }
        }
        if !s.select(w) {
            let mut p = PredState::from_views(part, &s.searcher, &s.belief, &s.beliefs, &w.pos, w.now);
            let mut out = p.step(w, part, senses);
            out.knowledge_changed |= changed;
            self.phase = Phase::Unified(Box::new(p));
            return out;
        }
        s.pace(w);
        self.phase = Phase::Searching(Box::new(s));
        PlanStep {
            outcome: None,
            knowledge_changed: true,
        }
    }
}

impl Searching {
    /// Returns the planning step and whether nobody is left to look for.
    fn step(&mut self, w: &mut World, part: &Partition, senses: &mut Senses) -> (PlanStep, bool) {
        let n = w.n();
        let stamp = w.stamp();
        let mut changed = false;
        for a in 0..n {
            if let Some(cells) = senses.observe(a, w.pos[a], &w.truth, w.truth_fp) {
                if self.searcher[a] {
                    changed |= self.belief.observe_cells(&w.truth, &cells, stamp);
                } else {
                    self.beliefs[a].observe_cells(&w.truth, &cells, stamp);
                }
            }
        }
        let mut joined = false;
        for a in 0..n {
            if self.searcher[a] {
                continue;
            }
            let g = part.group_of[a];
            if (0..n).any(|s| self.searcher[s] && part.group_of[s] == g) {
                self.searcher[a] = true;
                self.unreachable[a] = false;
                changed |= self.belief.merge_from(&self.beliefs[a]);
                joined = true;
            }
        }
        let mut reselect = joined || changed || self.target.is_none();
        if let Some(t) = self.target {
            if !self.searcher[t] && w.courses[self.leader].finished() {
                if self.exploring.is_empty() {
                    self.unreachable[t] = true;
                } else {
                    for &e in &self.exploring {
                        if !self.searcher[e] {
                            self.unreachable[e] = true;
                        }
                    }
                }
                reselect = true;
            }
        }
        let step = PlanStep {
            outcome: None,
            knowledge_changed: changed,
        };
        if reselect && !self.select(w) {
            return (step, true);
        }
        self.pace(w);
        (step, false)
    }

    /// Picks the next agent to fetch and the searcher closest to it, and
    /// routes the searchers. Returns false when nobody is left.
    fn select(&mut self, w: &mut World) -> bool {
        let n = w.n();
        let cands: Vec<usize> = (0..n).filter(|&a| !self.searcher[a] && !self.unreachable[a]).collect();
        if cands.is_empty() {
            return false;
        }
        let searchers: Vec<usize> = (0..n).filter(|&a| self.searcher[a]).collect();
        let map = &self.belief.map;
        let fields: Vec<Option<DistanceField>> = searchers.iter().map(|&s| propagate_cached(map, w.pos[s]).ok()).collect();
        let mut best: Option<(f64, usize, usize)> = None;
        for &c in &cands {
            for (i, f) in fields.iter().enumerate() {
                let Some(f) = f else { continue };
                let v = f.value_at(self.waiting_at[c]);
                if v.is_finite() && best.is_none_or(|b| (v, c, i) < b) {
                    best = Some((v, c, i));
                }
            }
        }
        self.exploring.clear();
        if let Some((_, c, i)) = best {
            let leader = searchers[i];
            let mut path = fields[i].as_ref().expect("field").extract_path(self.waiting_at[c]).expect("finite");
            path.reverse();
            for (k, &s) in searchers.iter().enumerate() {
                let d = if s == leader {
                    AgentDirective {
                        agent: s,
                        segments: vec![seek_segment(c, path.clone())],
                    }
                } else {
                    match fields[k].as_ref().and_then(|f| f.extract_path(w.pos[leader]).ok()) {
                        Some(mut to_leader) => {
                            to_leader.reverse();
                            to_leader.extend(path.iter().skip(1));
                            AgentDirective {
                                agent: s,
                                segments: vec![seek_segment(c, to_leader)],
                            }
                        }
                        None => AgentDirective::hold(s, w.pos[s]),
                    }
                };
                w.set_directive(&d);
            }
            self.target = Some(c);
            self.leader = leader;
        } else {
            // nobody reachable: walk around the room of the nearest one
            let (_, c, leader) = cands
                .iter()
                .flat_map(|&c| searchers.iter().map(move |&s| (c, s)))
                .map(|(c, s)| (w.pos[s].dist(self.waiting_at[c]), c, s))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)))
                .expect("candidates and searchers");
            let at = self.waiting_at[c];
            let room = map.cell_of(at).filter(|&cell| map.is_free(cell)).map(|cell| free_component(map, cell));
            let targets: Vec<usize> = match &room {
                Some(r) => cands
                    .iter()
                    .copied()
                    .filter(|&o| map.cell_of(self.waiting_at[o]).is_some_and(|cell| r[map.idx(cell)]))
                    .collect(),
                None => vec![c],
            };
            let mut segs = Vec::new();
            let mut end = w.pos[leader];
            if let Ok(i) = intercept(&[at], w.pos[leader], map) {
                end = *i.path.last().expect("nonempty");
                segs.push(Segment {
                    kind: SegmentKind::Approach { targets: targets.clone() },
                    path: i.path,
                });
            }
            let tour = trapped_routine(end, map, at).map_or(vec![end], |t| t.path);
            segs.push(Segment {
                kind: SegmentKind::Explore { targets: targets.clone() },
                path: tour,
            });
            w.events.push(Event::Explore {
                agent: leader,
                targets: targets.clone(),
            });
            for &s in &searchers {
                if s == leader {
                    w.set_directive(&AgentDirective { agent: s, segments: segs.clone() });
                } else {
                    w.courses[s] = Course::hold(w.pos[s]);
                }
            }
            self.exploring = targets;
            self.target = Some(c);
            self.leader = leader;
        }
        w.events.push(Event::Searcher {
            group: searchers,
            leader: self.leader,
            target: self.target.expect("a target was just chosen"),
        });
        true
    }

    /// Followers wait while they are too close behind the leader.
    fn pace(&self, w: &mut World) {
        let mut rank = 0;
        for a in 0..w.n() {
            w.paused[a] = false;
            if self.searcher[a] && a != self.leader {
                rank += 1;
                w.paused[a] = w.pos[a].dist(w.pos[self.leader]) < LAG * rank as f64;
            }
        }
    }
}
