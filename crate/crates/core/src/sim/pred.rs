//! The prediction strategy: every group keeps its own view of the world,
//! replans when it learns something and intercepts mis-informed neighbours.

use super::engine::{PlanStep, Senses, World};
use super::record::{Event, Outcome};
use crate::chain::TeamPlan;
use crate::coordination::{group_plan, merge_groups, GroupView, Role, SegmentKind, Track};
use crate::geom::Point;
use crate::world::{Belief, GridMap, Partition};

/// How long past its predicted arrival an intercepted agent is waited for.
const WAIT_SLACK: f64 = 4.0;
/// Explorations an agent may set out on for the same targets before they are
/// given up.
const EXPLORE_LIMIT: usize = 2;

pub(crate) struct PredState {
    views: Vec<GroupView>,
    /// Fingerprint of the map each view last planned on.
    planned_on: Vec<Option<u64>>,
    part: Partition,
    /// Agents that neither plan nor move unless an active group absorbs them.
    passive: Vec<bool>,
    /// Per agent, the intercepts of its directive with the time after which
    /// the target is given up.
    meetings: Vec<Vec<(usize, f64)>>,
    /// Agent waiting at a meeting point for (target, until).
    waiting: Vec<Option<(usize, f64)>>,
    /// Per agent, explorations started for each target set.
    explores: Vec<Vec<(Vec<usize>, usize)>>,
}

impl PredState {
    /// Every group starts from the shared initial map and plan.
    pub(crate) fn from_initial(map: &GridMap, plan: &TeamPlan, part: &Partition, pos: &[Point]) -> Self {
        let n = pos.len();
        let tracks: Vec<Track> = (0..n)
            .map(|a| {
                let r = plan.route_of(a);
                if r.is_empty() {
                    Track::stationary(pos[a], 0.0)
                } else {
                    Track {
                        path: r.clone(),
                        start: 0.0,
                    }
                }
            })
            .collect();
        let fp = map.fingerprint();
        let views = part
            .groups
            .iter()
            .map(|g| {
                let mut v = GroupView::new(g.clone(), Belief::new(map.clone()), tracks.clone());
                v.own_plan = Some(plan.clone());
                v.chain_order = plan.chain_order();
                v
            })
            .collect();
        PredState {
            planned_on: vec![Some(fp); part.len()],
            views,
            part: part.clone(),
            passive: vec![false; n],
            meetings: vec![Vec::new(); n],
            waiting: vec![None; n],
            explores: vec![Vec::new(); n],
        }
    }

    /// Groups taking over after a search: one view per group of `part`.
    /// Agents in `active` share `belief`; the others keep their own maps,
    /// hold and are marked lost by the active groups.
    pub(crate) fn from_views(
        part: &Partition,
        active: &[bool],
        belief: &Belief,
        others: &[Belief],
        pos: &[Point],
        now: f64,
    ) -> Self {
        let n = pos.len();
        let tracks: Vec<Track> = pos.iter().map(|&p| Track::stationary(p, now)).collect();
        let views = part
            .groups
            .iter()
            .map(|g| {
                let b = if g.iter().any(|&a| active[a]) {
                    belief.clone()
                } else {
                    others[g[0]].clone()
                };
                let mut v = GroupView::new(g.clone(), b, tracks.clone());
                for a in 0..n {
                    v.lost[a] = !active[a];
                }
                v
            })
            .collect();
        PredState {
            views,
            planned_on: vec![None; part.len()],
            part: part.clone(),
            passive: active.iter().map(|&x| !x).collect(),
            meetings: vec![Vec::new(); n],
            waiting: vec![None; n],
            explores: vec![Vec::new(); n],
        }
    }

    /// Breaks a detected cycle: the group closest to the base keeps its plan
    /// and stops intercepting; the others replan around it.
    pub(crate) fn fix_cycle(&mut self, w: &mut World) {
        let Some(k) = (0..self.views.len())
            .filter(|&k| !self.views[k].members.iter().all(|&a| self.passive[a]))
            .min_by_key(|&k| (self.views[k].chain_rank, self.views[k].members[0]))
        else {
            return;
        };
        for (i, v) in self.views.iter_mut().enumerate() {
            v.frozen = i == k;
            self.planned_on[i] = None;
            v.own_plan = if i == k { v.own_plan.take() } else { None };
        }
        // the frozen group replans once without intercepting
        self.views[k].own_plan = None;
        w.events.push(Event::CycleFix {
            frozen: self.views[k].members.clone(),
        });
    }

    pub(crate) fn step(&mut self, w: &mut World, part: &Partition, senses: &mut Senses) -> PlanStep {
        let n = w.n();
        let stamp = w.stamp();

        // sensing, into the groups the agents belonged to
        let mut sensed = vec![false; self.views.len()];
        for a in 0..n {
            if let Some(cells) = senses.observe(a, w.pos[a], &w.truth, w.truth_fp) {
                let g = self.part.group_of[a];
                sensed[g] |= self.views[g].belief.observe_cells(&w.truth, &cells, stamp);
            }
        }
        let mut knowledge_changed = sensed.iter().any(|&c| c);

        // merges and splits
        let mut changed = Vec::with_capacity(part.len());
        let mut membership = Vec::with_capacity(part.len());
        if *part != self.part {
            let mut views = Vec::with_capacity(part.len());
            let mut planned_on = Vec::with_capacity(part.len());
            for g in &part.groups {
                let mut sources: Vec<usize> = g.iter().map(|&a| self.part.group_of[a]).collect();
                sources.sort_unstable();
                sources.dedup();
                if sources.len() == 1 && self.views[sources[0]].members == *g {
                    views.push(self.views[sources[0]].clone());
                    planned_on.push(self.planned_on[sources[0]]);
                    changed.push(sensed[sources[0]]);
                    membership.push(false);
                    continue;
                }
                let parts: Vec<GroupView> = sources
                    .iter()
                    .map(|&s| {
                        let keep: Vec<usize> = g.iter().copied().filter(|&a| self.part.group_of[a] == s).collect();
                        self.views[s].restrict(keep, |a| Track {
                            path: w.courses[a].remaining(w.pos[a]),
                            start: w.now,
                        })
                    })
                    .collect();
                let mut v = parts[0].clone();
                for p in &parts[1..] {
                    v = merge_groups(&v, p);
                }
                let merged_new = parts.iter().any(|p| p.belief.map.cells() != v.belief.map.cells());
                knowledge_changed |= merged_new;
                changed.push(sources.iter().any(|&s| sensed[s]) || merged_new);
                planned_on.push(if v.own_plan.is_some() { self.planned_on[sources[0]] } else { None });
                // a split alone teaches nothing: the parted teammates follow
                // the plan both sides know
                membership.push(sources.len() > 1);
                if g.iter().any(|&a| !self.passive[a]) {
                    for &a in g {
                        self.passive[a] = false;
                    }
                }
                views.push(v);
            }
            self.views = views;
            self.planned_on = planned_on;
            self.part = part.clone();
        } else {
            changed = sensed;
            membership = vec![false; part.len()];
        }

        // replanning
        for k in 0..self.views.len() {
            if self.views[k].members.iter().all(|&a| self.passive[a]) {
                continue;
            }
            let members = self.views[k].members.clone();
            let mut flagged = false;
            let mut gone: Vec<usize> = Vec::new();
            for &a in &members {
                let m = &w.moved[a];
                flagged |= m.collided;
                for (kind, _) in &m.completed {
                    match kind {
                        SegmentKind::Intercept { target, role } if !self.views[k].is_member(*target) => {
                            let until = self.meetings[a]
                                .iter()
                                .find(|(t, _)| t == target)
                                .map_or(w.now, |&(_, u)| u);
                            if *role != Role::Seek && until > w.now {
                                self.waiting[a] = Some((*target, until));
                            } else {
                                gone.push(*target);
                            }
                        }
                        SegmentKind::Explore { targets } => {
                            gone.extend(targets.iter().copied().filter(|&t| !self.views[k].is_member(t)));
                            flagged = true;
                        }
                        _ => {}
                    }
                }
                for (targets, count) in &self.explores[a] {
                    if *count >= EXPLORE_LIMIT {
                        gone.extend(targets.iter().copied().filter(|&t| !self.views[k].is_member(t)));
                    }
                }
                if let Some((target, until)) = self.waiting[a] {
                    if self.views[k].is_member(target) {
                        self.waiting[a] = None;
                    } else if w.now + 1e-9 >= until {
                        self.waiting[a] = None;
                        gone.push(target);
                    } else {
                        w.paused[a] = true;
                    }
                }
            }
            gone.sort_unstable();
            gone.dedup();
            gone.retain(|&t| !self.views[k].lost[t]);
            if !gone.is_empty() {
                for &t in &gone {
                    self.views[k].lost[t] = true;
                }
                w.events.push(Event::Lost {
                    group: members.clone(),
                    agents: gone,
                });
                flagged = true;
            }
            let v = &self.views[k];
            let needed = changed[k] || membership[k] || flagged || v.own_plan.is_none();
            if !needed || (v.concluded.is_some() && !changed[k] && !membership[k]) {
                continue;
            }
            let fp = v.belief.map.fingerprint();
            let before = v.clone();
            let was_concluded = v.concluded;
            let out = group_plan(&mut self.views[k], &w.pos, w.now, &w.ctx);
            let plain_before = members.iter().all(|&a| w.courses[a].is_plain());
            let keep = !flagged
                && !changed[k]
                && self.planned_on[k] == Some(fp)
                && plain_before
                && out.directives.iter().all(|d| d.is_plain());
            let v = &self.views[k];
            w.events.push(Event::Replan {
                group: members.clone(),
                predictions: out.stats.predictions,
                believed_groups: out.stats.groups,
                intercepts: out.stats.intercepts,
                mismatches: out.mismatches.clone(),
                feasible: v.own_plan.as_ref().is_some_and(|p| p.feasible),
                applied: !keep,
            });
            if keep {
                self.views[k] = before;
                continue;
            }
            self.planned_on[k] = Some(fp);
            if let (None, Some(reason)) = (was_concluded, v.concluded) {
                w.events.push(Event::Concluded {
                    group: members.clone(),
                    reason,
                });
            }
            for d in &out.directives {
                let a = d.agent;
                // an exploration already under way continues unless it ran
                // into something
                if let (Some(new), Some(SegmentKind::Explore { targets })) = (d.explores(), w.courses[a].current()) {
                    if new == targets.as_slice() && !w.moved[a].collided {
                        continue;
                    }
                }
                let old: Vec<(usize, Role)> = w.courses[a]
                    .pending()
                    .iter()
                    .filter_map(|s| match s.kind {
                        SegmentKind::Intercept { target, role } => Some((target, role)),
                        _ => None,
                    })
                    .collect();
                for (target, role) in d.intercepts() {
                    if !old.contains(&(target, role)) {
                        w.events.push(Event::Intercept { agent: a, target, role });
                    }
                }
                if let Some(t) = d.explores() {
                    if w.courses[a].pending().iter().all(|s| !matches!(&s.kind, SegmentKind::Explore { targets } if targets == t)) {
                        w.events.push(Event::Explore {
                            agent: a,
                            targets: t.to_vec(),
                        });
                        match self.explores[a].iter_mut().find(|(ts, _)| ts == t) {
                            Some((_, count)) => *count += 1,
                            None => self.explores[a].push((t.to_vec(), 1)),
                        }
                    }
                }
                self.waiting[a] = None;
                self.meetings[a] = d
                    .segments
                    .iter()
                    .filter_map(|seg| match seg.kind {
                        SegmentKind::Intercept { target, .. } => {
                            let at = *seg.path.last().expect("nonempty");
                            let eta = self.views[k].tracks[target].arrival(at, w.ctx.speed).unwrap_or(w.now);
                            Some((target, eta.max(w.now) + WAIT_SLACK))
                        }
                        _ => None,
                    })
                    .collect();
                w.set_directive(d);
            }
        }

        let active: Vec<&GroupView> = self
            .views
            .iter()
            .filter(|v| v.members.iter().any(|&a| !self.passive[a]))
            .collect();
        let outcome = if !active.is_empty() && active.iter().all(|v| v.concluded.is_some()) {
            Some(Outcome::Infeasible(active[0].concluded.expect("concluded")))
        } else {
            None
        };
        PlanStep {
            outcome,
            knowledge_changed,
        }
    }
}
