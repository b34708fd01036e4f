use super::los::clear_segment;
use super::{AgentState, GridMap};
use crate::geom::Point;

/// Undirected communication graph over a list of nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    adj: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Nodes reachable from `start`, `start` included.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Breadth-first node path from `from` to `to`, if connected.
    pub fn route(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.adj.len()];
        let mut queue = std::collections::VecDeque::from([from]);
        prev[from] = from;
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut route = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    route.push(cur);
                }
                route.reverse();
                return Some(route);
            }
            for &v in &self.adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Two nodes can talk when within `c_range` of each other with a clear line
/// of sight.
pub fn linked(map: &GridMap, a: Point, b: Point, c_range: f64) -> bool {
    a.dist(b) <= c_range
        && map.cell_of(a).is_some()
        && map.cell_of(b).is_some()
        && clear_segment(map, a, b)
}

/// Communication graph over `nodes` (agents and the base station alike).
pub fn comm_graph(nodes: &[Point], map: &GridMap, c_range: f64) -> CommGraph {
    let mut adj = vec![Vec::new(); nodes.len()];
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if linked(map, nodes[i], nodes[j], c_range) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    CommGraph { adj }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Agents split into connected groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Member lists, each sorted, ordered by lowest member.
    pub groups: Vec<Vec<usize>>,
    /// Index into `groups` for every agent.
    pub group_of: Vec<usize>,
}

impl Partition {
    pub fn from_groups(mut groups: Vec<Vec<usize>>, n: usize) -> Self {
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort_unstable_by_key(|g| g[0]);
        let mut group_of = vec![usize::MAX; n];
        for (gi, g) in groups.iter().enumerate() {
            for &a in g {
                group_of[a] = gi;
            }
        }
        Partition { groups, group_of }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Group identifier, the lowest member agent id.
    pub fn group_id(&self, gi: usize) -> usize {
        self.groups[gi][0]
    }
}

/// Partition of agents into connected components of the communication graph
/// restricted to agents (the base station never joins or bridges a group).
pub fn partition_positions(positions: &[Point], map: &GridMap, c_range: f64) -> Partition {
    let n = positions.len();
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if linked(map, positions[i], positions[j], c_range) {
                ds.union(i, j);
            }
        }
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = ds.find(i);
        by_root[r].push(i);
    }
    Partition::from_groups(by_root.into_iter().filter(|g| !g.is_empty()).collect(), n)
}

/// Groups of `agents` (indexed by `AgentState::id`) on `map`.
pub fn connected_groups(agents: &[AgentState], map: &GridMap, c_range: f64) -> Partition {
    let positions: Vec<Point> = agents.iter().map(|a| a.position).collect();
    partition_positions(&positions, map, c_range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Region;

    #[test]
    fn range_and_sight() {
        let mut m = GridMap::new(60, 20, 1.0);
        let (a, b) = (Point::new(5.0, 5.0), Point::new(34.0, 5.0));
        assert!(comm_graph(&[a, b], &m, 30.0).has_edge(0, 1));
        m.fill_walls(Region::new(20, 0, 20, 19)).unwrap();
        assert!(!comm_graph(&[a, b], &m, 30.0).has_edge(0, 1));
    }

    #[test]
    fn line_of_agents_is_a_path_graph() {
        let m = GridMap::new(200, 10, 1.0);
        let nodes: Vec<Point> = (0..7).map(|i| Point::new(5.0 + 30.0 * i as f64, 5.0)).collect();
        let g = comm_graph(&nodes, &m, 30.0);
        assert_eq!(g.edge_count(), 6);
        for i in 0..6 {
            assert!(g.has_edge(i, i + 1));
        }
    }

    #[test]
    fn isolated_and_complete() {
        let m = GridMap::new(200, 200, 1.0);
        let far: Vec<Point> = (0..5).map(|i| Point::new(40.0 * i as f64, 0.0)).collect();
        assert_eq!(partition_positions(&far, &m, 30.0).len(), 5);
        let near: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 3.0)).collect();
        let p = partition_positions(&near, &m, 30.0);
        assert_eq!(p.groups, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn groups_ordered_by_lowest_member() {
        let m = GridMap::new(200, 10, 1.0);
        let pos = [
            Point::new(100.0, 5.0),
            Point::new(0.0, 5.0),
            Point::new(105.0, 5.0),
            Point::new(3.0, 5.0),
        ];
        let p = partition_positions(&pos, &m, 30.0);
        assert_eq!(p.groups, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(p.group_of, vec![0, 1, 0, 1]);
    }
}
