//! Minimum-cost agent-to-goal allocation on rectangular matrices.
//!
//! Costs are indexed `costs[agent][goal]` with at least as many agents as
//! goals. Unreachable pairs are `f64::INFINITY`; internally they become a
//! finite big-M larger than any feasible total, and a post-check rejects a
//! matching that had to use one.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("goal {goal} cannot be assigned to any agent at finite cost")]
    Infeasible { goal: usize },
    #[error("{goals} goals but only {agents} agents")]
    TooManyGoals { goals: usize, agents: usize },
    #[error("cost matrix row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("invalid cost {value} at agent {agent}, goal {goal}")]
    InvalidCost { agent: usize, goal: usize, value: f64 },
}

/// Optimal allocation. Exactly `agents - goals` agents are excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Goal of each agent, `None` for excluded agents.
    pub goal_of: Vec<Option<usize>>,
    /// Agent serving each goal.
    pub agent_of: Vec<usize>,
    pub total: f64,
}

impl Matching {
    pub fn excluded(&self) -> impl Iterator<Item = usize> + '_ {
        self.goal_of
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_none())
            .map(|(a, _)| a)
    }
}

/// Shortest augmenting path Hungarian method with potentials over the
/// sub-matrix `a[rows][cols]`, `rows.len() <= cols.len()`. Returns the total
/// and the column position assigned to each row position.
fn solve(a: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let (n, m) = (rows.len(), cols.len());
    if n == 0 {
        return (0.0, Vec::new());
    }
    let cost = |i: usize, j: usize| a[rows[i - 1]][cols[j - 1]];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            col_of[p[j] - 1] = j - 1;
        }
    }
    let total = (0..n).map(|i| a[rows[i]][cols[col_of[i]]]).sum();
    (total, col_of)
}

/// Minimum-total allocation of every goal to a distinct agent.
///
/// Among equal-cost optima the lexicographically smallest one wins: goal 0
/// takes the smallest agent compatible with an optimal total, then goal 1,
/// and so on.
pub fn hungarian(costs: &[Vec<f64>]) -> Result<Matching, AssignmentError> {
    let agents = costs.len();
    let goals = costs.first().map_or(0, Vec::len);
    for (row, r) in costs.iter().enumerate() {
        if r.len() != goals {
            return Err(AssignmentError::Ragged {
                row,
                len: r.len(),
                expected: goals,
            });
        }
        for (goal, &c) in r.iter().enumerate() {
            if c.is_nan() || c < 0.0 {
                return Err(AssignmentError::InvalidCost {
                    agent: row,
                    goal,
                    value: c,
                });
            }
        }
    }
    if goals > agents {
        return Err(AssignmentError::TooManyGoals { goals, agents });
    }
    if let Some(goal) = (0..goals).find(|&g| costs.iter().all(|r| r[g].is_infinite())) {
        return Err(AssignmentError::Infeasible { goal });
    }

    let finite_sum: f64 = costs.iter().flatten().filter(|c| c.is_finite()).sum();
    let big_m = finite_sum + 1.0;
    // goal-major copy, big-M for unreachable pairs
    let a: Vec<Vec<f64>> = (0..goals)
        .map(|g| {
            (0..agents)
                .map(|ag| {
                    let c = costs[ag][g];
                    if c.is_finite() {
                        c
                    } else {
                        big_m
                    }
                })
                .collect()
        })
        .collect();

    let all_rows: Vec<usize> = (0..goals).collect();
    let all_cols: Vec<usize> = (0..agents).collect();
    let (best, col_of) = solve(&a, &all_rows, &all_cols);
    for (g, &c) in col_of.iter().enumerate() {
        if costs[c][g].is_infinite() {
            return Err(AssignmentError::Infeasible { goal: g });
        }
    }

    let tol = 1e-9 * best.abs().max(1.0);
    let mut agent_of = Vec::with_capacity(goals);
    let mut free: Vec<usize> = all_cols.clone();
    let mut spent = 0.0;
    for g in 0..goals {
        let rest: Vec<usize> = (g + 1..goals).collect();
        let mut chosen = None;
        for (k, &ag) in free.iter().enumerate() {
            if costs[ag][g].is_infinite() {
                continue;
            }
            let mut others = free.clone();
            others.remove(k);
            let (sub, _) = solve(&a, &rest, &others);
            if spent + a[g][ag] + sub <= best + tol {
                chosen = Some(k);
                break;
            }
        }
        let k = chosen.expect("an optimal completion always exists");
        let ag = free.remove(k);
        spent += a[g][ag];
        agent_of.push(ag);
    }

    let mut goal_of = vec![None; agents];
    for (g, &ag) in agent_of.iter().enumerate() {
        goal_of[ag] = Some(g);
    }
    let total = agent_of.iter().enumerate().map(|(g, &ag)| costs[ag][g]).sum();
    Ok(Matching {
        goal_of,
        agent_of,
        total,
    })
}

/// Allocation minimising the largest single cost, then the total among
/// those: the smallest threshold at which every goal still finds an agent,
/// solved with [`hungarian`] on the pairs under it.
pub fn bottleneck(costs: &[Vec<f64>]) -> Result<Matching, AssignmentError> {
    let best = hungarian(costs)?;
    let mut levels: Vec<f64> = costs.iter().flatten().copied().filter(|c| c.is_finite()).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let capped = |t: f64| -> Vec<Vec<f64>> {
        costs
            .iter()
            .map(|r| r.iter().map(|&c| if c <= t { c } else { f64::INFINITY }).collect())
            .collect()
    };
    // the optimum's largest cost is always enough
    let top = best
        .agent_of
        .iter()
        .enumerate()
        .map(|(g, &a)| costs[a][g])
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (0, levels.partition_point(|&c| c < top));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if hungarian(&capped(levels[mid])).is_ok() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    match levels.get(lo) {
        Some(&t) => hungarian(&capped(t)),
        None => Ok(best),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_entry() {
        let m = hungarian(&[vec![5.0]]).unwrap();
        assert_eq!(m.agent_of, vec![0]);
        assert_eq!(m.total, 5.0);
    }

    #[test]
    fn diagonal_optimum() {
        let m = hungarian(&[vec![1.0, 10.0], vec![10.0, 1.0]]).unwrap();
        assert_eq!(m.agent_of, vec![0, 1]);
        assert_eq!(m.total, 2.0);
    }

    #[test]
    fn excludes_surplus_agents() {
        let m = hungarian(&[vec![9.0], vec![1.0], vec![4.0]]).unwrap();
        assert_eq!(m.goal_of, vec![None, Some(0), None]);
        assert_eq!(m.excluded().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn ties_prefer_smallest_agent() {
        let m = hungarian(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(m.agent_of, vec![0, 1]);
        let m = hungarian(&[vec![2.0, 1.0], vec![1.0, 2.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(m.total, 2.0);
        assert_eq!(m.agent_of, vec![1, 0]);
    }

    #[test]
    fn unreachable_goal_is_named() {
        let err = hungarian(&[vec![1.0, INF], vec![2.0, INF]]).unwrap_err();
        assert_eq!(err, AssignmentError::Infeasible { goal: 1 });
    }

    #[test]
    fn conflicting_goals_are_infeasible() {
        // both goals reachable only by agent 0
        let err = hungarian(&[vec![1.0, 1.0], vec![INF, INF]]).unwrap_err();
        assert!(matches!(err, AssignmentError::Infeasible { .. }));
    }

    #[test]
    fn infinite_entries_avoided() {
        let m = hungarian(&[vec![INF, 3.0], vec![1.0, INF], vec![5.0, 5.0]]).unwrap();
        assert_eq!(m.agent_of, vec![1, 0]);
        assert_eq!(m.total, 4.0);
    }

    #[test]
    fn too_many_goals() {
        assert!(matches!(
            hungarian(&[vec![1.0, 2.0]]),
            Err(AssignmentError::TooManyGoals { goals: 2, agents: 1 })
        ));
    }

    #[test]
    fn empty_goal_set() {
        let m = hungarian(&[vec![], vec![]]).unwrap();
        assert_eq!(m.total, 0.0);
        assert_eq!(m.goal_of, vec![None, None]);
    }

    #[test]
    fn bottleneck_trades_total_for_the_worst_pair() {
        // total-optimal: 0->0, 1->1 (1 + 10 = 11); bottleneck: 0->1, 1->0 (6 + 6)
        let c = vec![vec![1.0, 6.0], vec![6.0, 10.0]];
        assert_eq!(hungarian(&c).unwrap().agent_of, vec![0, 1]);
        let b = bottleneck(&c).unwrap();
        assert_eq!(b.agent_of, vec![1, 0]);
        assert_eq!(b.total, 12.0);
    }

    #[test]
    fn bottleneck_keeps_unreachable_pairs_out() {
        let c = vec![vec![INF, 3.0], vec![2.0, INF], vec![1.0, 9.0]];
        let b = bottleneck(&c).unwrap();
        assert_eq!(b.agent_of, vec![2, 0]);
        assert!(bottleneck(&[vec![INF], vec![INF]]).is_err());
    }
}
