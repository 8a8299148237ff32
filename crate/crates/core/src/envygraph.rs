//! Envy graphs over agents, cycle elimination by bundle rotation, and
//! topological ordering.
//!
//! Two edge rules are supported. The standard rule draws an edge `i -> j`
//! when `i` strictly prefers `j`'s bundle to her own. The socially aware
//! rule additionally requires that `i` would generate at least as much
//! social impact as `j` does from holding that bundle.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvyKind {
    Standard,
    SociallyAware,
}

#[derive(Debug, Clone)]
pub struct EnvyGraph {
    n: usize,
    kind: EnvyKind,
    adj: Vec<BTreeSet<usize>>,
}

/// Builds the envy graph of an allocation under the chosen edge rule.
pub fn build(instance: &Instance, allocation: &Allocation, kind: EnvyKind) -> Result<EnvyGraph> {
    allocation.validate_for(instance)?;
    let n = instance.agents();
    let own_value: Vec<_> = (0..n)
        .map(|i| instance.agent_value(i, allocation.bundle(i)))
        .collect::<Result<Vec<_>>>()?;
    let own_impact: Vec<_> = (0..n)
        .map(|j| instance.agent_impact(j, allocation.bundle(j)))
        .collect::<Result<Vec<_>>>()?;
    let mut adj = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let envies = own_value[i] < instance.agent_value(i, allocation.bundle(j))?;
            let edge = match kind {
                EnvyKind::Standard => envies,
                EnvyKind::SociallyAware => {
                    envies && instance.agent_impact(i, allocation.bundle(j))? >= own_impact[j]
                }
            };
            if edge {
                adj[i].insert(j);
            }
        }
    }
    Ok(EnvyGraph { n, kind, adj })
}

impl EnvyGraph {
    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> EnvyKind {
        self.kind
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adj[from].contains(&to)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
    }

    /// Agents that no one envies (no incoming edge), ascending.
    pub fn sources(&self) -> Vec<usize> {
        let mut envied = vec![false; self.n];
        for (_, j) in self.edges() {
            envied[j] = true;
        }
        (0..self.n).filter(|&j| !envied[j]).collect()
    }

    /// First cycle found by depth-first search from the lowest-index node,
    /// visiting neighbours in ascending order. Returned as the node sequence
    /// along the cycle, starting from the node the back edge closes on.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Gray,
            Black,
        }
        let mut mark = vec![Mark::White; self.n];
        let mut stack: Vec<usize> = Vec::new();

        fn dfs(
            node: usize,
            adj: &[BTreeSet<usize>],
            mark: &mut [Mark],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            mark[node] = Mark::Gray;
            stack.push(node);
            for &next in &adj[node] {
                match mark[next] {
                    Mark::Gray => {
                        let start = stack.iter().position(|&x| x == next).expect("on stack");
                        return Some(stack[start..].to_vec());
                    }
                    Mark::White => {
                        if let Some(cycle) = dfs(next, adj, mark, stack) {
                            return Some(cycle);
                        }
                    }
                    Mark::Black => {}
                }
            }
            stack.pop();
            mark[node] = Mark::Black;
            None
        }

        for start in 0..self.n {
            if mark[start] == Mark::White {
                if let Some(cycle) = dfs(start, &self.adj, &mut mark, &mut stack) {
                    return Some(cycle);
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Lexicographically smallest topological order, or `None` on a cycle.
    /// Every edge points from an earlier to a later position, so an agent
    /// may only envy agents coming afterward.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indegree = vec![0usize; self.n];
        for (_, j) in self.edges() {
            indegree[j] += 1;
        }
        let mut ready: BTreeSet<usize> =
            (0..self.n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(&next) = ready.iter().next() {
            ready.remove(&next);
            order.push(next);
            for &j in &self.adj[next] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        if order.len() == self.n {
            Some(order)
        } else {
            None
        }
    }

    /// Adjacency lists for debugging output.
    pub fn to_adjacency(&self) -> Vec<Vec<usize>> {
        self.adj.iter().map(|out| out.iter().copied().collect()).collect()
    }
}

/// Rotates bundles along one cycle of the graph: every agent on the cycle
/// receives the bundle of the agent she envies (her successor). Agents off
/// the cycle keep their bundles. Errors if the graph is acyclic.
pub fn cycle_elimination(
    instance: &Instance,
    allocation: &Allocation,
    graph: &EnvyGraph,
) -> Result<Allocation> {
    allocation.validate_for(instance)?;
    let cycle = graph.find_cycle().ok_or(Error::NoCycle)?;
    let mut bundles: Vec<BTreeSet<usize>> = allocation.bundles().to_vec();
    for (pos, &agent) in cycle.iter().enumerate() {
        let successor = cycle[(pos + 1) % cycle.len()];
        bundles[agent] = allocation.bundle(successor).clone();
    }
    Ok(Allocation::set_bundles(bundles))
}

/// Repeats cycle elimination until the envy graph of the allocation is
/// acyclic. Terminates because every rotation strictly increases the sum of
/// the agents' own values over a finite set of bundle permutations.
pub fn acyclify(instance: &Instance, allocation: &Allocation, kind: EnvyKind) -> Result<Allocation> {
    let mut current = allocation.clone();
    loop {
        let graph = build(instance, &current, kind)?;
        if graph.is_acyclic() {
            return Ok(current);
        }
        current = cycle_elimination(instance, &current, &graph)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_u64, Rational};

    fn inst(v: &[&[u64]], s: &[&[u64]]) -> Instance {
        let conv = |rows: &[&[u64]]| {
            rows.iter()
                .map(|r| r.iter().map(|&x| rat_u64(x)).collect::<Vec<Rational>>())
                .collect()
        };
        Instance::new(conv(v), conv(s)).unwrap()
    }

    fn alloc(bundles: &[&[usize]]) -> Allocation {
        Allocation::new(bundles.iter().map(|b| b.iter().copied().collect()).collect()).unwrap()
    }

    #[test]
    fn empty_bundles_have_no_edges() {
        let i = inst(&[&[1], &[1]], &[&[0], &[0]]);
        let g = build(&i, &alloc(&[&[], &[]]), EnvyKind::Standard).unwrap();
        assert_eq!(g.edges().count(), 0);
    }

    #[test]
    fn agent_without_good_envies_holder() {
        let i = inst(&[&[2], &[3]], &[&[0], &[0]]);
        let g = build(&i, &alloc(&[&[], &[0]]), EnvyKind::Standard).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
    }

    #[test]
    fn sa_edge_suppressed_when_holder_impacts_more() {
        let i = inst(&[&[2], &[2]], &[&[1], &[5]]);
        let a = alloc(&[&[], &[0]]);
        let standard = build(&i, &a, EnvyKind::Standard).unwrap();
        assert!(standard.has_edge(0, 1));
        let sa = build(&i, &a, EnvyKind::SociallyAware).unwrap();
        assert!(!sa.has_edge(0, 1), "s_0(A_1) = 1 < 5 = s_1(A_1)");
    }

    #[test]
    fn two_cycle_swap_improves_both() {
        // v_0: own 1, other's 2; v_1: own 1, other's 2
        let i = inst(&[&[1, 2], &[2, 1]], &[&[0, 0], &[0, 0]]);
        let a = alloc(&[&[0], &[1]]);
        let g = build(&i, &a, EnvyKind::Standard).unwrap();
        let rotated = cycle_elimination(&i, &a, &g).unwrap();
        assert_eq!(rotated, alloc(&[&[1], &[0]]));
        for agent in 0..2 {
            let before = i.agent_value(agent, a.bundle(agent)).unwrap();
            let after = i.agent_value(agent, rotated.bundle(agent)).unwrap();
            assert!(after > before);
        }
    }

    #[test]
    fn three_cycle_rotates_and_strictly_improves() {
        // agent k holds good k and prefers good k+1 (mod 3)
        let i = inst(
            &[&[1, 5, 0], &[0, 1, 5], &[5, 0, 1]],
            &[&[0; 3], &[0; 3], &[0; 3]],
        );
        let a = alloc(&[&[0], &[1], &[2]]);
        let g = build(&i, &a, EnvyKind::Standard).unwrap();
        assert!(!g.is_acyclic());
        let rotated = cycle_elimination(&i, &a, &g).unwrap();
        for agent in 0..3 {
            let before = i.agent_value(agent, a.bundle(agent)).unwrap();
            let after = i.agent_value(agent, rotated.bundle(agent)).unwrap();
            assert!(after > before, "agent {agent} must strictly gain");
        }
        // bundle multiset preserved
        let mut before: Vec<_> = a.bundles().to_vec();
        let mut after: Vec<_> = rotated.bundles().to_vec();
        before.sort();
        after.sort();
        assert_eq!(before, after);
    }

    #[test]
    fn cycle_elimination_needs_a_cycle() {
        let i = inst(&[&[1], &[1]], &[&[0], &[0]]);
        let a = alloc(&[&[0], &[]]);
        let g = build(&i, &a, EnvyKind::Standard).unwrap();
        assert!(matches!(cycle_elimination(&i, &a, &g), Err(Error::NoCycle)));
    }

    #[test]
    fn acyclify_identity_on_acyclic_input() {
        let i = inst(&[&[1, 1], &[1, 1]], &[&[0; 2], &[0; 2]]);
        let a = alloc(&[&[0], &[1]]);
        assert_eq!(acyclify(&i, &a, EnvyKind::Standard).unwrap(), a);
    }

    #[test]
    fn acyclify_two_cycle_is_one_swap() {
        let i = inst(&[&[1, 2], &[2, 1]], &[&[0; 2], &[0; 2]]);
        let a = alloc(&[&[0], &[1]]);
        let fixed = acyclify(&i, &a, EnvyKind::Standard).unwrap();
        assert_eq!(fixed, alloc(&[&[1], &[0]]));
        assert!(build(&i, &fixed, EnvyKind::Standard).unwrap().is_acyclic());
    }

    #[test]
    fn topological_order_examples() {
        let i = inst(&[&[1, 1], &[1, 1]], &[&[0; 2], &[0; 2]]);
        let edgeless = build(&i, &alloc(&[&[0], &[1]]), EnvyKind::Standard).unwrap();
        assert_eq!(edgeless.topological_order(), Some(vec![0, 1]));

        // single edge 1 -> 0
        let j = inst(&[&[1], &[2]], &[&[0], &[0]]);
        let g = build(&j, &alloc(&[&[0], &[]]), EnvyKind::Standard).unwrap();
        assert!(g.has_edge(1, 0));
        assert_eq!(g.topological_order(), Some(vec![1, 0]));

        let k = inst(&[&[1, 2], &[2, 1]], &[&[0; 2], &[0; 2]]);
        let cyc = build(&k, &alloc(&[&[0], &[1]]), EnvyKind::Standard).unwrap();
        assert_eq!(cyc.topological_order(), None);
    }
}
