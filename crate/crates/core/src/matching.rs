//! Exact maximum-weight bipartite matching over rational weights.
//!
//! The matcher is used by the identical-valuations bundle assignment, the
//! agent-copy matching construction, and the distinct-representatives
//! feasibility check. Missing edges are genuinely absent (not zero weight):
//! perfect-matching feasibility respects adjacency.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A weighted bipartite graph with `left` and `right` node counts and a
/// sparse edge list. Duplicate `(left, right)` pairs are rejected; weights
/// must be non-negative.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    edges: BTreeMap<(usize, usize), Rational>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph { left, right, edges: BTreeMap::new() }
    }

    pub fn add_edge(&mut self, left: usize, right: usize, weight: Rational) -> Result<()> {
        if left >= self.left || right >= self.right {
            return Err(Error::InvalidInput(format!(
                "edge ({left}, {right}) out of range for a {}x{} graph",
                self.left, self.right
            )));
        }
        if weight < Rational::zero() {
            return Err(Error::InvalidInput("edge weights must be non-negative".into()));
        }
        if self.edges.insert((left, right), weight).is_some() {
            return Err(Error::InvalidInput(format!("duplicate edge ({left}, {right})")));
        }
        Ok(())
    }

    pub fn left_count(&self) -> usize {
        self.left
    }

    pub fn right_count(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.edges.iter().map(|(&(l, r), w)| (l, r, w))
    }

    pub fn weight(&self, left: usize, right: usize) -> Option<&Rational> {
        self.edges.get(&(left, right))
    }

    /// Right neighbours of a left node, ascending.
    fn neighbours(&self, left: usize) -> Vec<usize> {
        self.edges
            .range((left, 0)..=(left, self.right.max(1) - 1))
            .map(|(&(_, r), _)| r)
            .collect()
    }

    pub fn degree_of_left(&self, left: usize) -> usize {
        self.neighbours(left).len()
    }

    pub fn degree_of_right(&self, right: usize) -> usize {
        self.edges.keys().filter(|&&(_, r)| r == right).count()
    }
}

/// Minimum-cost perfect matching by shortest augmenting paths with
/// potentials, over `Option` costs (`None` = missing edge). Returns the
/// column matched to each row, or `None` when no perfect matching exists.
fn min_cost_perfect(costs: &[Vec<Option<Rational>>]) -> Option<Vec<usize>> {
    let t = costs.len();
    if t == 0 {
        return Some(Vec::new());
    }
    // 1-indexed arrays; row/column 0 is the virtual start node.
    let mut u = vec![Rational::zero(); t + 1];
    let mut v = vec![Rational::zero(); t + 1];
    let mut p = vec![0usize; t + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; t + 1];
    for i in 1..=t {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<Rational>> = vec![None; t + 1];
        let mut used = vec![false; t + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Rational> = None;
            let mut j1 = 0usize;
            for j in 1..=t {
                if used[j] {
                    continue;
                }
                if let Some(c) = &costs[i0 - 1][j - 1] {
                    let cur = c - &u[i0] - &v[j];
                    let better = match &minv[j] {
                        None => true,
                        Some(old) => cur < *old,
                    };
                    if better {
                        minv[j] = Some(cur);
                        way[j] = j0;
                    }
                }
                if let Some(mv) = &minv[j] {
                    let take = match &delta {
                        None => true,
                        Some(d) => mv < d,
                    };
                    if take {
                        delta = Some(mv.clone());
                        j1 = j;
                    }
                }
            }
            let delta = delta?; // some row is unreachable: no perfect matching
            for j in 0..=t {
                if used[j] {
                    u[p[j]] = &u[p[j]] + &delta;
                    v[j] = &v[j] - &delta;
                } else if let Some(mv) = &mut minv[j] {
                    *mv = &*mv - &delta;
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
    let mut matched = vec![usize::MAX; t];
    for j in 1..=t {
        matched[p[j] - 1] = j - 1;
    }
    Some(matched)
}

/// Max-weight value of a perfect matching on an equal-sided subgraph given
/// by `rows` and `cols` index lists, or `None` when infeasible.
fn optimal_value(graph: &BipartiteGraph, rows: &[usize], cols: &[usize]) -> Option<Rational> {
    debug_assert_eq!(rows.len(), cols.len());
    let t = rows.len();
    let max_w = graph
        .edges
        .values()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let costs: Vec<Vec<Option<Rational>>> = rows
        .iter()
        .map(|&l| {
            cols.iter()
                .map(|&r| graph.weight(l, r).map(|w| &max_w - w))
                .collect()
        })
        .collect();
    let matched = min_cost_perfect(&costs)?;
    let mut total = Rational::zero();
    for (li, &ci) in matched.iter().enumerate() {
        total += graph.weight(rows[li], cols[ci]).expect("matched edge exists");
    }
    Some(total)
}

/// Maximum-weight perfect matching. Requires equal side sizes. Returns the
/// right node matched to each left node plus the total weight, or `None`
/// when the graph admits no perfect matching. Among maximum-weight
/// matchings, the lexicographically smallest right-node vector is returned.
pub fn max_weight_perfect_matching(
    graph: &BipartiteGraph,
) -> Option<(Vec<usize>, Rational)> {
    assert_eq!(
        graph.left,
        graph.right,
        "perfect matching needs equal side sizes"
    );
    let t = graph.left;
    let all: Vec<usize> = (0..t).collect();
    let best = optimal_value(graph, &all, &all)?;

    // Fix left nodes one at a time to the smallest right node that still
    // allows completing an optimal matching.
    let mut chosen = vec![usize::MAX; t];
    let mut used = vec![false; t];
    let mut fixed_weight = Rational::zero();
    for l in 0..t {
        let rows: Vec<usize> = (l + 1..t).collect();
        let mut committed = false;
        for r in graph.neighbours(l) {
            if used[r] {
                continue;
            }
            let cols: Vec<usize> = (0..t).filter(|&c| !used[c] && c != r).collect();
            let w = graph.weight(l, r).expect("neighbour edge");
            if let Some(rest) = optimal_value(graph, &rows, &cols) {
                if &fixed_weight + w + &rest == best {
                    chosen[l] = r;
                    used[r] = true;
                    fixed_weight += w;
                    committed = true;
                    break;
                }
            }
        }
        debug_assert!(committed || t == 0, "optimal matching must be completable");
        if !committed {
            return None;
        }
    }
    Some((chosen, best))
}

/// Maximum-weight assignment for a square non-negative matrix `w[l][r]`.
/// Returns the permutation maximizing the trace sum and its total weight.
/// Ties resolve to the lexicographically smallest permutation (identity when
/// all weights are equal).
pub fn max_weight_assignment(weights: &[Vec<Rational>]) -> Result<(Vec<usize>, Rational)> {
    let t = weights.len();
    if weights.iter().any(|row| row.len() != t) {
        return Err(Error::InvalidInput("assignment matrix must be square".into()));
    }
    let mut graph = BipartiteGraph::new(t, t);
    for (l, row) in weights.iter().enumerate() {
        for (r, w) in row.iter().enumerate() {
            graph.add_edge(l, r, w.clone())?;
        }
    }
    Ok(max_weight_perfect_matching(&graph).expect("complete graph has a perfect matching"))
}

/// True iff the smaller side can be perfectly matched into the larger
/// (maximum-cardinality test via augmenting paths).
pub fn has_perfect_matching(graph: &BipartiteGraph) -> bool {
    let (small, large, adj): (usize, usize, Vec<Vec<usize>>) = if graph.left <= graph.right {
        let adj = (0..graph.left).map(|l| graph.neighbours(l)).collect();
        (graph.left, graph.right, adj)
    } else {
        let mut adj = vec![Vec::new(); graph.right];
        for (&(l, r), _) in &graph.edges {
            adj[r].push(l);
        }
        (graph.right, graph.left, adj)
    };

    fn augment(
        node: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        matched_large: &mut [Option<usize>],
    ) -> bool {
        for &other in &adj[node] {
            if seen[other] {
                continue;
            }
            seen[other] = true;
            match matched_large[other] {
                None => {
                    matched_large[other] = Some(node);
                    return true;
                }
                Some(prev) => {
                    if augment(prev, adj, seen, matched_large) {
                        matched_large[other] = Some(node);
                        return true;
                    }
                }
            }
        }
        false
    }

    let mut matched_large: Vec<Option<usize>> = vec![None; large];
    let mut size = 0;
    for node in 0..small {
        let mut seen = vec![false; large];
        if augment(node, &adj, &mut seen, &mut matched_large) {
            size += 1;
        }
    }
    size == small
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_u64;

    fn graph_from(left: usize, right: usize, edges: &[(usize, usize, u64)]) -> BipartiteGraph {
        let mut g = BipartiteGraph::new(left, right);
        for &(l, r, w) in edges {
            g.add_edge(l, r, rat_u64(w)).unwrap();
        }
        g
    }

    /// Brute-force maximum over all perfect matchings (left side order).
    fn enumerate_best(g: &BipartiteGraph) -> Option<(Vec<usize>, Rational)> {
        let t = g.left_count();
        let mut perm: Vec<usize> = (0..t).collect();
        let mut best: Option<(Vec<usize>, Rational)> = None;
        permute(&mut perm, 0, &mut |p| {
            let mut total = Rational::zero();
            for (l, &r) in p.iter().enumerate() {
                match g.weight(l, r) {
                    Some(w) => total += w,
                    None => return,
                }
            }
            let replace = match &best {
                None => true,
                Some((bp, bw)) => total > *bw || (total == *bw && p < bp.as_slice()),
            };
            if replace {
                best = Some((p.to_vec(), total));
            }
        });
        best
    }

    fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, visit);
            perm.swap(k, i);
        }
    }

    #[test]
    fn one_by_one() {
        let g = graph_from(1, 1, &[(0, 0, 5)]);
        let (m, w) = max_weight_perfect_matching(&g).unwrap();
        assert_eq!(m, vec![0]);
        assert_eq!(w, rat_u64(5));
    }

    #[test]
    fn two_by_two_crosswise() {
        let (m, w) = max_weight_assignment(&[
            vec![rat_u64(1), rat_u64(2)],
            vec![rat_u64(3), rat_u64(1)],
        ])
        .unwrap();
        assert_eq!(m, vec![1, 0]);
        assert_eq!(w, rat_u64(5));
    }

    #[test]
    fn identity_dominant_diagonal() {
        let (m, _) = max_weight_assignment(&[
            vec![rat_u64(9), rat_u64(1), rat_u64(1)],
            vec![rat_u64(1), rat_u64(9), rat_u64(1)],
            vec![rat_u64(1), rat_u64(1), rat_u64(9)],
        ])
        .unwrap();
        assert_eq!(m, vec![0, 1, 2]);
    }

    #[test]
    fn all_equal_breaks_ties_to_identity() {
        let (m, w) = max_weight_assignment(&[
            vec![rat_u64(4); 3],
            vec![rat_u64(4); 3],
            vec![rat_u64(4); 3],
        ])
        .unwrap();
        assert_eq!(m, vec![0, 1, 2]);
        assert_eq!(w, rat_u64(12));
    }

    #[test]
    fn three_by_three_matches_enumeration() {
        let g = graph_from(
            3,
            3,
            &[
                (0, 0, 2), (0, 1, 7), (0, 2, 1),
                (1, 0, 4), (1, 1, 4), (1, 2, 9),
                (2, 0, 3), (2, 1, 8), (2, 2, 5),
            ],
        );
        let got = max_weight_perfect_matching(&g).unwrap();
        let want = enumerate_best(&g).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn sparse_infeasible_graph_is_absent() {
        // left 1 has no edge: no perfect matching regardless of weights
        let g = graph_from(2, 2, &[(0, 0, 3), (0, 1, 4)]);
        assert!(max_weight_perfect_matching(&g).is_none());
        assert!(!has_perfect_matching(&g));
    }

    #[test]
    fn adjacency_is_respected_not_zero_weight() {
        // forced through a light edge because the heavy column is shared
        let g = graph_from(2, 2, &[(0, 0, 10), (1, 0, 10), (1, 1, 1)]);
        let (m, w) = max_weight_perfect_matching(&g).unwrap();
        assert_eq!(m, vec![0, 1]);
        assert_eq!(w, rat_u64(11));
    }

    #[test]
    fn d_regular_graphs_always_match() {
        for n in 1..6usize {
            for d in 1..=n {
                let mut g = BipartiteGraph::new(n, n);
                for l in 0..n {
                    for shift in 0..d {
                        g.add_edge(l, (l + shift) % n, rat_u64(((l + shift) % 7) as u64))
                            .unwrap();
                    }
                }
                assert!(has_perfect_matching(&g), "{n} nodes, {d}-regular");
                assert!(max_weight_perfect_matching(&g).is_some());
            }
        }
    }

    #[test]
    fn empty_graph_has_perfect_matching() {
        let g = BipartiteGraph::new(0, 0);
        assert!(has_perfect_matching(&g));
        let (m, w) = max_weight_perfect_matching(&g).unwrap();
        assert!(m.is_empty());
        assert_eq!(w, rat_u64(0));
    }

    #[test]
    fn star_cannot_match_three_into_one() {
        let g = graph_from(3, 1, &[(0, 0, 1), (1, 0, 1), (2, 0, 1)]);
        assert!(!has_perfect_matching(&g));
    }

    #[test]
    fn matching_weight_recomputes() {
        let g = graph_from(4, 4, &[
            (0, 1, 3), (0, 2, 1),
            (1, 0, 2), (1, 3, 8),
            (2, 2, 5), (2, 1, 2),
            (3, 0, 7), (3, 3, 2),
        ]);
        if let Some((m, w)) = max_weight_perfect_matching(&g) {
            let recomputed: Rational = m
                .iter()
                .enumerate()
                .map(|(l, &r)| g.weight(l, r).unwrap().clone())
                .sum();
            assert_eq!(recomputed, w);
            let mut seen = std::collections::BTreeSet::new();
            assert!(m.iter().all(|&r| seen.insert(r)), "matching must be a bijection");
        } else {
            panic!("graph has a perfect matching");
        }
    }

    #[test]
    fn rejects_duplicate_edges_and_bad_indices() {
        let mut g = BipartiteGraph::new(1, 1);
        g.add_edge(0, 0, rat_u64(1)).unwrap();
        assert!(g.add_edge(0, 0, rat_u64(2)).is_err());
        assert!(g.add_edge(0, 1, rat_u64(2)).is_err());
    }
}
