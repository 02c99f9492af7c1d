use std::collections::{BTreeSet, VecDeque};

use super::{FiniteMetricSpace, MetricError, Rational};

/// An undirected simple graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    /// Edges are stored as `(min, max)`; duplicates collapse.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, MetricError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(MetricError::IndexOutOfRange(a.max(b)));
            }
            if a == b {
                return Err(MetricError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(SimpleGraph { n, edges: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn bfs(&self, adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(&self.adjacency(), 0).iter().all(Option::is_some)
    }
}

/// Shortest-path hop distance of a connected graph.
pub fn graph_to_metric(g: &SimpleGraph) -> Result<FiniteMetricSpace, MetricError> {
    let adj = g.adjacency();
    let mut lower = Vec::with_capacity(g.n * g.n.saturating_sub(1) / 2);
    for i in 0..g.n {
        let dist = g.bfs(&adj, i);
        for d in &dist[..i] {
            match d {
                Some(d) => lower.push(Rational::integer(*d as i64)),
                None => return Err(MetricError::DisconnectedGraph),
            }
        }
    }
    if g.n > 0 && !g.is_connected() {
        return Err(MetricError::DisconnectedGraph);
    }
    Ok(FiniteMetricSpace::from_lower_unchecked(g.n, lower))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::integer(v)).collect())
            .collect()
    }

    #[test]
    fn triangle_is_equilateral() {
        let g = SimpleGraph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            graph_to_metric(&g).unwrap().to_matrix(),
            ints(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]])
        );
    }

    #[test]
    fn path_metric() {
        let g = SimpleGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            graph_to_metric(&g).unwrap().to_matrix(),
            ints(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]])
        );
    }

    #[test]
    fn four_cycle() {
        let g = SimpleGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let s = graph_to_metric(&g).unwrap();
        s.check_metric().unwrap();
        assert_eq!(
            s.to_matrix(),
            ints(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]])
        );
    }

    #[test]
    fn disconnected_and_loops() {
        let g = SimpleGraph::new(3, &[(0, 1)]).unwrap();
        assert_eq!(graph_to_metric(&g), Err(MetricError::DisconnectedGraph));
        assert_eq!(
            SimpleGraph::new(2, &[(1, 1)]),
            Err(MetricError::SelfLoop(1))
        );
    }
}
