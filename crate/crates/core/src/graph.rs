//! Matching graph for bit-flip decoding: one node per Z check plus a single
//! merged boundary node, one unit-weight edge per data qubit.

use std::collections::VecDeque;

use crate::code_model::CodeSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub qubit: usize,
}

#[derive(Clone, Debug)]
pub struct DetectionGraph {
    num_checks: usize,
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
    // parent[src][v] = edge used to reach v on the BFS tree rooted at src
    parent: Vec<Vec<usize>>,
}

const NO_EDGE: usize = usize::MAX;

impl DetectionGraph {
    pub fn new(code: &CodeSpec) -> Self {
        let m = code.num_checks();
        let boundary = m;
        let incidence = code.z_incidence();
        let mut edges = Vec::with_capacity(code.n);
        for (qubit, checks) in incidence.iter().enumerate() {
            let (a, b) = match checks.as_slice() {
                [a] => (*a, boundary),
                [a, b] => (*a, *b),
                // a qubit outside every Z check never flips a syndrome bit
                [] => (boundary, boundary),
                more => panic!("qubit {qubit} lies in {} Z checks", more.len()),
            };
            edges.push(GraphEdge { a, b, qubit });
        }
        let mut adjacency = vec![Vec::new(); m + 1];
        for (i, e) in edges.iter().enumerate() {
            if e.a != e.b {
                adjacency[e.a].push(i);
                adjacency[e.b].push(i);
            }
        }
        let mut dist = Vec::with_capacity(m + 1);
        let mut parent = Vec::with_capacity(m + 1);
        for src in 0..=m {
            let (d, p) = bfs(src, &edges, &adjacency);
            dist.push(d);
            parent.push(p);
        }
        Self { num_checks: m, edges, adjacency, dist, parent }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_checks + 1
    }

    pub fn boundary(&self) -> usize {
        self.num_checks
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = &GraphEdge> {
        self.adjacency[node].iter().map(move |&i| &self.edges[i])
    }

    /// Shortest-path length in qubits; `u32::MAX` if disconnected.
    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.dist[a][b]
    }

    /// Qubits along one shortest path from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut qubits = Vec::new();
        let mut v = b;
        while v != a {
            let e = self.parent[a][v];
            assert!(e != NO_EDGE, "no path between {a} and {b}");
            let edge = &self.edges[e];
            qubits.push(edge.qubit);
            v = if edge.a == v { edge.b } else { edge.a };
        }
        qubits
    }
}

fn bfs(src: usize, edges: &[GraphEdge], adjacency: &[Vec<usize>]) -> (Vec<u32>, Vec<usize>) {
    let n = adjacency.len();
    let mut dist = vec![u32::MAX; n];
    let mut parent = vec![NO_EDGE; n];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &e in &adjacency[u] {
            let v = if edges[e].a == u { edges[e].b } else { edges[e].a };
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                parent[v] = e;
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{build_rotated, build_unrotated};

    #[test]
    fn one_edge_per_qubit() {
        for code in [build_rotated(5).unwrap(), build_unrotated(4).unwrap()] {
            let g = DetectionGraph::new(&code);
            assert_eq!(g.edges().len(), code.n);
            let mut q: Vec<usize> = g.edges().iter().map(|e| e.qubit).collect();
            q.sort_unstable();
            assert_eq!(q, (0..code.n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn rotated_corner_touches_boundary() {
        let code = build_rotated(3).unwrap();
        let g = DetectionGraph::new(&code);
        let corner = &g.edges()[0];
        assert_eq!(corner.qubit, 0);
        assert!(corner.a == g.boundary() || corner.b == g.boundary());
    }

    #[test]
    fn adjacent_checks_at_distance_one() {
        let code = build_unrotated(3).unwrap();
        let g = DetectionGraph::new(&code);
        let inc = code.z_incidence();
        let shared = inc.iter().find(|c| c.len() == 2).unwrap();
        assert_eq!(g.distance(shared[0], shared[1]), 1);
    }

    #[test]
    fn triangle_inequality_and_paths() {
        let code = build_unrotated(4).unwrap();
        let g = DetectionGraph::new(&code);
        let n = g.num_nodes();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(g.distance(a, b), g.distance(b, a));
                assert_eq!(g.path(a, b).len() as u32, g.distance(a, b));
                for c in 0..n {
                    assert!(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c));
                }
            }
        }
    }
}
