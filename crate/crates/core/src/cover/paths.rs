use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::window::CoverWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    Length,
    Cost,
}

impl Weight {
    pub fn of(self, edge: &super::graph::Edge) -> f64 {
        match self {
            Weight::Length => edge.length,
            Weight::Cost => edge.cost,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths on a cover window.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    /// `(predecessor node, base edge)` of each reached node.
    pub pred: Vec<Option<(u32, u32)>>,
}

impl ShortestPaths {
    pub fn distance(&self, target: usize) -> Option<f64> {
        let d = self.dist[target];
        d.is_finite().then_some(d)
    }

    /// Base edges of the shortest path to `target`, in order from the source.
    pub fn path_edges(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut edges = Vec::new();
        let mut cur = target;
        while cur != self.source {
            let (p, e) = self.pred[cur]?;
            edges.push(e as usize);
            cur = p as usize;
        }
        edges.reverse();
        Some(edges)
    }

    /// Nodes visited by the path to `target`, source first.
    pub fn path_nodes(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut nodes = vec![target];
        let mut cur = target;
        while cur != self.source {
            cur = self.pred[cur]?.0 as usize;
            nodes.push(cur);
        }
        nodes.reverse();
        Some(nodes)
    }
}

/// Label-setting shortest paths from `source`; stops as soon as `stop_at` is
/// settled when given.
pub fn dijkstra(window: &CoverWindow, source: usize, weight: Weight, stop_at: Option<usize>) -> ShortestPaths {
    let n = window.len();
    let base = window.base();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if Some(node) == stop_at {
            break;
        }
        for (head, e) in window.neighbors(node) {
            let nd = d + weight.of(base.edge(e));
            if nd < dist[head] {
                dist[head] = nd;
                pred[head] = Some((node as u32, e as u32));
                heap.push(Entry { dist: nd, node: head });
            }
        }
    }
    ShortestPaths { source, dist, pred }
}

/// Exact shortest-path value between two window nodes.
pub fn shortest_path_distance(window: &CoverWindow, a: usize, b: usize, weight: Weight) -> Result<f64> {
    if a >= window.len() || b >= window.len() {
        return Err(Error::Input("node outside the window".into()));
    }
    dijkstra(window, a, weight, Some(b))
        .distance(b)
        .ok_or_else(|| Error::Window(format!("node {b} unreachable from {a} inside the window")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::graph::{Edge, GraphComplex};
    use crate::cover::window::{build_cover_window, CoverNode};
    use proptest::prelude::*;

    #[test]
    fn circle_distance() {
        let w = build_cover_window(&GraphComplex::circle(), 6).unwrap();
        let a = w.index(&CoverNode::new(0, vec![0])).unwrap();
        let b = w.index(&CoverNode::new(0, vec![5])).unwrap();
        assert_eq!(shortest_path_distance(&w, a, b, Weight::Length).unwrap(), 5.0);
    }

    #[test]
    fn torus_distance_is_l1() {
        let w = build_cover_window(&GraphComplex::flat_torus(2), 5).unwrap();
        let a = w.basepoint();
        let sp = dijkstra(&w, a, Weight::Length, None);
        for i in 0..w.len() {
            let n = w.node(i).lattice;
            assert_eq!(sp.dist[i], (n[0].abs() + n[1].abs()) as f64);
        }
        let b = w.index(&CoverNode::new(0, vec![3, 4])).unwrap();
        assert_eq!(shortest_path_distance(&w, a, b, Weight::Length).unwrap(), 7.0);
    }

    #[test]
    fn unreachable_is_a_window_error() {
        // one-directional loop: nodes to the left are unreachable
        let g = GraphComplex::new(1, 1, vec![Edge::new(0, 0, 1.0, 1.0, vec![1])], false).unwrap();
        let w = build_cover_window(&g, 2).unwrap();
        let a = w.basepoint();
        let b = w.index(&CoverNode::new(0, vec![-1])).unwrap();
        assert!(matches!(
            shortest_path_distance(&w, a, b, Weight::Length),
            Err(Error::Window(_))
        ));
        let c = w.index(&CoverNode::new(0, vec![2])).unwrap();
        assert_eq!(shortest_path_distance(&w, a, c, Weight::Length).unwrap(), 2.0);
    }

    #[test]
    fn cocycle_sum_along_path_equals_g() {
        let g = GraphComplex::circle_with_fin(4).unwrap();
        let w = build_cover_window(&g, 3).unwrap();
        let sp = dijkstra(&w, w.basepoint(), Weight::Cost, None);
        for i in 0..w.len() {
            let edges = sp.path_edges(i).unwrap();
            let sum: i64 = edges.iter().map(|&e| g.edge(e).cocycle[0]).sum();
            assert_eq!(sum as f64, w.g_map(i)[0]);
            assert_eq!(sp.path_nodes(i).unwrap().len(), edges.len() + 1);
        }
    }

    fn all_path_sums(w: &CoverWindow, from: usize, to: usize, max_len: usize) -> Vec<Vec<i64>> {
        let k = w.base().k();
        let mut out = Vec::new();
        let mut stack = vec![(from, vec![0i64; k], 0usize)];
        while let Some((node, sum, len)) = stack.pop() {
            if node == to && len > 0 {
                out.push(sum.clone());
            }
            if len == max_len {
                continue;
            }
            for (h, e) in w.neighbors(node) {
                let mut s = sum.clone();
                for (a, z) in s.iter_mut().zip(&w.base().edge(e).cocycle) {
                    *a += z;
                }
                stack.push((h, s, len + 1));
            }
        }
        out
    }

    #[test]
    fn path_sums_are_path_independent() {
        let e = vec![
            Edge::new(0, 0, 1.0, 1.0, vec![1, 0]),
            Edge::new(0, 1, 1.0, 1.0, vec![0, 1]),
            Edge::new(1, 2, 1.0, 1.0, vec![0, 0]),
            Edge::new(2, 0, 1.0, 1.0, vec![0, 0]),
        ];
        let g = GraphComplex::symmetric(3, 2, e).unwrap();
        let w = build_cover_window(&g, 2).unwrap();
        assert!(w.len() <= 200);
        let a = w.basepoint();
        for target in [
            w.index(&CoverNode::new(2, vec![1, 1])).unwrap(),
            w.index(&CoverNode::new(1, vec![-1, 0])).unwrap(),
        ] {
            let sums = all_path_sums(&w, a, target, 6);
            assert!(sums.len() >= 2);
            let g_val: Vec<i64> = w.g_map(target).iter().map(|&c| c as i64).collect();
            assert!(sums.iter().all(|s| *s == g_val));
        }
    }

    proptest! {
        #[test]
        fn distances_are_deck_invariant(x in -1i64..=1, y in -1i64..=1, sx in -1i64..=1, sy in -1i64..=1, v in 0usize..3) {
            let e = vec![
                Edge::new(0, 0, 0.9, 1.0, vec![1, 0]),
                Edge::new(0, 1, 0.7, 1.0, vec![0, 1]),
                Edge::new(1, 2, 1.3, 1.0, vec![0, 0]),
                Edge::new(2, 0, 0.4, 1.0, vec![0, 0]),
            ];
            let g = GraphComplex::symmetric(3, 2, e).unwrap();
            let w = build_cover_window(&g, 6).unwrap();
            let a = w.index(&CoverNode::new(0, vec![0, 0])).unwrap();
            let b = w.index(&CoverNode::new(v, vec![x, y])).unwrap();
            let d1 = shortest_path_distance(&w, a, b, Weight::Length).unwrap();
            let d2 = shortest_path_distance(&w, w.translate(a, &[sx, sy]).unwrap(), w.translate(b, &[sx, sy]).unwrap(), Weight::Length).unwrap();
            let back = shortest_path_distance(&w, b, a, Weight::Length).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-12);
            prop_assert!((d1 - back).abs() < 1e-12);
        }
    }
}
