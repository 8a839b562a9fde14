use serde::Serialize;

use crate::effective::HomologyVector;
use crate::{Error, Result};

use super::graph::{Edge, GraphComplex};
use super::paths::{dijkstra, Weight};
use super::window::{CoverNode, CoverWindow};

const MAX_WINDOW_NODES: u128 = 50_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct StableNormEstimate {
    pub h: Vec<i64>,
    /// `(m, d(x₀, x₀ + m·h) / m)` in increasing `m`.
    pub ratios: Vec<(i64, f64)>,
    pub estimate: f64,
    /// `max_j m_{j+1}·(r_{j+1} − r_j)`, the additive constant by which the
    /// sequence fails to be non-increasing (≤ 0 when it is non-increasing).
    pub max_scaled_increase: f64,
    pub non_increasing: bool,
    /// Base edges of the minimizing path at the largest `m`.
    pub path_edges: Vec<usize>,
}

/// Window containing the basepoint and its translate by `m·h` with a margin
/// of one fundamental domain.
pub fn translate_window(base: &GraphComplex, h: &[i64], m: i64) -> Result<CoverWindow> {
    let lo: Vec<i64> = h.iter().map(|&c| (m * c).min(0) - 1).collect();
    let hi: Vec<i64> = h.iter().map(|&c| (m * c).max(0) + 1).collect();
    let cells: u128 =
        lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as u128).product::<u128>() * base.n_vertices() as u128;
    if cells > MAX_WINDOW_NODES {
        let r = h.iter().map(|c| (m * c).abs()).max().unwrap_or(0) + 1;
        return Err(Error::Window(format!(
            "translate by {m}·h needs R = {r} ({cells} nodes, limit {MAX_WINDOW_NODES})"
        )));
    }
    CoverWindow::with_bounds(base, lo, hi)
}

/// Estimates the stable norm of `h` by `d(x₀, x₀ + m·h)/m` over `m_list`,
/// using edge lengths as the metric.
pub fn stable_norm_estimate(base: &GraphComplex, h: &HomologyVector, m_list: &[i64]) -> Result<StableNormEstimate> {
    let hv: Vec<i64> = h
        .components()
        .iter()
        .map(|&c| {
            if c.fract() != 0.0 {
                Err(Error::Input("stable norm needs an integer class".into()))
            } else {
                Ok(c as i64)
            }
        })
        .collect::<Result<_>>()?;
    if hv.len() != base.k() {
        return Err(Error::Input(format!(
            "class has {} components, base has k = {}",
            hv.len(),
            base.k()
        )));
    }
    if m_list.is_empty() || m_list[0] < 1 || m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("m_list must be increasing positive integers".into()));
    }
    let mut ratios = Vec::with_capacity(m_list.len());
    let mut path_edges = Vec::new();
    for &m in m_list {
        let w = translate_window(base, &hv, m)?;
        let a = w.basepoint();
        let b = w
            .index(&CoverNode::new(0, hv.iter().map(|c| m * c).collect()))
            .expect("target inside its window");
        let sp = dijkstra(&w, a, Weight::Length, Some(b));
        let d = sp
            .distance(b)
            .ok_or_else(|| Error::Window(format!("translate by {m}·h unreachable in the window")))?;
        ratios.push((m, d / m as f64));
        path_edges = sp.path_edges(b).unwrap_or_default();
    }
    let mut max_scaled_increase = f64::NEG_INFINITY;
    for pair in ratios.windows(2) {
        max_scaled_increase = max_scaled_increase.max(pair[1].0 as f64 * (pair[1].1 - pair[0].1));
    }
    if ratios.len() < 2 {
        max_scaled_increase = 0.0;
    }
    let estimate = ratios.last().map(|r| r.1).unwrap_or(f64::NAN);
    Ok(StableNormEstimate {
        h: hv,
        non_increasing: max_scaled_increase <= 1e-9,
        ratios,
        estimate,
        max_scaled_increase,
        path_edges,
    })
}

/// Grid coordinates of a Hedlund-model vertex.
pub fn hedlund_coords(n: usize, v: usize) -> [usize; 3] {
    [v % n, (v / n) % n, v / (n * n)]
}

fn hedlund_index(n: usize, c: [usize; 3]) -> usize {
    c[0] + n * (c[1] + n * c[2])
}

/// Tube carrying the edge `tail → tail ± e_axis`, if any: tube 0 runs along x
/// at `(·, 0, 0)`, tube 1 along y at `(0, ·, 1)`, tube 2 along z at `(1, 1, ·)`.
pub fn hedlund_tube(n: usize, edge: &Edge) -> Option<usize> {
    let t = hedlund_coords(n, edge.tail);
    let h = hedlund_coords(n, edge.head);
    let axis = (0..3).find(|&a| t[a] != h[a])?;
    let on = |c: [usize; 3]| match axis {
        0 => c[1] == 0 && c[2] == 0,
        1 => c[0] == 0 && c[2] == 1,
        _ => c[0] == 1 && c[1] == 1,
    };
    (on(t) && on(h)).then_some(axis)
}

/// A three-torus grid with three cheap, pairwise disjoint closed tubes in
/// the three axis directions. Off-tube edges have `ℓ = c = 1`, tube edges
/// `ℓ = c = δ`.
pub fn hedlund_model(n: usize, delta: f64) -> Result<GraphComplex> {
    if n < 4 {
        return Err(Error::Input(format!("tubes collide for N = {n} (need N >= 4)")));
    }
    if !(delta > 0.0 && delta < 1.0 / n as f64) {
        return Err(Error::Input(format!("delta must lie in (0, 1/N), got {delta}")));
    }
    let mut edges = Vec::with_capacity(3 * n * n * n);
    for v in 0..n * n * n {
        let c = hedlund_coords(n, v);
        for axis in 0..3 {
            let mut d = c;
            d[axis] = (c[axis] + 1) % n;
            let mut z = vec![0; 3];
            if d[axis] == 0 {
                z[axis] = 1;
            }
            edges.push(Edge::new(v, hedlund_index(n, d), 1.0, 1.0, z));
        }
    }
    let mut tube_vertices = [Vec::new(), Vec::new(), Vec::new()];
    for e in edges.iter_mut() {
        if let Some(t) = hedlund_tube(n, e) {
            e.length = delta;
            e.cost = delta;
            tube_vertices[t].push(e.tail);
        }
    }
    for a in 0..3 {
        for b in a + 1..3 {
            if tube_vertices[a].iter().any(|v| tube_vertices[b].contains(v)) {
                return Err(Error::Input(format!("tubes {a} and {b} collide")));
            }
        }
    }
    GraphComplex::symmetric(n * n * n, 3, edges)
}

/// Number of tube changes along a path in the Hedlund model: the tube labels
/// of the tube edges, in order, change this many times.
pub fn tube_changes(n: usize, base: &GraphComplex, path_edges: &[usize]) -> usize {
    let labels: Vec<usize> = path_edges
        .iter()
        .filter_map(|&e| hedlund_tube(n, base.edge(e)))
        .collect();
    labels.windows(2).filter(|w| w[0] != w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::paths::shortest_path_distance;

    fn hv(c: &[f64]) -> HomologyVector {
        HomologyVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn flat_torus_norms() {
        let g = GraphComplex::flat_torus(2);
        let e = stable_norm_estimate(&g, &hv(&[1.0, 0.0]), &[1, 2, 4, 8]).unwrap();
        assert!(e.ratios.iter().all(|r| r.1 == 1.0));
        assert!(e.non_increasing);
        let d = stable_norm_estimate(&g, &hv(&[1.0, 1.0]), &[1, 3, 5]).unwrap();
        assert!(d.ratios.iter().all(|r| r.1 == 2.0));
    }

    #[test]
    fn flat_homogeneity() {
        let g = GraphComplex::flat_torus(2);
        let one = stable_norm_estimate(&g, &hv(&[2.0, -1.0]), &[1]).unwrap().estimate;
        for m in [2, 3, 5] {
            let e = stable_norm_estimate(&g, &hv(&[2.0 * m as f64, -(m as f64)]), &[1])
                .unwrap()
                .estimate;
            assert!((e / m as f64 - one).abs() <= 2.0 / m as f64);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = GraphComplex::flat_torus(2);
        assert!(stable_norm_estimate(&g, &hv(&[0.5, 0.0]), &[1]).is_err());
        assert!(stable_norm_estimate(&g, &hv(&[1.0, 0.0]), &[2, 1]).is_err());
        assert!(matches!(
            stable_norm_estimate(&GraphComplex::flat_torus(3), &hv(&[1.0, 1.0, 1.0]), &[1000]),
            Err(Error::Window(_))
        ));
    }

    #[test]
    fn hedlund_construction() {
        let g = hedlund_model(8, 0.1).unwrap();
        assert_eq!(g.n_vertices(), 512);
        assert_eq!(g.edges().len(), 2 * 3 * 512);
        let tube: Vec<_> = g.edges().iter().filter(|e| e.length == 0.1).collect();
        // three tubes of N edges each, both directions
        assert_eq!(tube.len(), 6 * 8);
        let per_unit: f64 = 8.0 * 0.1;
        assert!(per_unit < 8.0);
        assert!(hedlund_model(3, 0.1).is_err());
        assert!(hedlund_model(8, 0.2).is_err());
    }

    #[test]
    fn hedlund_translate_along_tube() {
        let g = hedlund_model(4, 0.2).unwrap();
        let w = translate_window(&g, &[1, 0, 0], 2).unwrap();
        let a = w.basepoint();
        let b = w.index(&CoverNode::new(0, vec![2, 0, 0])).unwrap();
        let d = shortest_path_distance(&w, a, b, Weight::Length).unwrap();
        assert!((d - 2.0 * 4.0 * 0.2).abs() < 1e-12);
        // exhaustive relaxation agrees with label setting
        let mut dist = vec![f64::INFINITY; w.len()];
        dist[a] = 0.0;
        loop {
            let mut changed = false;
            for i in 0..w.len() {
                if !dist[i].is_finite() {
                    continue;
                }
                for (h, e) in w.neighbors(i).collect::<Vec<_>>() {
                    let nd = dist[i] + g.edge(e).length;
                    if nd < dist[h] - 1e-15 {
                        dist[h] = nd;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sp = dijkstra(&w, a, Weight::Length, None);
        for i in 0..w.len() {
            assert!((sp.dist[i] - dist[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn hedlund_small_ratios_and_jumps() {
        let n = 4;
        let g = hedlund_model(n, 0.2).unwrap();
        let x = stable_norm_estimate(&g, &hv(&[1.0, 0.0, 0.0]), &[2, 4]).unwrap();
        let xy = stable_norm_estimate(&g, &hv(&[1.0, 1.0, 0.0]), &[2, 4]).unwrap();
        assert!((x.estimate - 0.8).abs() < 1e-12);
        assert!(xy.estimate / x.estimate < 2.0 + 2.0 / (4.0 * 0.8));
        assert!(tube_changes(n, &g, &xy.path_edges) <= 2);
        // triangle inequality of estimates
        let y = stable_norm_estimate(&g, &hv(&[0.0, 1.0, 0.0]), &[4]).unwrap();
        assert!(xy.estimate <= x.estimate + y.estimate + 4.0 * 2.0 / 4.0);
    }
}
