use crate::{Error, Result};

use super::graph::GraphComplex;

/// A node of a cover window: base vertex, lattice coordinate in `Z^k` and
/// torsion coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverNode {
    pub vertex: usize,
    pub lattice: Vec<i64>,
    pub torsion: Vec<i64>,
}

impl CoverNode {
    pub fn new(vertex: usize, lattice: Vec<i64>) -> Self {
        Self {
            vertex,
            lattice,
            torsion: Vec::new(),
        }
    }
}

/// The finite piece of the free abelian cover over a box of deck
/// translations `lo ≤ n ≤ hi`. Nodes are `(v, n)`, with an extra torsion
/// coordinate per torsion factor when torsion is tracked.
#[derive(Debug, Clone)]
pub struct CoverWindow {
    base: GraphComplex,
    lo: Vec<i64>,
    hi: Vec<i64>,
    track_torsion: bool,
    /// Extent of each coordinate axis (free axes then torsion axes).
    extents: Vec<i64>,
}

/// A cover window that keeps torsion coordinates (deck group
/// `Z^k ⊕ Z_{a_1} ⊕ … ⊕ Z_{a_p}`).
#[derive(Debug, Clone)]
pub struct TorsionedCover(pub CoverWindow);

/// Window `‖n‖_∞ ≤ R` ignoring torsion (the maximal free abelian cover).
pub fn build_cover_window(base: &GraphComplex, radius: i64) -> Result<CoverWindow> {
    if radius < 1 {
        return Err(Error::Input(format!("window radius must be >= 1, got {radius}")));
    }
    let k = base.k();
    CoverWindow::with_bounds(base, vec![-radius; k], vec![radius; k])
}

/// Window `‖n‖_∞ ≤ R` keeping torsion coordinates.
pub fn build_torsioned_cover(base: &GraphComplex, radius: i64) -> Result<TorsionedCover> {
    let mut w = build_cover_window(base, radius)?;
    w.track_torsion = true;
    w.extents.extend(base.torsion_orders());
    Ok(TorsionedCover(w))
}

impl CoverWindow {
    /// Window over the box `lo ≤ n ≤ hi` (componentwise).
    pub fn with_bounds(base: &GraphComplex, lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        let k = base.k();
        if lo.len() != k || hi.len() != k || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Input("window bounds must be k-dimensional with lo <= hi".into()));
        }
        let extents: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect();
        let w = Self {
            base: base.clone(),
            lo,
            hi,
            track_torsion: false,
            extents,
        };
        let cells: u128 = w.extents.iter().map(|&e| e as u128).product::<u128>() * base.n_vertices() as u128;
        if cells > 200_000_000 {
            return Err(Error::Window(format!("window with {cells} nodes is too large")));
        }
        Ok(w)
    }

    pub fn base(&self) -> &GraphComplex {
        &self.base
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn tracks_torsion(&self) -> bool {
        self.track_torsion
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product::<i64>() as usize * self.base.n_vertices()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(v₀, 0)` with `v₀ = 0`.
    pub fn basepoint(&self) -> usize {
        let k = self.base.k();
        let node = CoverNode {
            vertex: 0,
            lattice: vec![0; k],
            torsion: vec![0; self.torsion_dims()],
        };
        self.index(&node).expect("basepoint lies in every window")
    }

    fn torsion_dims(&self) -> usize {
        if self.track_torsion {
            self.base.torsion_orders().len()
        } else {
            0
        }
    }

    pub fn index(&self, node: &CoverNode) -> Option<usize> {
        let k = self.base.k();
        if node.vertex >= self.base.n_vertices() || node.lattice.len() != k {
            return None;
        }
        let mut idx: i64 = 0;
        for a in 0..k {
            let c = node.lattice[a];
            if c < self.lo[a] || c > self.hi[a] {
                return None;
            }
            idx = idx * self.extents[a] + (c - self.lo[a]);
        }
        for (j, &order) in self.base.torsion_orders().iter().enumerate().take(self.torsion_dims()) {
            let t = node.torsion.get(j).copied().unwrap_or(0).rem_euclid(order);
            idx = idx * order + t;
        }
        Some(idx as usize * self.base.n_vertices() + node.vertex)
    }

    pub fn node(&self, idx: usize) -> CoverNode {
        let nv = self.base.n_vertices();
        let vertex = idx % nv;
        let mut rest = (idx / nv) as i64;
        let k = self.base.k();
        let p = self.torsion_dims();
        let mut torsion = vec![0; p];
        for j in (0..p).rev() {
            let order = self.extents[k + j];
            torsion[j] = rest % order;
            rest /= order;
        }
        let mut lattice = vec![0; k];
        for a in (0..k).rev() {
            lattice[a] = rest % self.extents[a] + self.lo[a];
            rest /= self.extents[a];
        }
        CoverNode {
            vertex,
            lattice,
            torsion,
        }
    }

    /// Lattice coordinate of a node written into `out` (length `k`).
    #[inline]
    pub fn lattice_into(&self, idx: usize, out: &mut [i64]) {
        let nv = self.base.n_vertices();
        let mut rest = (idx / nv) as i64;
        let k = self.base.k();
        for j in (k..self.extents.len()).rev() {
            rest /= self.extents[j];
        }
        for a in (0..k).rev() {
            out[a] = rest % self.extents[a] + self.lo[a];
            rest /= self.extents[a];
        }
    }

    /// Head of base edge `e` lifted at node `idx`, if inside the window.
    #[inline]
    pub fn lift_edge(&self, idx: usize, e: usize) -> Option<usize> {
        let edge = self.base.edge(e);
        debug_assert_eq!(edge.tail, idx % self.base.n_vertices());
        self.shift_cell(idx, &edge.cocycle, &edge.torsion, 1, edge.head)
    }

    /// Tail of base edge `e` when the edge is lifted to end at node `idx`.
    #[inline]
    pub fn lift_edge_backward(&self, idx: usize, e: usize) -> Option<usize> {
        let edge = self.base.edge(e);
        debug_assert_eq!(edge.head, idx % self.base.n_vertices());
        self.shift_cell(idx, &edge.cocycle, &edge.torsion, -1, edge.tail)
    }

    #[inline]
    fn shift_cell(&self, idx: usize, cocycle: &[i64], torsion: &[i64], sign: i64, vertex: usize) -> Option<usize> {
        let nv = self.base.n_vertices();
        let mut cell = (idx / nv) as i64;
        // walk axes from the fastest; strides accumulate
        let mut stride: i64 = 1;
        let mut delta: i64 = 0;
        let k = self.base.k();
        let p = self.torsion_dims();
        for j in (0..p).rev() {
            let order = self.extents[k + j];
            let t = cell % order;
            cell /= order;
            let nt = (t + sign * torsion[j]).rem_euclid(order);
            delta += (nt - t) * stride;
            stride *= order;
        }
        for a in (0..k).rev() {
            let ext = self.extents[a];
            let c = cell % ext;
            cell /= ext;
            let z = sign * cocycle[a];
            if c + z < 0 || c + z >= ext {
                return None;
            }
            delta += z * stride;
            stride *= ext;
        }
        let target = (idx / nv) as i64 + delta;
        Some(target as usize * nv + vertex)
    }

    /// Incoming lifted edges `(tail, base edge)` of a node.
    pub fn in_neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let v = idx % self.base.n_vertices();
        self.base
            .in_edges(v)
            .iter()
            .filter_map(move |&e| self.lift_edge_backward(idx, e).map(|t| (t, e)))
    }

    /// Outgoing lifted edges `(head, base edge)` of a node.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let v = idx % self.base.n_vertices();
        self.base
            .out_edges(v)
            .iter()
            .filter_map(move |&e| self.lift_edge(idx, e).map(|h| (h, e)))
    }

    /// Deck translation by `s ∈ Z^k`, if the image stays in the window.
    pub fn translate(&self, idx: usize, s: &[i64]) -> Option<usize> {
        let mut node = self.node(idx);
        for (c, d) in node.lattice.iter_mut().zip(s) {
            *c += d;
        }
        self.index(&node)
    }

    /// `G((v, n)) = n` (zero vertex offset).
    pub fn g_map(&self, idx: usize) -> Vec<f64> {
        let mut n = vec![0; self.base.k()];
        self.lattice_into(idx, &mut n);
        n.into_iter().map(|c| c as f64).collect()
    }

    /// `F_ε = ε·G`.
    pub fn f_epsilon(&self, idx: usize, eps: f64) -> Vec<f64> {
        self.g_map(idx).into_iter().map(|c| eps * c).collect()
    }

    /// `‖·‖_∞` distance of a node's lattice coordinate to the window boundary
    /// (0 on the boundary layer).
    pub fn boundary_distance(&self, idx: usize) -> i64 {
        let mut n = vec![0; self.base.k()];
        self.lattice_into(idx, &mut n);
        n.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&c, (&lo, &hi))| (c - lo).min(hi - c))
            .min()
            .unwrap_or(i64::MAX)
    }

    /// Number of lifted edges inside the window.
    pub fn edge_count(&self) -> usize {
        (0..self.len()).map(|i| self.neighbors(i).count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::graph::Edge;
    use proptest::prelude::*;

    #[test]
    fn circle_window_is_a_path() {
        let w = build_cover_window(&GraphComplex::circle(), 3).unwrap();
        assert_eq!(w.len(), 7);
        // a path on 7 nodes has 6 undirected = 12 directed edges
        assert_eq!(w.edge_count(), 12);
        assert_eq!(w.g_map(w.basepoint()), vec![0.0]);
    }

    #[test]
    fn torus_window_is_a_grid() {
        let w = build_cover_window(&GraphComplex::flat_torus(2), 2).unwrap();
        assert_eq!(w.len(), 25);
        assert_eq!(w.edge_count(), 2 * 2 * 5 * 4);
        let idx = w.index(&CoverNode::new(0, vec![2, -1])).unwrap();
        assert_eq!(w.f_epsilon(idx, 0.1), vec![0.2, -0.1]);
    }

    #[test]
    fn fiber_count_formula() {
        // two 4-cycles sharing vertex 0
        let e = vec![
            Edge::new(0, 1, 1.0, 1.0, vec![1, 0]),
            Edge::new(1, 2, 1.0, 1.0, vec![0, 0]),
            Edge::new(2, 0, 1.0, 1.0, vec![0, 0]),
            Edge::new(0, 3, 1.0, 1.0, vec![0, 1]),
            Edge::new(3, 0, 1.0, 1.0, vec![0, 0]),
        ];
        let g = GraphComplex::symmetric(4, 2, e).unwrap();
        assert_eq!(build_cover_window(&g, 2).unwrap().len(), 100);
    }

    #[test]
    fn torsion_multiplies_fibers() {
        let e = vec![
            Edge::new(0, 0, 1.0, 1.0, vec![1]).with_torsion(vec![1, 0]),
            Edge::new(0, 0, 1.0, 1.0, vec![0]).with_torsion(vec![0, 1]),
        ];
        let g = GraphComplex::symmetric_with_torsion(1, 1, e, vec![2, 3]).unwrap();
        let plain = build_cover_window(&g, 2).unwrap();
        let tors = build_torsioned_cover(&g, 2).unwrap();
        assert_eq!(tors.0.len(), 6 * plain.len());
    }

    #[test]
    fn order_one_torsion_matches_plain_window() {
        let e = vec![Edge::new(0, 0, 1.0, 1.0, vec![1]).with_torsion(vec![0])];
        let g = GraphComplex::symmetric_with_torsion(1, 1, e, vec![1]).unwrap();
        let a = build_cover_window(&g, 3).unwrap();
        let b = build_torsioned_cover(&g, 3).unwrap().0;
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            let na: Vec<_> = a.neighbors(i).collect();
            let nb: Vec<_> = b.neighbors(i).collect();
            assert_eq!(na, nb);
        }
    }

    proptest! {
        #[test]
        fn index_round_trip_and_backward_lifts(r in 1i64..4, seed in 0usize..1000) {
            let g = GraphComplex::circle_with_fin(3).unwrap();
            let w = build_torsioned_cover(&g, r).unwrap().0;
            let i = seed % w.len();
            prop_assert_eq!(w.index(&w.node(i)), Some(i));
            for (h, e) in w.neighbors(i).collect::<Vec<_>>() {
                prop_assert_eq!(w.lift_edge_backward(h, e), Some(i));
            }
        }

        #[test]
        fn deck_translation_preserves_edges(x in -2i64..=2, y in -2i64..=2, sx in -1i64..=1, sy in -1i64..=1) {
            let w = build_cover_window(&GraphComplex::flat_torus(2), 3).unwrap();
            let i = w.index(&CoverNode::new(0, vec![x, y])).unwrap();
            let j = w.translate(i, &[sx, sy]).unwrap();
            let mut a: Vec<_> = w.neighbors(i).filter_map(|(h, e)| w.translate(h, &[sx, sy]).map(|t| (t, e))).collect();
            let mut b: Vec<_> = w.neighbors(j).filter(|(h, _)| w.translate(*h, &[-sx, -sy]).is_some()).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
