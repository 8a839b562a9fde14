use std::fmt::Write as _;
use std::io::BufRead;

use crate::{Error, Result};

/// A directed edge with metric length, action cost and integer cocycle values.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    pub cost: f64,
    /// Free part of the cocycle, one entry per generator of `Z^k`.
    pub cocycle: Vec<i64>,
    /// Torsion part, one entry per torsion factor (reduced mod its order).
    pub torsion: Vec<i64>,
}

impl Edge {
    pub fn new(tail: usize, head: usize, length: f64, cost: f64, cocycle: Vec<i64>) -> Self {
        Self {
            tail,
            head,
            length,
            cost,
            cocycle,
            torsion: Vec::new(),
        }
    }

    pub fn with_torsion(mut self, torsion: Vec<i64>) -> Self {
        self.torsion = torsion;
        self
    }

    /// The reversed edge: same length and cost, negated cocycle.
    pub fn reversed(&self) -> Self {
        Self {
            tail: self.head,
            head: self.tail,
            length: self.length,
            cost: self.cost,
            cocycle: self.cocycle.iter().map(|z| -z).collect(),
            torsion: self.torsion.iter().map(|z| -z).collect(),
        }
    }
}

/// A finite weighted graph standing in for a closed manifold, with an integer
/// cocycle basis of its first cohomology.
#[derive(Debug, Clone)]
pub struct GraphComplex {
    n_vertices: usize,
    k: usize,
    edges: Vec<Edge>,
    reverse_closed: bool,
    torsion_orders: Vec<i64>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl GraphComplex {
    /// Validates and builds a complex. With `reverse_closed`, every edge must
    /// have a reverse partner with equal length and cost and negated cocycle.
    pub fn new(n_vertices: usize, k: usize, edges: Vec<Edge>, reverse_closed: bool) -> Result<Self> {
        Self::with_torsion(n_vertices, k, edges, reverse_closed, Vec::new())
    }

    /// Like [`GraphComplex::new`] with torsion factors `Z_{a_1} ⊕ … ⊕ Z_{a_p}`.
    pub fn with_torsion(
        n_vertices: usize,
        k: usize,
        mut edges: Vec<Edge>,
        reverse_closed: bool,
        torsion_orders: Vec<i64>,
    ) -> Result<Self> {
        if n_vertices == 0 || edges.is_empty() {
            return Err(Error::Input("graph needs vertices and edges".into()));
        }
        if torsion_orders.iter().any(|&a| a < 1) {
            return Err(Error::Input("torsion orders must be positive".into()));
        }
        let p = torsion_orders.len();
        for (i, e) in edges.iter_mut().enumerate() {
            if e.tail >= n_vertices || e.head >= n_vertices {
                return Err(Error::Input(format!("edge {i} references a missing vertex")));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::Input(format!("edge {i} has non-positive length {}", e.length)));
            }
            if !e.cost.is_finite() {
                return Err(Error::Input(format!("edge {i} has non-finite cost")));
            }
            if e.cocycle.len() != k {
                return Err(Error::Input(format!(
                    "edge {i} has {} cocycle entries, expected {k}",
                    e.cocycle.len()
                )));
            }
            if e.torsion.is_empty() {
                e.torsion = vec![0; p];
            }
            if e.torsion.len() != p {
                return Err(Error::Input(format!("edge {i} has wrong torsion arity")));
            }
            for (t, &a) in e.torsion.iter_mut().zip(&torsion_orders) {
                *t = t.rem_euclid(a);
            }
        }
        let mut out_edges = vec![Vec::new(); n_vertices];
        let mut in_edges = vec![Vec::new(); n_vertices];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.tail].push(i);
            in_edges[e.head].push(i);
        }
        let g = Self {
            n_vertices,
            k,
            edges,
            reverse_closed,
            torsion_orders,
            out_edges,
            in_edges,
        };
        if reverse_closed {
            g.check_reverse_closure()?;
        }
        if !g.is_strongly_connected() {
            return Err(Error::Input("graph is not strongly connected".into()));
        }
        Ok(g)
    }

    /// Adds the reverse of every edge, then builds the complex.
    pub fn symmetric(n_vertices: usize, k: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::symmetric_with_torsion(n_vertices, k, edges, Vec::new())
    }

    pub fn symmetric_with_torsion(
        n_vertices: usize,
        k: usize,
        edges: Vec<Edge>,
        torsion_orders: Vec<i64>,
    ) -> Result<Self> {
        let mut all = Vec::with_capacity(2 * edges.len());
        for e in edges {
            let r = e.reversed();
            all.push(e);
            all.push(r);
        }
        Self::with_torsion(n_vertices, k, all, true, torsion_orders)
    }

    fn check_reverse_closure(&self) -> Result<()> {
        let mut used = vec![false; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if used[i] {
                continue;
            }
            let partner = self.out_edges[e.head].iter().copied().find(|&j| {
                let r = &self.edges[j];
                !used[j]
                    && j != i
                    && r.head == e.tail
                    && r.length == e.length
                    && r.cost == e.cost
                    && r.cocycle.iter().zip(&e.cocycle).all(|(a, b)| *a == -*b)
                    && r.torsion
                        .iter()
                        .zip(&e.torsion)
                        .zip(&self.torsion_orders)
                        .all(|((a, b), m)| (a + b).rem_euclid(*m) == 0)
            });
            // a loop with zero cocycle is its own reverse
            let self_reverse =
                e.head == e.tail && e.cocycle.iter().all(|&z| z == 0) && e.torsion.iter().all(|&z| z == 0);
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None if self_reverse => used[i] = true,
                None => {
                    return Err(Error::Input(format!(
                        "edge {i} ({} -> {}) has no reverse partner",
                        e.tail, e.head
                    )))
                }
            }
        }
        Ok(())
    }

    fn is_strongly_connected(&self) -> bool {
        let reach = |adj: &dyn Fn(usize) -> Vec<usize>| -> bool {
            let mut seen = vec![false; self.n_vertices];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for w in adj(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(&|v| self.out_edges[v].iter().map(|&e| self.edges[e].head).collect())
            && reach(&|v| self.in_edges[v].iter().map(|&e| self.edges[e].tail).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Rank of the free part of the deck group.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn is_reverse_closed(&self) -> bool {
        self.reverse_closed
    }

    pub fn torsion_orders(&self) -> &[i64] {
        &self.torsion_orders
    }

    /// `max_e ‖z(e)‖_∞`.
    pub fn max_cocycle(&self) -> i64 {
        self.edges
            .iter()
            .flat_map(|e| e.cocycle.iter().map(|z| z.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Same complex with the given costs replaced edge by edge.
    pub fn with_costs(&self, costs: &[f64]) -> Result<Self> {
        if costs.len() != self.edges.len() {
            return Err(Error::Input("one cost per edge required".into()));
        }
        let mut edges = self.edges.clone();
        for (e, &c) in edges.iter_mut().zip(costs) {
            e.cost = c;
        }
        Self::with_torsion(
            self.n_vertices,
            self.k,
            edges,
            self.reverse_closed,
            self.torsion_orders.clone(),
        )
    }

    /// One vertex with a single loop of length and cost 1, cocycle 1.
    pub fn circle() -> Self {
        Self::symmetric(1, 1, vec![Edge::new(0, 0, 1.0, 1.0, vec![1])]).expect("valid circle")
    }

    /// One vertex with one unit loop per axis of `Z^k`.
    pub fn flat_torus(k: usize) -> Self {
        let edges = (0..k)
            .map(|i| {
                let mut z = vec![0; k];
                z[i] = 1;
                Edge::new(0, 0, 1.0, 1.0, z)
            })
            .collect();
        Self::symmetric(1, k, edges).expect("valid torus")
    }

    /// A circle (free loop) with a fin: a side loop through a second vertex that
    /// carries the generator of `Z_order`. Deck group `Z ⊕ Z_order`.
    pub fn circle_with_fin(order: i64) -> Result<Self> {
        let edges = vec![
            Edge::new(0, 0, 1.0, 1.0, vec![1]).with_torsion(vec![0]),
            Edge::new(0, 1, 0.5, 0.5, vec![0]).with_torsion(vec![1]),
            Edge::new(1, 0, 0.5, 0.5, vec![0]).with_torsion(vec![0]),
        ];
        Self::symmetric_with_torsion(2, 1, edges, vec![order])
    }

    /// Parses the text format: line 1 `k |V| |E| [symmetric]`, then `|E|` lines
    /// `tail head length cost z_1 … z_k`. Blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim().to_string();
            if !body.is_empty() {
                rows.push((i + 1, body));
            }
        }
        let (hline, header) = rows.first().cloned().ok_or(Error::Parse {
            line: 0,
            msg: "empty graph file".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        if fields.len() < 3 || fields.len() > 4 {
            return Err(perr(hline, "header must be `k |V| |E| [symmetric]`"));
        }
        let k: usize = fields[0].parse().map_err(|_| perr(hline, "bad k"))?;
        let nv: usize = fields[1].parse().map_err(|_| perr(hline, "bad |V|"))?;
        let ne: usize = fields[2].parse().map_err(|_| perr(hline, "bad |E|"))?;
        let symmetric = match fields.get(3) {
            None => false,
            Some(&"symmetric") => true,
            Some(other) => return Err(perr(hline, &format!("unknown flag `{other}`"))),
        };
        if rows.len() - 1 != ne {
            return Err(perr(
                hline,
                &format!("header announces {ne} edges, found {}", rows.len() - 1),
            ));
        }
        let mut edges = Vec::with_capacity(ne);
        for (line, body) in &rows[1..] {
            let f: Vec<&str> = body.split_whitespace().collect();
            if f.len() != 4 + k {
                return Err(perr(*line, &format!("expected {} fields", 4 + k)));
            }
            let tail = f[0].parse().map_err(|_| perr(*line, "bad tail"))?;
            let head = f[1].parse().map_err(|_| perr(*line, "bad head"))?;
            let length = f[2].parse().map_err(|_| perr(*line, "bad length"))?;
            let cost = f[3].parse().map_err(|_| perr(*line, "bad cost"))?;
            let z = f[4..]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|_| perr(*line, "bad cocycle entry")))
                .collect::<Result<Vec<_>>>()?;
            edges.push(Edge::new(tail, head, length, cost, z));
        }
        if symmetric {
            Self::symmetric(nv, k, edges)
        } else {
            let closed = {
                // reverse closure is detected, not required, for plain files
                Self::new(nv, k, edges.clone(), true).is_ok()
            };
            Self::new(nv, k, edges, closed)
        }
    }

    /// Writes the text format (all edges, no `symmetric` flag).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {}", self.k, self.n_vertices, self.edges.len()).unwrap();
        for e in &self.edges {
            write!(s, "{} {} {} {}", e.tail, e.head, e.length, e.cost).unwrap();
            for z in &e.cocycle {
                write!(s, " {z}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_symmetric_file() {
        let text = "# two loops\n1 1 2 symmetric\n0 0 1 1 1\n0 0 1 1 -1\n";
        let g = GraphComplex::parse(text.as_bytes()).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert!(g.is_reverse_closed());
        let back = GraphComplex::parse(g.to_text().as_bytes()).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert!(back.is_reverse_closed());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "1 2 1\n0 1 1 1\n";
        match GraphComplex::parse(text.as_bytes()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_disconnected_and_bad_lengths() {
        let e = vec![Edge::new(0, 0, 1.0, 1.0, vec![1])];
        assert!(GraphComplex::symmetric(2, 1, e).is_err());
        let e = vec![Edge::new(0, 0, 0.0, 1.0, vec![1])];
        assert!(GraphComplex::symmetric(1, 1, e).is_err());
    }

    #[test]
    fn reverse_closure_is_checked() {
        let e = vec![Edge::new(0, 1, 1.0, 1.0, vec![1]), Edge::new(1, 0, 1.0, 2.0, vec![-1])];
        assert!(GraphComplex::new(2, 1, e.clone(), true).is_err());
        assert!(GraphComplex::new(2, 1, e, false).is_ok());
    }

    #[test]
    fn fin_model_shape() {
        let g = GraphComplex::circle_with_fin(4).unwrap();
        assert_eq!(g.torsion_orders(), &[4]);
        assert_eq!(g.edges().len(), 6);
        assert_eq!(g.edges()[3].torsion, vec![3]);
    }
}
