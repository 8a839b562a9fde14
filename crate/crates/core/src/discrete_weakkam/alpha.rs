use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{Edge, GraphComplex};
use crate::effective::{AlphaMethod, AlphaTable};
use crate::lattice::LatticeBox;
use crate::{Error, Result};

/// `α(P)` together with a cycle realizing it.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteAlphaResult {
    pub p: Vec<f64>,
    pub alpha: f64,
    /// Edge indices of the certifying cycle, in traversal order.
    pub cycle: Vec<usize>,
    /// `Σ(P·z − c) / Σℓ` over the cycle.
    pub cycle_mean: f64,
    pub method: AlphaMethod,
    pub iterations: usize,
}

pub(crate) fn pz(p: &[f64], e: &Edge) -> f64 {
    p.iter().zip(&e.cocycle).map(|(a, &z)| a * z as f64).sum()
}

/// Edge weight `c − P·z + k·ℓ`.
pub(crate) fn weight(p: &[f64], k: f64, e: &Edge) -> f64 {
    e.cost - pz(p, e) + k * e.length
}

pub(crate) fn cycle_ratio(base: &GraphComplex, p: &[f64], cycle: &[usize]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &e in cycle {
        let edge = base.edge(e);
        num += pz(p, edge) - edge.cost;
        den += edge.length;
    }
    num / den
}

/// Label-correcting pass structure from `sources` (all at 0; every vertex
/// when `None`). Returns the labels, predecessor edges and a negative cycle
/// when one is detected.
pub(crate) fn bellman_ford(
    base: &GraphComplex,
    w: &[f64],
    sources: Option<&[usize]>,
) -> (Vec<f64>, Vec<Option<usize>>, Option<Vec<usize>>) {
    let n = base.n_vertices();
    let mut dist = match sources {
        None => vec![0.0; n],
        Some(s) => {
            let mut d = vec![f64::INFINITY; n];
            for &v in s {
                d[v] = 0.0;
            }
            d
        }
    };
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for pass in 0..n {
        let mut last = None;
        for (i, e) in base.edges().iter().enumerate() {
            let du = dist[e.tail];
            if du.is_finite() && du + w[i] < dist[e.head] {
                dist[e.head] = du + w[i];
                pred[e.head] = Some(i);
                last = Some(e.head);
            }
        }
        match last {
            None => return (dist, pred, None),
            Some(v) if pass + 1 == n => {
                let cycle = extract_cycle(base, &pred, v);
                return (dist, pred, cycle);
            }
            _ => {}
        }
    }
    (dist, pred, None)
}

fn extract_cycle(base: &GraphComplex, pred: &[Option<usize>], start: usize) -> Option<Vec<usize>> {
    let n = base.n_vertices();
    let mut v = start;
    for _ in 0..n {
        v = base.edge(pred[v]?).tail;
    }
    let anchor = v;
    let mut cycle = Vec::new();
    loop {
        let e = pred[v]?;
        cycle.push(e);
        v = base.edge(e).tail;
        if v == anchor {
            break;
        }
        if cycle.len() > n {
            return None;
        }
    }
    cycle.reverse();
    Some(cycle)
}

/// A negative cycle for the weights `c − P·z + k·ℓ`, if any.
pub fn negative_cycle(base: &GraphComplex, p: &[f64], k: f64) -> Option<Vec<usize>> {
    let w: Vec<f64> = base.edges().iter().map(|e| weight(p, k, e)).collect();
    bellman_ford(base, &w, None).2
}

fn check_p(base: &GraphComplex, p: &[f64]) -> Result<()> {
    if p.len() != base.k() {
        return Err(Error::Input(format!(
            "P has {} components, base has k = {}",
            p.len(),
            base.k()
        )));
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("P must be finite".into()));
    }
    Ok(())
}

/// `α(P) = inf{k : Σ(c − P·z + k·ℓ) ≥ 0 on every cycle}` by bisection on `k`
/// with negative-cycle detection, followed by cycle improvement. The
/// reported value is the mean of the certifying cycle.
pub fn alpha_discrete(base: &GraphComplex, p: &[f64], tol: f64) -> Result<DiscreteAlphaResult> {
    check_p(base, p)?;
    if !(tol > 0.0) {
        return Err(Error::Input("tol must be positive".into()));
    }
    let ratios = base.edges().iter().map(|e| (pz(p, e) - e.cost) / e.length);
    let (k_min, k_max) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)));
    let mut lo = k_min - tol;
    let mut hi = k_max;
    let mut iterations = 0;
    while hi - lo > tol && iterations < 64 {
        let mid = 0.5 * (lo + hi);
        if negative_cycle(base, p, mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut cycle = negative_cycle(base, p, hi - tol)
        .or_else(|| negative_cycle(base, p, lo))
        .ok_or_else(|| Error::Consistency("no certifying cycle below the bisection bound".into()))?;
    let mut mean = cycle_ratio(base, p, &cycle);
    for _ in 0..100 {
        match negative_cycle(base, p, mean) {
            Some(c) => {
                let r = cycle_ratio(base, p, &c);
                if r <= mean + 1e-15 * (1.0 + mean.abs()) {
                    break;
                }
                mean = r;
                cycle = c;
            }
            None => break,
        }
    }
    Ok(DiscreteAlphaResult {
        p: p.to_vec(),
        alpha: mean,
        cycle,
        cycle_mean: mean,
        method: AlphaMethod::Bisection,
        iterations,
    })
}

/// Maximum cycle mean of `P·z − c` for unit edge lengths, exactly in
/// rational arithmetic (inputs are taken as the exact binary values).
pub fn alpha_karp_exact(base: &GraphComplex, p: &[f64]) -> Result<BigRational> {
    check_p(base, p)?;
    if base.edges().iter().any(|e| e.length != 1.0) {
        return Err(Error::Input("Karp's method needs unit edge lengths".into()));
    }
    let n = base.n_vertices();
    let w: Vec<BigRational> = base
        .edges()
        .iter()
        .map(|e| {
            let mut acc = BigRational::from_float(-e.cost).expect("finite cost");
            for (a, &z) in p.iter().zip(&e.cocycle) {
                acc += BigRational::from_float(*a).expect("finite P") * BigRational::from_integer(z.into());
            }
            acc
        })
        .collect();
    // d[j][v]: maximum weight of a walk with exactly j edges ending at v
    let mut d: Vec<Vec<Option<BigRational>>> = vec![vec![Some(BigRational::zero()); n]];
    for j in 1..=n {
        let mut row: Vec<Option<BigRational>> = vec![None; n];
        for (i, e) in base.edges().iter().enumerate() {
            if let Some(prev) = &d[j - 1][e.tail] {
                let cand = prev + &w[i];
                if row[e.head].as_ref().is_none_or(|cur| cand > *cur) {
                    row[e.head] = Some(cand);
                }
            }
        }
        d.push(row);
    }
    let mut best: Option<BigRational> = None;
    for v in 0..n {
        let Some(dn) = &d[n][v] else { continue };
        let mut worst: Option<BigRational> = None;
        for (j, row) in d.iter().enumerate().take(n) {
            if let Some(dj) = &row[v] {
                let val = (dn - dj) / BigRational::from_integer(((n - j) as i64).into());
                if worst.as_ref().is_none_or(|cur| val < *cur) {
                    worst = Some(val);
                }
            }
        }
        if let Some(val) = worst {
            if best.as_ref().is_none_or(|cur| val > *cur) {
                best = Some(val);
            }
        }
    }
    best.ok_or_else(|| Error::Input("graph has no cycle".into()))
}

/// [`alpha_karp_exact`] rounded to `f64`.
pub fn alpha_karp(base: &GraphComplex, p: &[f64]) -> Result<f64> {
    Ok(alpha_karp_exact(base, p)?.to_f64().unwrap_or(f64::NAN))
}

/// All simple cycles as edge lists (each cycle once, rooted at its smallest
/// vertex). Exponential; meant for small graphs.
pub fn simple_cycles(base: &GraphComplex) -> Vec<Vec<usize>> {
    let n = base.n_vertices();
    let mut out = Vec::new();
    for s in 0..n {
        let mut on_path = vec![false; n];
        let mut path = Vec::new();
        dfs_cycles(base, s, s, &mut on_path, &mut path, &mut out);
    }
    out
}

fn dfs_cycles(
    base: &GraphComplex,
    s: usize,
    v: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    on_path[v] = true;
    for &e in base.out_edges(v) {
        let h = base.edge(e).head;
        if h == s {
            path.push(e);
            out.push(path.clone());
            path.pop();
        } else if h > s && !on_path[h] {
            path.push(e);
            dfs_cycles(base, s, h, on_path, path, out);
            path.pop();
        }
    }
    on_path[v] = false;
}

/// `α(P)` as the best mean over all simple cycles.
pub fn alpha_bruteforce(base: &GraphComplex, p: &[f64]) -> Result<DiscreteAlphaResult> {
    check_p(base, p)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for c in simple_cycles(base) {
        let r = cycle_ratio(base, p, &c);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, c));
        }
    }
    let (alpha, cycle) = best.ok_or_else(|| Error::Input("graph has no cycle".into()))?;
    Ok(DiscreteAlphaResult {
        p: p.to_vec(),
        alpha,
        cycle,
        cycle_mean: alpha,
        method: AlphaMethod::Bruteforce,
        iterations: 0,
    })
}

/// Tabulates [`alpha_discrete`] over a P-lattice.
pub fn discrete_alpha_table(base: &GraphComplex, grid: &LatticeBox, tol: f64) -> Result<AlphaTable> {
    if grid.dim() != base.k() {
        return Err(Error::Input("P-lattice dimension differs from k".into()));
    }
    let alpha = (0..grid.len())
        .into_par_iter()
        .map(|i| alpha_discrete(base, &grid.point(i), tol).map(|r| r.alpha))
        .collect::<Result<Vec<_>>>()?;
    AlphaTable::new(grid.clone(), alpha, vec![tol; grid.len()], AlphaMethod::Bisection, tol)
}

/// A random strongly connected graph: a Hamiltonian cycle plus `extra`
/// random edges, cocycles in `{−1, 0, 1}^k`, costs in `[0, 2)` and lengths
/// either 1 or in `[0.5, 2)`.
pub fn random_graph(seed: u64, n_vertices: usize, k: usize, extra: usize, unit_lengths: bool) -> Result<GraphComplex> {
    if n_vertices == 0 {
        return Err(Error::Input("need at least one vertex".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edge = |rng: &mut ChaCha8Rng, t: usize, h: usize| {
        let z = (0..k).map(|_| rng.gen_range(-1..=1)).collect();
        let length = if unit_lengths { 1.0 } else { rng.gen_range(0.5..2.0) };
        Edge::new(t, h, length, rng.gen_range(0.0..2.0), z)
    };
    let mut edges: Vec<Edge> = (0..n_vertices)
        .map(|v| edge(&mut rng, v, (v + 1) % n_vertices))
        .collect();
    for _ in 0..extra {
        let t = rng.gen_range(0..n_vertices);
        let h = rng.gen_range(0..n_vertices);
        edges.push(edge(&mut rng, t, h));
    }
    GraphComplex::new(n_vertices, k, edges, false)
}
