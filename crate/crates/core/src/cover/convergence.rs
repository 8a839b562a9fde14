use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

use super::graph::GraphComplex;
use super::paths::Weight;
use super::window::{build_cover_window, build_torsioned_cover, CoverWindow};

#[derive(Debug, Clone, Serialize)]
pub struct SpaceOptions {
    /// Requested number of sampled node pairs per `ε`.
    pub pairs: usize,
    pub sources: usize,
    pub seed: u64,
}

impl Default for SpaceOptions {
    fn default() -> Self {
        Self {
            pairs: 4000,
            sources: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceRow {
    pub eps: f64,
    pub radius: i64,
    pub pairs: usize,
    pub b: f64,
    pub a_eps: f64,
    pub fiber_diameter: f64,
    /// `fiber_diameter ≤ B·A_ε`.
    pub fiber_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceConvergence {
    pub rows: Vec<SpaceRow>,
    /// `C = max A_ε/ε`.
    pub c: f64,
    /// All `A_ε/ε` lie within a factor 2 of each other (or all vanish).
    pub c_stable: bool,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All distances from `source` (no predecessor bookkeeping).
pub fn distances_from(window: &CoverWindow, source: usize, weight: Weight) -> Vec<f64> {
    let base = window.base();
    let mut dist = vec![f64::INFINITY; window.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, node)) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for (head, e) in window.neighbors(node) {
            let nd = d + weight.of(base.edge(e));
            if nd < dist[head] {
                dist[head] = nd;
                heap.push(Entry(nd, head));
            }
        }
    }
    dist
}

fn l1(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() as f64
}

/// Fits the quasi-isometry constants of `(M̃, ε·d, F_ε)` against `(R^k, ℓ¹)`:
/// the smallest `B ≥ 1` with `|ΔF_ε| ≤ B·ε·d` and then the smallest
/// `A_ε ≥ 0` with `ε·d/B − A_ε ≤ |ΔF_ε|`, over sampled pairs in the window
/// `R = ⌈2/ε⌉`. Also reports the largest sampled fiber diameter of `F_ε`.
pub fn verify_space_convergence(
    base: &GraphComplex,
    eps_list: &[f64],
    options: &SpaceOptions,
) -> Result<SpaceConvergence> {
    if options.pairs < 100 {
        return Err(Error::Input(format!(
            "need at least 100 sampled pairs, got {}",
            options.pairs
        )));
    }
    if options.sources == 0 {
        return Err(Error::Input("need at least one source".into()));
    }
    if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Input("eps values must lie in (0, 1]".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let radius = (2.0 / eps - 1e-9).ceil() as i64;
        let w = build_cover_window(base, radius)?;
        rows.push(fit_constants(&w, eps, radius, options)?);
    }
    let scaled: Vec<f64> = rows.iter().map(|r| r.a_eps / r.eps).collect();
    let c = scaled.iter().cloned().fold(0.0, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_stable = c == 0.0 || (lo > 0.0 && c / lo <= 2.0);
    Ok(SpaceConvergence { rows, c, c_stable })
}

fn fit_constants(w: &CoverWindow, eps: f64, radius: i64, options: &SpaceOptions) -> Result<SpaceRow> {
    let k = w.base().k();
    let margin = w.base().max_cocycle().max(1);
    let interior: Vec<usize> = (0..w.len()).filter(|&i| w.boundary_distance(i) >= margin).collect();
    if interior.is_empty() {
        return Err(Error::Window(format!("window R = {radius} has no interior")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ eps.to_bits());
    let mut sources = vec![w.basepoint()];
    let extra: Vec<usize> = interior
        .choose_multiple(&mut rng, options.sources.saturating_sub(1).min(interior.len()))
        .cloned()
        .collect();
    sources.extend(extra.into_iter().filter(|&s| s != w.basepoint()));
    let per_source = options.pairs.div_ceil(sources.len());
    let target_sets: Vec<Vec<usize>> = sources
        .iter()
        .map(|_| {
            if interior.len() <= per_source {
                interior.clone()
            } else {
                interior.choose_multiple(&mut rng, per_source).cloned().collect()
            }
        })
        .collect();

    // (max Δ/d, [(d, Δ)] pairs, fiber diameter) per source
    let per: Vec<(Vec<(f64, f64)>, f64)> = sources
        .par_iter()
        .zip(target_sets.par_iter())
        .map(|(&s, targets)| {
            let dist = distances_from(w, s, Weight::Length);
            let mut ns = vec![0; k];
            w.lattice_into(s, &mut ns);
            let mut nt = vec![0; k];
            let mut pairs = Vec::with_capacity(targets.len());
            for &t in targets {
                if t == s {
                    continue;
                }
                w.lattice_into(t, &mut nt);
                pairs.push((dist[t], l1(&ns, &nt)));
            }
            // whole fiber of the source
            let nv = w.base().n_vertices();
            let first = s - s % nv;
            let mut fiber: f64 = 0.0;
            for t in first..first + nv {
                if t != s {
                    pairs.push((dist[t], 0.0));
                    fiber = fiber.max(dist[t]);
                }
            }
            (pairs, fiber)
        })
        .collect();

    let mut pair_count = 0;
    let mut b: f64 = 1.0;
    let mut fiber: f64 = 0.0;
    for (pairs, f) in &per {
        pair_count += pairs.len();
        fiber = fiber.max(*f);
        for &(d, delta) in pairs {
            if !d.is_finite() {
                return Err(Error::Window("sampled pair unreachable inside the window".into()));
            }
            b = b.max(delta / d);
        }
    }
    let mut a: f64 = 0.0;
    for (pairs, _) in &per {
        for &(d, delta) in pairs {
            a = a.max(d / b - delta);
        }
    }
    let a_eps = eps * a;
    let fiber_diameter = eps * fiber;
    Ok(SpaceRow {
        eps,
        radius,
        pairs: pair_count,
        b,
        a_eps,
        fiber_diameter,
        fiber_bound: fiber_diameter <= b * a_eps * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionRow {
    pub eps: f64,
    pub fiber_size: usize,
    /// Largest `ε·d` between two nodes with the same free coordinate.
    pub fiber_diameter: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionCollapse {
    pub rows: Vec<TorsionRow>,
    /// `fiber_diameter(ε_{j+1}) / fiber_diameter(ε_j)`.
    pub ratios: Vec<f64>,
    /// `max fiber_diameter/ε`.
    pub c: f64,
}

/// Fiber diameters of `F_ε` (which forgets torsion coordinates) on the
/// torsioned cover of `base`.
pub fn torsion_collapse_check(base: &GraphComplex, eps_list: &[f64]) -> Result<TorsionCollapse> {
    if base.torsion_orders().is_empty() {
        return Err(Error::Input("base has no torsion factors".into()));
    }
    if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Input("eps values must be positive".into()));
    }
    let w = build_torsioned_cover(base, 2)?.0;
    let centre = w.basepoint();
    let per_fiber = w.base().n_vertices() * w.base().torsion_orders().iter().product::<i64>() as usize;
    let first = centre - centre % per_fiber;
    let fiber: Vec<usize> = (first..first + per_fiber).collect();
    debug_assert!(fiber.iter().all(|&i| w.g_map(i) == w.g_map(centre)));
    let diam = fiber
        .par_iter()
        .map(|&s| {
            let d = distances_from(&w, s, Weight::Length);
            fiber.iter().map(|&t| d[t]).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    if !diam.is_finite() {
        return Err(Error::Window("fiber not connected inside the window".into()));
    }
    let rows: Vec<TorsionRow> = eps_list
        .iter()
        .map(|&eps| TorsionRow {
            eps,
            fiber_size: per_fiber,
            fiber_diameter: eps * diam,
        })
        .collect();
    let ratios = rows
        .windows(2)
        .map(|p| p[1].fiber_diameter / p[0].fiber_diameter)
        .collect();
    let c = rows.iter().map(|r| r.fiber_diameter / r.eps).fold(0.0, f64::max);
    Ok(TorsionCollapse { rows, ratios, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::stable::hedlund_model;

    const EPS: [f64; 3] = [0.5, 0.25, 0.125];

    #[test]
    fn circle_is_an_isometry() {
        let r = verify_space_convergence(&GraphComplex::circle(), &EPS, &SpaceOptions::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.b, 1.0);
            assert_eq!(row.a_eps, 0.0);
            assert_eq!(row.fiber_diameter, 0.0);
            assert!(row.fiber_bound);
        }
        assert!(r.c_stable);
    }

    #[test]
    fn flat_torus_constants() {
        let r = verify_space_convergence(&GraphComplex::flat_torus(2), &EPS, &SpaceOptions::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.b, 1.0);
            assert!(row.a_eps <= row.eps);
        }
    }

    #[test]
    fn too_few_pairs() {
        let o = SpaceOptions {
            pairs: 50,
            ..SpaceOptions::default()
        };
        assert!(matches!(
            verify_space_convergence(&GraphComplex::circle(), &EPS, &o),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn hedlund_a_eps_scales_linearly() {
        let g = hedlund_model(4, 0.2).unwrap();
        let o = SpaceOptions {
            pairs: 400,
            sources: 3,
            seed: 7,
        };
        let r = verify_space_convergence(&g, &EPS[..2], &o).unwrap();
        assert!(r.rows.iter().all(|row| row.fiber_bound && row.b >= 1.0));
        assert!(r.rows[1].a_eps < r.rows[0].a_eps);
        assert!(r.c_stable, "{:?}", r.rows);
    }

    #[test]
    fn fin_fiber_diameter_halves() {
        let g = GraphComplex::circle_with_fin(4).unwrap();
        let t = torsion_collapse_check(&g, &EPS).unwrap();
        assert_eq!(t.rows[0].fiber_size, 8);
        assert!((t.rows[0].fiber_diameter - 2.0 * 0.5).abs() < 1e-12);
        assert!(t.ratios.iter().all(|&q| (q - 0.5).abs() < 1e-12));
    }
}
