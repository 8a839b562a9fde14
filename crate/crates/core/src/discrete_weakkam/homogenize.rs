use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{build_cover_window, GraphComplex};
use crate::effective::{default_p_grid, AlphaTable, BetaTable};
use crate::hj_grid::{hopf_lax_effective, BoxField};
use crate::lattice::LatticeBox;
use crate::{Error, Result};

use super::alpha::discrete_alpha_table;

#[derive(Debug, Clone)]
pub struct HomogenizeOptions {
    /// Errors are reported on nodes with `|F_ε(x)|_∞ ≤ report_radius`.
    pub report_radius: f64,
    /// P-lattice for the reference `α` table (default lattice when `None`).
    pub p_grid: Option<LatticeBox>,
    pub tol: f64,
}

impl Default for HomogenizeOptions {
    fn default() -> Self {
        Self {
            report_radius: 1.0,
            p_grid: None,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteHomogRow {
    pub eps: f64,
    pub sup_error: f64,
    pub equicontinuity_modulus: f64,
    pub window_r: i64,
    pub interior_nodes: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeError {
    pub y: Vec<f64>,
    pub value: f64,
    pub reference: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteHomogRun {
    pub row: DiscreteHomogRow,
    pub nodes: Vec<NodeError>,
}

/// The time quantum `q` with every `ℓ(e)/q` an integer.
fn time_quantum(base: &GraphComplex) -> Result<(f64, Vec<usize>)> {
    let lmin = base.edges().iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
    for m in 1..=64 {
        let q = lmin / m as f64;
        let steps: Vec<f64> = base.edges().iter().map(|e| e.length / q).collect();
        if steps.iter().all(|s| (s - s.round()).abs() < 1e-9) {
            return Ok((q, steps.iter().map(|s| s.round() as usize).collect()));
        }
    }
    Err(Error::Input("edge lengths are not commensurate".into()))
}

/// Largest lattice displacement per unit of time along an edge.
fn max_speed(base: &GraphComplex) -> f64 {
    base.edges()
        .iter()
        .map(|e| e.cocycle.iter().map(|z| z.abs()).max().unwrap_or(0) as f64 / e.length)
        .fold(0.0, f64::max)
}

/// Homogenized reference `u(·, T)` by the Hopf-Lax formula with `β`
/// conjugate to a discrete `α` table.
pub struct CoverReference {
    field: BoxField,
    beta: BetaTable,
    t: f64,
}

impl CoverReference {
    pub fn new(
        alpha: &AlphaTable,
        f: &(dyn Fn(&[f64]) -> f64 + Sync),
        speed: f64,
        reach: f64,
        step: f64,
        t: f64,
    ) -> Result<Self> {
        let k = alpha.grid().dim();
        let hs = step / t;
        let m = ((speed + 2.0 * hs) / hs).ceil() as usize;
        let slopes = LatticeBox::new(vec![-(m as f64) * hs; k], hs, vec![2 * m + 1; k])?;
        let beta = BetaTable::from_alpha(alpha, slopes)?;
        let half = ((reach + t * speed) / step).ceil() as usize + 4;
        let lattice = LatticeBox::new(vec![-(half as f64) * step; k], step, vec![2 * half + 1; k])?;
        let field = BoxField::from_fn(lattice, f)?;
        Ok(Self { field, beta, t })
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        Ok(hopf_lax_effective(&self.field, &self.beta, y, self.t)?.value)
    }
}

/// Runs `v_{j+1}(x) = min_{e: y→x} v_{j+1−m_e}(y) + ε·c(e)` on cover windows
/// from `v_0 = f∘F_ε`, each edge taking time `ε·ℓ(e)`, up to time `T`, and
/// compares with the homogenized solution at `y = F_ε(x)`.
pub fn cover_homogenize(
    base: &GraphComplex,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    eps_list: &[f64],
    t: f64,
    options: &HomogenizeOptions,
) -> Result<Vec<DiscreteHomogRun>> {
    if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Input("eps values must lie in (0, 1]".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Input("T must be positive".into()));
    }
    let k = base.k();
    let (q, quanta) = time_quantum(base)?;
    let speed = max_speed(base);
    let zmax = base.max_cocycle();
    let grid = options.p_grid.clone().unwrap_or_else(|| default_p_grid(k));
    let alpha = discrete_alpha_table(base, &grid, options.tol)?;
    let step = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference = CoverReference::new(&alpha, f, speed, options.report_radius, step, t)?;
    let mut runs = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let jf = t / (eps * q);
        if (jf - jf.round()).abs() > 1e-9 * jf.max(1.0) {
            return Err(Error::Input(format!(
                "T = {t} is not a multiple of eps·q = {}",
                eps * q
            )));
        }
        let steps = jf.round() as usize;
        let radius = ((options.report_radius + t * speed) / eps - 1e-9).ceil() as i64 + 2 * zmax + 1;
        let w = build_cover_window(base, radius)?;
        let n = w.len();
        let mut lat = vec![0i64; k];
        let v0: Vec<f64> = (0..n)
            .map(|i| {
                w.lattice_into(i, &mut lat);
                let y: Vec<f64> = lat.iter().map(|&c| eps * c as f64).collect();
                f(&y)
            })
            .collect();
        if v0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("initial data not finite on the window".into()));
        }
        let depth = quanta.iter().cloned().max().unwrap_or(1);
        let mut levels: Vec<Vec<f64>> = vec![vec![f64::INFINITY; n]; depth + 1];
        levels[0] = v0;
        for j in 1..=steps {
            let next: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|x| {
                    let mut best = f64::INFINITY;
                    for (y, e) in w.in_neighbors(x) {
                        let m = quanta[e];
                        if m <= j {
                            let prev = levels[(j - m) % (depth + 1)][y];
                            best = best.min(prev + eps * base.edge(e).cost);
                        }
                    }
                    best
                })
                .collect();
            levels[j % (depth + 1)] = next;
        }
        let v = &levels[steps % (depth + 1)];

        let margin = 2 * zmax.max(1);
        let interior: Vec<usize> = (0..n)
            .filter(|&i| {
                w.lattice_into(i, &mut lat);
                w.boundary_distance(i) >= margin
                    && lat
                        .iter()
                        .all(|&c| (eps * c as f64).abs() <= options.report_radius + 1e-12)
            })
            .collect();
        if interior.iter().any(|&i| !v[i].is_finite()) {
            return Err(Error::Window(format!(
                "time T = {t} not reachable on the window at eps = {eps}"
            )));
        }
        let mut cells: Vec<Vec<i64>> = interior
            .iter()
            .map(|&i| {
                let mut c = vec![0; k];
                w.lattice_into(i, &mut c);
                c
            })
            .collect();
        cells.sort();
        cells.dedup();
        let refs: HashMap<Vec<i64>, f64> = cells
            .par_iter()
            .map(|c| {
                let y: Vec<f64> = c.iter().map(|&a| eps * a as f64).collect();
                reference.eval(&y).map(|u| (c.clone(), u))
            })
            .collect::<Result<_>>()?;
        let mut nodes = Vec::with_capacity(interior.len());
        let mut sup_error: f64 = 0.0;
        for &i in &interior {
            w.lattice_into(i, &mut lat);
            let reference = refs[&lat];
            let error = (v[i] - reference).abs();
            sup_error = sup_error.max(error);
            nodes.push(NodeError {
                y: lat.iter().map(|&c| eps * c as f64).collect(),
                value: v[i],
                reference,
                error,
            });
        }
        let mut modulus: f64 = 0.0;
        for &i in &interior {
            for (h, _) in w.neighbors(i) {
                if v[h].is_finite() {
                    modulus = modulus.max((v[i] - v[h]).abs());
                }
            }
        }
        let spacing = eps * base.edges().iter().map(|e| e.length).fold(0.0, f64::max);
        if modulus > 1e6 * spacing {
            return Err(Error::Input(format!(
                "equicontinuity modulus {modulus:.3e} explodes; data not Lipschitz"
            )));
        }
        runs.push(DiscreteHomogRun {
            row: DiscreteHomogRow {
                eps,
                sup_error,
                equicontinuity_modulus: modulus,
                window_r: radius,
                interior_nodes: interior.len(),
                steps,
            },
            nodes,
        });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_weakkam::alpha_discrete;

    const EPS: [f64; 3] = [0.5, 0.25, 0.125];

    #[test]
    fn circle_affine_is_exact() {
        let g = GraphComplex::circle();
        for p in [-1.5, 0.5, 2.0] {
            let runs = cover_homogenize(&g, &|y| 0.3 + p * y[0], &EPS, 1.0, &HomogenizeOptions::default()).unwrap();
            let a = alpha_discrete(&g, &[p], 1e-9).unwrap().alpha;
            assert!((a - (p.abs() - 1.0)).abs() < 1e-12);
            for r in &runs {
                for node in &r.nodes {
                    assert!((node.value - (0.3 + p * node.y[0] - a)).abs() <= r.row.eps * 1e-9 + 1e-12);
                }
                assert!(r.row.sup_error <= 1e-9, "{:?}", r.row);
            }
        }
    }

    #[test]
    fn circle_cone_errors_decrease() {
        let g = GraphComplex::circle();
        let runs = cover_homogenize(&g, &|y| y[0].abs(), &EPS, 1.0, &HomogenizeOptions::default()).unwrap();
        let errs: Vec<f64> = runs.iter().map(|r| r.row.sup_error).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
        assert!(runs.iter().all(|r| r.row.equicontinuity_modulus <= 1.5 * r.row.eps));
    }

    #[test]
    fn torus_cone_errors_decrease() {
        let g = GraphComplex::flat_torus(2);
        let f = |y: &[f64]| (y[0] * y[0] + y[1] * y[1]).sqrt();
        let runs = cover_homogenize(&g, &f, &EPS, 1.0, &HomogenizeOptions::default()).unwrap();
        let errs: Vec<f64> = runs.iter().map(|r| r.row.sup_error).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    }

    #[test]
    fn rejects_bad_time() {
        let g = GraphComplex::circle();
        assert!(matches!(
            cover_homogenize(&g, &|y| y[0], &[0.3], 1.0, &HomogenizeOptions::default()),
            Err(Error::Input(_))
        ));
    }
}
