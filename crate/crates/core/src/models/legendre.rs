//! Numerical Legendre transforms.

use crate::lattice::LatticeBox;
use crate::{Error, Result};

use super::TonelliModel;

/// Velocity-grid points per axis for the coarse maximization.
const COARSE_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-8;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `H(x, p) = sup_v {p·v − L(x, v)}` by grid search over `|v_k| ≤ v_bound(|p|)`
/// followed by per-axis golden-section refinement.
pub fn legendre_transform(model: &TonelliModel, x: &[f64], p: &[f64]) -> Result<f64> {
    let dim = model.dim();
    let pnorm = p[..dim].iter().map(|c| c * c).sum::<f64>().sqrt();
    let radius = model.v_bound(pnorm)?;
    let step = 2.0 * radius / (COARSE_POINTS - 1) as f64;
    let objective = |v: &[f64]| -> Result<f64> {
        let dot: f64 = (0..dim).map(|k| p[k] * v[k]).sum();
        Ok(dot - model.lagrangian_checked(x, v)?)
    };

    let mut best = f64::NEG_INFINITY;
    let mut best_idx = [0usize; 2];
    let mut v = [0.0; 2];
    let total = COARSE_POINTS.pow(dim as u32);
    for flat in 0..total {
        let idx = [
            flat / COARSE_POINTS.pow(dim as u32 - 1) % COARSE_POINTS,
            flat % COARSE_POINTS,
        ];
        let idx = if dim == 1 { [flat, 0] } else { idx };
        for k in 0..dim {
            v[k] = -radius + idx[k] as f64 * step;
        }
        let val = objective(&v[..dim])?;
        if val > best {
            best = val;
            best_idx = idx;
        }
    }
    if best_idx[..dim].iter().any(|&i| i == 0 || i == COARSE_POINTS - 1) {
        return Err(Error::RadiusTooSmall { radius });
    }

    let mut vbest = [0.0; 2];
    for k in 0..dim {
        vbest[k] = -radius + best_idx[k] as f64 * step;
    }
    // coordinate ascent; each axis bracket is the neighbouring grid cells
    for _round in 0..50 {
        let before = best;
        for k in 0..dim {
            let centre = vbest[k];
            let (mut a, mut b) = (centre - step, centre + step);
            let mut probe = vbest;
            let eval = |t: f64, probe: &mut [f64; 2]| -> Result<f64> {
                probe[k] = t;
                objective(&probe[..dim])
            };
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let mut fc = eval(c, &mut probe)?;
            let mut fd = eval(d, &mut probe)?;
            while (b - a).abs() > GOLDEN_TOL {
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = eval(c, &mut probe)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = eval(d, &mut probe)?;
                }
            }
            let t = 0.5 * (a + b);
            let ft = eval(t, &mut probe)?;
            for (cand, fcand) in [(t, ft), (c, fc), (d, fd)] {
                if fcand > best {
                    best = fcand;
                    vbest[k] = cand;
                }
            }
        }
        if dim == 1 || best - before <= 1e-15 * (1.0 + best.abs()) {
            break;
        }
    }
    Ok(best)
}

/// Discrete convex conjugate `max_P {P·h − H(P)}` of samples on a P-lattice.
///
/// Fails with [`Error::EnlargeGrid`] when the maximum over the lattice boundary
/// exceeds the maximum over interior nodes by more than a relative `1e-9`.
pub fn legendre_inverse(grid: &LatticeBox, samples: &[f64], h: &[f64]) -> Result<f64> {
    let (all, interior) = conjugate_parts(grid, samples, h)?;
    if all > interior + 1e-9 * (1.0 + all.abs()) {
        return Err(Error::EnlargeGrid);
    }
    Ok(all)
}

/// Maximum over all nodes and over interior nodes.
fn conjugate_parts(grid: &LatticeBox, samples: &[f64], h: &[f64]) -> Result<(f64, f64)> {
    if samples.len() != grid.len() {
        return Err(Error::Input(format!(
            "{} samples for a lattice of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    if h.len() != grid.dim() {
        return Err(Error::Input("slope dimension does not match the lattice".into()));
    }
    let mut all = f64::NEG_INFINITY;
    let mut interior = f64::NEG_INFINITY;
    for (i, &value) in samples.iter().enumerate() {
        let p = grid.point(i);
        let val: f64 = p.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() - value;
        if val > all {
            all = val;
        }
        if !grid.is_boundary(i) && val > interior {
            interior = val;
        }
    }
    Ok((all, interior))
}

/// Double conjugate `max_h {P·h − β(h)}` on the P-lattice, with `β` the
/// unchecked discrete conjugate evaluated on `slopes`.
pub fn double_conjugate(grid: &LatticeBox, samples: &[f64], slopes: &LatticeBox) -> Result<Vec<f64>> {
    let beta = slopes
        .points()
        .map(|h| conjugate_parts(grid, samples, &h).map(|(all, _)| all))
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid
        .points()
        .map(|p| {
            slopes
                .points()
                .zip(&beta)
                .map(|(h, b)| p.iter().zip(&h).map(|(a, c)| a * c).sum::<f64>() - b)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn quartic() -> TonelliModel {
        TonelliModel::custom("quartic", 1, Arc::new(|_x, v| v[0].powi(4) / 4.0), None)
    }

    #[test]
    fn quadratic_self_duality() {
        let h = legendre_transform(&TonelliModel::flat(1), &[0.3], &[1.0]).unwrap();
        assert!((h - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_shift_of_pendulum() {
        let h = legendre_transform(&TonelliModel::pendulum(1.0), &[0.0], &[0.0]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_dual_value() {
        // dense 1-D grid maximization of v − v⁴/4 gives 0.75 at v = 1
        let dense = (-40_000..40_000)
            .map(|i| {
                let v = i as f64 / 10_000.0;
                v - v.powi(4) / 4.0
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let h = legendre_transform(&quartic(), &[0.0], &[1.0]).unwrap();
        assert!((h - dense).abs() < 1e-8);
        assert!((h - 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_closed_form() {
        let m = TonelliModel::aniso2d(0.7);
        for p in [[0.0, 0.0], [1.0, -2.0], [2.5, 0.5]] {
            let x = [0.1, 0.35];
            let num = legendre_transform(&m, &x, &p).unwrap();
            let exact = m.hamiltonian(&x, &p).unwrap();
            assert!((num - exact).abs() < 1e-9, "{p:?}: {num} vs {exact}");
        }
    }

    #[test]
    fn radius_violation_is_reported() {
        // away from the v_bound sample grid the model pulls the maximizer to |v| ≈ 101
        let m = TonelliModel::custom(
            "trap",
            1,
            Arc::new(|x, v| {
                let q = v[0] * v[0] / 2.0;
                if (x[0] - 0.03).abs() < 1e-12 {
                    q - 100.0 * v[0].abs()
                } else {
                    q
                }
            }),
            None,
        );
        assert!(legendre_transform(&m, &[0.5], &[1.0]).is_ok());
        assert!(matches!(
            legendre_transform(&m, &[0.03], &[1.0]),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn inverse_of_quadratic_table() {
        let g = LatticeBox::symmetric(1, 4.0, 513).unwrap();
        let samples: Vec<f64> = g.points().map(|p| p[0] * p[0] / 2.0).collect();
        let b = legendre_inverse(&g, &samples, &[1.0]).unwrap();
        assert!((b - 0.5).abs() < 1e-3);
    }

    #[test]
    fn inverse_of_constant() {
        let g = LatticeBox::symmetric(1, 4.0, 17).unwrap();
        let samples = vec![2.5; 17];
        assert!((legendre_inverse(&g, &samples, &[0.0]).unwrap() + 2.5).abs() < 1e-15);
        assert!(matches!(
            legendre_inverse(&g, &samples, &[0.3]),
            Err(Error::EnlargeGrid)
        ));
    }

    #[test]
    fn inverse_of_abs_is_zero_inside_unit_ball() {
        let g = LatticeBox::symmetric(1, 4.0, 33).unwrap();
        let samples: Vec<f64> = g.points().map(|p| p[0].abs()).collect();
        let brute = g
            .points()
            .map(|p| p[0] * 0.5 - p[0].abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let b = legendre_inverse(&g, &samples, &[0.5]).unwrap();
        assert_eq!(b, brute);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn double_conjugate_is_below_input() {
        let g = LatticeBox::symmetric(1, 2.0, 41).unwrap();
        // non-convex input: its double conjugate is the convex envelope
        let samples: Vec<f64> = g.points().map(|p| (p[0] * p[0] - 1.0).powi(2)).collect();
        let slopes = LatticeBox::symmetric(1, 30.0, 601).unwrap();
        let dc = double_conjugate(&g, &samples, &slopes).unwrap();
        for (a, b) in dc.iter().zip(&samples) {
            assert!(*a <= b + 1e-12);
        }
        // the envelope is zero on the well [-1, 1]
        let mid = g.snap(&[0.0]).unwrap();
        assert!(dc[mid].abs() < 1e-12);
    }
}
