use rayon::prelude::*;

use crate::models::TonelliModel;
use crate::{Error, Result};

use super::field::{PeriodicGrid, ValueField};

/// One admissible grid displacement of a step stencil.
#[derive(Debug, Clone, Copy)]
struct Offset {
    off: [i64; 2],
    velocity: [f64; 2],
    boundary: bool,
}

/// Minimal-image offset range `(−n/2, n/2]` along one axis.
fn image_range(n: usize) -> (i64, i64) {
    let n = n as i64;
    (-((n - 1) / 2), n / 2)
}

fn stencil(grid: &PeriodicGrid, reach: f64, dt: f64) -> Vec<Offset> {
    let (lo, hi) = image_range(grid.n());
    let r = (reach + 1e-9).floor() as i64;
    let reach2 = reach * reach + 1e-9;
    let inside = |o: [i64; 2]| -> bool {
        let norm2 = (o[0] * o[0] + o[1] * o[1]) as f64;
        norm2 <= reach2
    };
    let in_image = |c: i64| c >= lo && c <= hi;
    let h = grid.spacing();
    let span = |_: usize| (lo.max(-r))..=(hi.min(r));
    let mut out = Vec::new();
    let second: Vec<i64> = if grid.dim() == 2 { span(1).collect() } else { vec![0] };
    for a in span(0) {
        for &b in &second {
            let o = [a, b];
            if !inside(o) {
                continue;
            }
            let mut boundary = false;
            for k in 0..grid.dim() {
                if o[k] == 0 {
                    continue;
                }
                let mut next = o;
                next[k] += o[k].signum();
                if in_image(next[k]) && !inside(next) {
                    boundary = true;
                }
            }
            out.push(Offset {
                off: o,
                velocity: [a as f64 * h / dt, b as f64 * h / dt],
                boundary,
            });
        }
    }
    out
}

/// Integer fast-scale factor `1/ε`.
pub fn fast_scale(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Input(format!("eps must lie in (0, 1], got {eps}")));
    }
    let m = (1.0 / eps).round();
    if ((1.0 / eps) - m).abs() > 1e-9 * m {
        return Err(Error::Input(format!("1/eps must be an integer, got eps={eps}")));
    }
    Ok(m as usize)
}

/// One discrete Lax-Oleinik step
/// `u'(x_i) = min_j u(x_j) + dt·L(x_i, (x_i ⊖ x_j)/dt)` over `|x_i ⊖ x_j| ≤ R·dt`.
pub fn lax_oleinik_step(u: &ValueField, model: &TonelliModel, dt: f64) -> Result<ValueField> {
    scaled_step(u, model, 1, dt)
}

/// Step with `L` evaluated at the fast variable `x_i/ε mod 1`, `fast = 1/ε`.
///
/// The fast coordinate of node `i` is computed as `(i·fast mod n)/n` so that
/// `fast = 1` coincides bit for bit with [`lax_oleinik_step`].
pub fn scaled_step(u: &ValueField, model: &TonelliModel, fast: usize, dt: f64) -> Result<ValueField> {
    let grid = *u.grid();
    if model.dim() != grid.dim() {
        return Err(Error::Input(format!(
            "model dimension {} does not match grid dimension {}",
            model.dim(),
            grid.dim()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Input(format!("dt must be positive, got {dt}")));
    }
    let radius = model.v_bound(u.lipschitz())?;
    let reach = radius * dt / grid.spacing();
    if reach < 1.0 {
        let required_n = (1.0 / (radius * dt)).ceil() as usize;
        return Err(Error::Resolution {
            required_n,
            reason: format!("search radius {radius}·dt={dt} is below one grid spacing"),
        });
    }
    let offsets = stencil(&grid, reach, dt);
    let n = grid.n();
    let dim = grid.dim();
    let fast_coord = |i: usize| -> [f64; 2] {
        let a = grid.axes(i);
        let mut x = [0.0; 2];
        for k in 0..dim {
            x[k] = ((a[k] * fast) % n) as f64 / n as f64;
        }
        x
    };

    let kinetic: Option<Vec<f64>> = if model.is_mechanical() {
        Some(
            offsets
                .iter()
                .map(|o| model.kinetic(&o.velocity[..dim]).unwrap())
                .collect(),
        )
    } else {
        None
    };
    let values = u.values();

    let relax = |i: usize| -> Result<f64> {
        let x = fast_coord(i);
        let pot = kinetic.as_ref().map(|_| model.potential_at(&x[..dim]).unwrap());
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        let mut best_boundary = false;
        for (s, o) in offsets.iter().enumerate() {
            let j = grid.shift(i, [-o.off[0], -o.off[1]]);
            let cost = match (&kinetic, pot) {
                (Some(kin), Some(p)) => kin[s] - p,
                _ => model.lagrangian_checked(&x[..dim], &o.velocity[..dim])?,
            };
            let cand = values[j] + dt * cost;
            if cand < best || (cand == best && j < best_j) {
                best = cand;
                best_j = j;
                best_boundary = o.boundary;
            }
        }
        if best_boundary {
            return Err(Error::RadiusTooSmall { radius });
        }
        Ok(best)
    };

    let out: Vec<Result<f64>> = (0..grid.len()).into_par_iter().map(relax).collect();
    let values = out.into_iter().collect::<Result<Vec<f64>>>()?;
    ValueField::new(grid, values, u.time() + dt)
}

/// Result of a multi-step solve.
#[derive(Debug, Clone)]
pub struct CauchySolution {
    pub field: ValueField,
    /// Lipschitz estimate after each step.
    pub lipschitz_history: Vec<f64>,
}

fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && t_final >= 0.0) {
        return Err(Error::Input(format!(
            "need dt > 0 and T >= 0, got dt={dt}, T={t_final}"
        )));
    }
    let m = (t_final / dt).round();
    if (m * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::Input(format!(
            "T={t_final} is not an integer multiple of dt={dt}"
        )));
    }
    Ok(m as usize)
}

fn evolve(
    f: &ValueField,
    model: &TonelliModel,
    fast: usize,
    t_final: f64,
    dt: f64,
    mut observer: impl FnMut(&ValueField),
) -> Result<CauchySolution> {
    let steps = step_count(t_final, dt)?;
    let mut u = f.clone();
    observer(&u);
    let mut lipschitz_history = Vec::with_capacity(steps);
    for _ in 0..steps {
        u = scaled_step(&u, model, fast, dt)?;
        lipschitz_history.push(u.lipschitz());
        observer(&u);
    }
    Ok(CauchySolution {
        field: u,
        lipschitz_history,
    })
}

/// `T/dt` Lax-Oleinik steps from `f`.
pub fn solve_cauchy(f: &ValueField, model: &TonelliModel, t_final: f64, dt: f64) -> Result<CauchySolution> {
    evolve(f, model, 1, t_final, dt, |_| {})
}

/// [`solve_cauchy`] calling `observer` on the initial field and after each step.
pub fn solve_cauchy_observed(
    f: &ValueField,
    model: &TonelliModel,
    t_final: f64,
    dt: f64,
    observer: impl FnMut(&ValueField),
) -> Result<CauchySolution> {
    evolve(f, model, 1, t_final, dt, observer)
}

/// Solves `∂_t u + H(x/ε, ∂_x u) = 0`; needs `1/ε` integral and `n ≥ 32/ε`.
pub fn solve_oscillatory(
    f_eps: &ValueField,
    model: &TonelliModel,
    eps: f64,
    t_final: f64,
    dt: f64,
) -> Result<CauchySolution> {
    let fast = fast_scale(eps)?;
    let required_n = 32 * fast;
    if f_eps.grid().n() < required_n {
        return Err(Error::Resolution {
            required_n,
            reason: format!("the fast scale eps={eps} needs 32 points per period"),
        });
    }
    evolve(f_eps, model, fast, t_final, dt, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(1, n).unwrap()
    }

    fn torus_dist(x: f64, c: f64) -> f64 {
        let d = (x - c).rem_euclid(1.0);
        d.min(1.0 - d)
    }

    #[test]
    fn zero_is_fixed() {
        let u = ValueField::constant(grid1(64), 0.0).unwrap();
        let v = lax_oleinik_step(&u, &TonelliModel::flat(1), 0.05).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.0));
        assert_eq!(v.time(), 0.05);
    }

    #[test]
    fn constants_commute() {
        let u = ValueField::constant(grid1(64), 5.0).unwrap();
        let v = lax_oleinik_step(&u, &TonelliModel::flat(1), 0.05).unwrap();
        assert!(v.values().iter().all(|&x| x == 5.0));
        // pendulum: 5 + dt·min_v L = 5 − dt·cos(2πx)
        let p = TonelliModel::pendulum(1.0);
        let v = lax_oleinik_step(&u, &p, 0.05).unwrap();
        for (i, &val) in v.values().iter().enumerate() {
            let x = i as f64 / 64.0;
            let expect = 5.0 + 0.05 * (-(2.0 * std::f64::consts::PI * x).cos());
            assert!((val - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn cone_matches_brute_force() {
        let n = 128;
        let dt = 0.02;
        let t = 0.1;
        let g = grid1(n);
        let f = ValueField::from_fn(g, 0.0, |x| torus_dist(x[0], 0.5)).unwrap();
        let sol = solve_cauchy(&f, &TonelliModel::flat(1), t, dt).unwrap();
        // dense Hopf-Lax on a 10× finer lattice
        let fine = 10 * n;
        let hl = |y: f64| -> f64 {
            (0..fine)
                .map(|j| {
                    let x = j as f64 / fine as f64;
                    let d = (y - x + 0.5).rem_euclid(1.0) - 0.5;
                    torus_dist(x, 0.5) + d * d / (2.0 * t)
                })
                .fold(f64::INFINITY, f64::min)
        };
        let centre = sol.field.values()[n / 2];
        assert!(centre <= 0.0);
        assert!((centre - hl(0.5)).abs() < 2e-2, "{centre} vs {}", hl(0.5));
        let worst = (0..n)
            .map(|i| (sol.field.values()[i] - hl(i as f64 / n as f64)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 2e-2, "{worst}");
    }

    #[test]
    fn resolution_error_names_required_n() {
        let u = ValueField::constant(grid1(64), 0.0).unwrap();
        match lax_oleinik_step(&u, &TonelliModel::flat(1), 1e-3) {
            Err(Error::Resolution { required_n, .. }) => assert_eq!(required_n, 250),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pendulum_large_time_slope() {
        let f = ValueField::constant(grid1(128), 0.0).unwrap();
        // the corrector oscillation 2/π biases max u_T/T by about 0.64/T
        let sol = solve_cauchy(&f, &TonelliModel::pendulum(1.0), 50.0, 0.02).unwrap();
        let slope = sol.field.max() / 50.0;
        assert!((slope + 1.0).abs() < 0.02, "{slope}");
        assert!((sol.field.min() / 50.0 + 1.0).abs() < 1e-3);
        assert_eq!(sol.lipschitz_history.len(), 2500);
    }

    #[test]
    fn semigroup_split() {
        let g = grid1(256);
        let f = ValueField::from_fn(g, 0.0, |x| 0.2 * (2.0 * std::f64::consts::PI * x[0]).sin()).unwrap();
        let m = TonelliModel::pendulum(1.0);
        let whole = solve_cauchy(&f, &m, 1.0, 0.01).unwrap().field;
        let half = solve_cauchy(&f, &m, 0.5, 0.01).unwrap().field;
        let split = solve_cauchy(&half, &m, 0.5, 0.01).unwrap().field;
        assert!(whole.sup_distance(&split) <= 2e-2);
        assert!((split.time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_eps_one_is_cauchy() {
        let g = grid1(64);
        let f = ValueField::from_fn(g, 0.0, |x| torus_dist(x[0], 0.0)).unwrap();
        let m = TonelliModel::pendulum(1.0);
        let a = solve_cauchy(&f, &m, 0.2, 0.02).unwrap().field;
        let b = solve_oscillatory(&f, &m, 1.0, 0.2, 0.02).unwrap().field;
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn oscillatory_flat_is_eps_independent() {
        let g = grid1(256);
        let f = ValueField::from_fn(g, 0.0, |x| torus_dist(x[0], 0.3)).unwrap();
        let m = TonelliModel::flat(1);
        let a = solve_oscillatory(&f, &m, 1.0, 0.1, 0.01).unwrap().field;
        let b = solve_oscillatory(&f, &m, 0.125, 0.1, 0.01).unwrap().field;
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn oscillatory_needs_resolution() {
        let f = ValueField::constant(grid1(64), 0.0).unwrap();
        assert!(matches!(
            solve_oscillatory(&f, &TonelliModel::flat(1), 0.25, 0.1, 0.01),
            Err(Error::Resolution { required_n: 128, .. })
        ));
        assert!(solve_oscillatory(&f, &TonelliModel::flat(1), 0.3, 0.1, 0.01).is_err());
    }

    #[test]
    fn rejects_non_multiple_time() {
        let f = ValueField::constant(grid1(64), 0.0).unwrap();
        assert!(solve_cauchy(&f, &TonelliModel::flat(1), 0.105, 0.01).is_err());
    }

    #[test]
    fn two_dimensional_step() {
        let g = PeriodicGrid::new(2, 32).unwrap();
        let f = ValueField::from_fn(g, 0.0, |x| torus_dist(x[0], 0.5) + torus_dist(x[1], 0.5)).unwrap();
        let sol = solve_cauchy(&f, &TonelliModel::aniso2d(1.0), 0.1, 0.05).unwrap();
        assert!(sol.field.values().iter().all(|v| v.is_finite()));
        // the potential term is bounded by A, slopes by 1
        assert!(sol.field.sup_distance(&f) <= 0.1 * 2.0 + 1e-12);
    }

    #[test]
    fn stencil_wraps_without_boundary() {
        let g = grid1(8);
        let s = stencil(&g, 20.0, 1.0);
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|o| !o.boundary));
        let s = stencil(&g, 2.5, 1.0);
        assert_eq!(s.len(), 5);
        assert_eq!(s.iter().filter(|o| o.boundary).count(), 2);
    }
}
