use serde::Serialize;

use crate::models::{TonelliModel, Trajectory};
use crate::{Error, Result};

use super::field::ValueField;

#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicsReport {
    /// `(t, max defect over trajectories at t)`.
    pub per_time: Vec<(f64, f64)>,
    pub max_defect: f64,
}

/// Measures `|∂_x u(γ(t), t) − L_v(γ(t), γ̇(t))|_∞` along each trajectory at the
/// times of the given snapshots. Gradients are central differences
/// interpolated to `γ(t)`.
pub fn characteristics_check(
    snapshots: &[ValueField],
    model: &TonelliModel,
    trajectories: &[Trajectory],
) -> Result<CharacteristicsReport> {
    let dim = model.dim();
    let mut per_time = Vec::with_capacity(snapshots.len());
    let mut max_defect: f64 = 0.0;
    for u in snapshots {
        if u.grid().dim() != dim {
            return Err(Error::Input("snapshot and model dimensions differ".into()));
        }
        let grad = u.central_gradient();
        let t = u.time();
        let mut worst: f64 = 0.0;
        for (k, traj) in trajectories.iter().enumerate() {
            let (x, v) = traj
                .state_at(t)
                .ok_or_else(|| Error::Window(format!("trajectory {k} does not cover t={t}")))?;
            let mut du = [0.0; 2];
            ValueField::interpolate_nodes(u.grid(), &grad, &x, |g, w| {
                for c in 0..dim {
                    du[c] += w * g[c];
                }
            });
            let xm: Vec<f64> = x.iter().map(|c| c.rem_euclid(1.0)).collect();
            let mut p = [0.0; 2];
            model.momentum(&xm, &v, &mut p[..dim]);
            for c in 0..dim {
                worst = worst.max((du[c] - p[c]).abs());
            }
        }
        per_time.push((t, worst));
        max_defect = max_defect.max(worst);
    }
    Ok(CharacteristicsReport { per_time, max_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hj_grid::{solve_cauchy_observed, PeriodicGrid};
    use crate::models::euler_lagrange_integrate;
    use std::f64::consts::PI;

    fn run(
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        n: usize,
        t: f64,
        dt: f64,
        starts: &[f64],
    ) -> CharacteristicsReport {
        let model = TonelliModel::flat(1);
        let g = PeriodicGrid::new(1, n).unwrap();
        let f0 = ValueField::from_fn(g, 0.0, |x| f(x[0])).unwrap();
        let mut snaps = Vec::new();
        solve_cauchy_observed(&f0, &model, t, dt, |u| snaps.push(u.clone())).unwrap();
        let trajs: Vec<_> = starts
            .iter()
            .map(|&x0| euler_lagrange_integrate(&model, &[x0], &[df(x0)], t, t / 50.0).unwrap())
            .collect();
        characteristics_check(&snaps, &model, &trajs).unwrap()
    }

    fn starts(count: usize) -> Vec<f64> {
        (0..count).map(|i| (i as f64 + 0.5) / count as f64).collect()
    }

    #[test]
    fn smooth_data_before_crossing() {
        let r = run(
            |x| 0.3 * (2.0 * PI * x).sin(),
            |x| 0.6 * PI * (2.0 * PI * x).cos(),
            512,
            0.05,
            0.025,
            &starts(32),
        );
        assert!(r.max_defect <= 5e-2, "{}", r.max_defect);
        assert_eq!(r.per_time.len(), 3);
    }

    #[test]
    fn affine_data_is_exact() {
        let r = run(|x| 0.0 * x, |_| 0.0, 64, 0.1, 0.01, &starts(8));
        assert!(r.max_defect < 1e-12);
    }

    #[test]
    fn defect_grows_after_crossing() {
        // characteristics of −cos(2πx) first meet at x = 1/2 at t = 1/(4π²)
        let f = |x: f64| -(2.0 * PI * x).cos();
        let df = |x: f64| 2.0 * PI * (2.0 * PI * x).sin();
        let s = starts(64);
        let before = run(f, df, 512, 0.0125, 0.0125, &s);
        let after = run(f, df, 512, 0.1, 0.0125, &s);
        assert!(
            after.max_defect > 10.0 * before.max_defect,
            "{} vs {}",
            after.max_defect,
            before.max_defect
        );
    }

    #[test]
    fn uncovered_time_is_a_window_error() {
        let model = TonelliModel::flat(1);
        let g = PeriodicGrid::new(1, 32).unwrap();
        let u = ValueField::constant(g, 0.0).unwrap().with_time(2.0);
        let traj = euler_lagrange_integrate(&model, &[0.0], &[0.0], 1.0, 0.1).unwrap();
        assert!(matches!(
            characteristics_check(&[u], &model, &[traj]),
            Err(Error::Window(_))
        ));
    }
}
