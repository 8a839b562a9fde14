//! Euler-Lagrange flow of mechanical models.

use serde::Serialize;

use crate::{Error, Result};

use super::TonelliModel;

/// Sampled solution of the Euler-Lagrange equation.
///
/// Positions are stored on the universal cover (not reduced mod 1) so that
/// displacements and winding can be read off directly.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// `E = p·v − L` at each sample.
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final position reduced to `[0,1)^dim`.
    pub fn final_position_mod1(&self) -> Vec<f64> {
        self.positions
            .last()
            .map(|x| x.iter().map(|c| c.rem_euclid(1.0)).collect())
            .unwrap_or_default()
    }

    /// `max_t |E(t) − E(0)|`.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// Linear interpolation of the state at time `t`.
    pub fn state_at(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = *self.times.first()?;
        let last = *self.times.last()?;
        if t < first - 1e-12 || t > last + 1e-12 {
            return None;
        }
        let j = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            j if j >= self.times.len() => self.times.len() - 2,
            j => j - 1,
        };
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let lerp = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect() };
        Some((
            lerp(&self.positions[j], &self.positions[j + 1]),
            lerp(&self.velocities[j], &self.velocities[j + 1]),
        ))
    }
}

/// Integrates `d/dt L_v = L_x` by velocity Verlet with uniform step `T/m`,
/// `m = ⌈T/dt⌉`.
pub fn euler_lagrange_integrate(
    model: &TonelliModel,
    x0: &[f64],
    v0: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    let (mass, potential) = model.mechanical_parts().ok_or(Error::UnsupportedModel(
        "Euler-Lagrange integration without derivatives",
    ))?;
    if !(dt > 0.0 && t_final > 0.0) || dt > t_final / 10.0 + 1e-15 {
        return Err(Error::Input(format!("need 0 < dt <= T/10, got dt={dt}, T={t_final}")));
    }
    let dim = model.dim();
    let steps = (t_final / dt - 1e-9).ceil() as usize;
    let h = t_final / steps as f64;

    let accel = |x: &[f64], out: &mut [f64]| {
        let mut g = [0.0; 2];
        gradient_translated(model, potential, x, &mut g);
        for k in 0..dim {
            out[k] = -g[k] / mass[k];
        }
    };
    let energy = |x: &[f64], v: &[f64]| -> f64 {
        let kin: f64 = (0..dim).map(|k| 0.5 * mass[k] * v[k] * v[k]).sum();
        kin + model.potential_at(x).unwrap_or(0.0)
    };

    let mut x = x0[..dim].to_vec();
    let mut v = v0[..dim].to_vec();
    let mut a = vec![0.0; dim];
    accel(&x, &mut a);

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
    };
    traj.times.push(0.0);
    traj.positions.push(x.clone());
    traj.velocities.push(v.clone());
    traj.energy.push(energy(&x, &v));

    for step in 1..=steps {
        for k in 0..dim {
            v[k] += 0.5 * h * a[k];
            x[k] += h * v[k];
        }
        accel(&x, &mut a);
        for k in 0..dim {
            v[k] += 0.5 * h * a[k];
        }
        traj.times.push(step as f64 * h);
        traj.positions.push(x.clone());
        traj.velocities.push(v.clone());
        traj.energy.push(energy(&x, &v));
    }
    Ok(traj)
}

fn gradient_translated(model: &TonelliModel, potential: &super::Potential, x: &[f64], out: &mut [f64]) {
    let dim = model.dim();
    let mut y = [0.0; 2];
    for k in 0..dim {
        y[k] = x[k] + model.offset[k];
    }
    potential.gradient(&y[..dim], &mut out[..dim]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_motion() {
        let t = euler_lagrange_integrate(&TonelliModel::flat(1), &[0.0], &[1.0], 1.0, 0.01).unwrap();
        let x = t.final_position_mod1()[0];
        assert!(x.min(1.0 - x) < 1e-12);
        assert!((t.velocities.last().unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((t.positions.last().unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_at_potential_maximum() {
        let t = euler_lagrange_integrate(&TonelliModel::pendulum(1.0), &[0.0], &[0.0], 2.0, 0.01).unwrap();
        assert!(t.positions.iter().all(|x| x[0].abs() < 1e-12));
        assert!(t.velocities.iter().all(|v| v[0].abs() < 1e-12));
    }

    #[test]
    fn energy_drift_is_second_order() {
        let m = TonelliModel::pendulum(1.0);
        let coarse = euler_lagrange_integrate(&m, &[0.5], &[0.1], 2.0, 1e-3).unwrap();
        let fine = euler_lagrange_integrate(&m, &[0.5], &[0.1], 2.0, 5e-4).unwrap();
        let ratio = coarse.max_energy_drift() / fine.max_energy_drift();
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let m = TonelliModel::pendulum(1.0);
        let fwd = euler_lagrange_integrate(&m, &[0.3], &[0.7], 1.0, 1e-3).unwrap();
        let x1 = fwd.positions.last().unwrap().clone();
        let v1: Vec<f64> = fwd.velocities.last().unwrap().iter().map(|v| -v).collect();
        let back = euler_lagrange_integrate(&m, &x1, &v1, 1.0, 1e-3).unwrap();
        assert!((back.positions.last().unwrap()[0] - 0.3).abs() < 1e-6);
        assert!((back.velocities.last().unwrap()[0] + 0.7).abs() < 1e-6);
    }

    #[test]
    fn custom_models_are_rejected() {
        let m = TonelliModel::custom("c", 1, std::sync::Arc::new(|_x, v| v[0] * v[0]), None);
        assert!(matches!(
            euler_lagrange_integrate(&m, &[0.0], &[1.0], 1.0, 0.1),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn two_dimensional_energy_is_conserved() {
        let m = TonelliModel::aniso2d(1.0);
        let t = euler_lagrange_integrate(&m, &[0.1, 0.2], &[0.5, -0.3], 1.0, 1e-3).unwrap();
        assert!(t.max_energy_drift() < 1e-4);
    }
}
