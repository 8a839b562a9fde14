//! Checks the model presets and evaluates the Legendre transform.

use hj_homog::models::{check_tonelli, euler_lagrange_integrate, legendre_transform, TonelliModel};

fn main() -> hj_homog::Result<()> {
    for (name, dim) in [("flat", 1), ("pendulum", 1), ("aniso2d", 2)] {
        let model = TonelliModel::preset(name, dim, 1.0)?;
        let report = check_tonelli(&model, 24)?;
        println!(
            "{name:>8}: min second difference {:+.3e}, convex {}, superlinear {}",
            report.min_second_difference, report.convexity_pass, report.superlinearity_pass
        );
    }

    let pendulum = TonelliModel::pendulum(1.0);
    for p in [0.0, 1.0, 2.5] {
        let h = legendre_transform(&pendulum, &[0.25], &[p])?;
        let exact = pendulum.hamiltonian(&[0.25], &[p])?;
        println!("H(0.25, {p}) numeric {h:.8} closed form {exact:.8}");
    }

    let traj = euler_lagrange_integrate(&pendulum, &[0.5], &[0.3], 5.0, 1e-3)?;
    println!("energy drift over t = 5: {:.2e}", traj.max_energy_drift());
    Ok(())
}
