//! Solves the rescaled problem for a few eps and prints the solution at x = 0.5.

use hj_homog::hj_grid::{solve_cauchy, solve_oscillatory, PeriodicGrid, ValueField};
use hj_homog::models::TonelliModel;

fn main() -> hj_homog::Result<()> {
    let model = TonelliModel::pendulum(1.0);
    let grid = PeriodicGrid::new(1, 1024)?;
    let f = ValueField::from_fn(grid, 0.0, |x| {
        let d = (x[0] - 0.5).rem_euclid(1.0);
        d.min(1.0 - d)
    })?;

    let plain = solve_cauchy(&f, &model, 1.0, 0.01)?;
    println!("eps = 1      u(0.5, 1) = {:.6}", plain.field.interpolate(&[0.5]));
    for eps in [0.25, 0.125, 0.0625, 0.03125] {
        let sol = solve_oscillatory(&f, &model, eps, 1.0, 0.01)?;
        println!(
            "eps = {eps:<7} u(0.5, 1) = {:.6}  final Lipschitz {:.3}",
            sol.field.interpolate(&[0.5]),
            sol.lipschitz_history.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}
