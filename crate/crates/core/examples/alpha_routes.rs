//! Effective Hamiltonian of the pendulum by three independent routes.

use hj_homog::effective::{alpha_1d_oracle_fn, alpha_large_t, alpha_minmax, critical_slope, MinmaxOptions};
use hj_homog::hj_grid::PeriodicGrid;
use hj_homog::models::TonelliModel;

fn main() -> hj_homog::Result<()> {
    let model = TonelliModel::pendulum(1.0);
    let u = |x: f64| model.potential_at(&[x]).unwrap();
    println!("flat piece ends at P = {:.6}", critical_slope(u)?);
    println!("{:>5} {:>10} {:>10} {:>10}", "P", "large T", "min-max", "oracle");
    for p in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let lt = alpha_large_t(&model, &[p], 60.0, 0.01, PeriodicGrid::new(1, 256)?)?;
        let mm = alpha_minmax(&model, &[p], PeriodicGrid::new(1, 256)?, &MinmaxOptions::default())?;
        println!(
            "{p:>5} {:>10.5} {:>10.5} {:>10.5}",
            lt.alpha,
            mm.alpha,
            alpha_1d_oracle_fn(u, p)?
        );
    }
    Ok(())
}
