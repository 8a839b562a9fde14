//! Cell correctors of the pendulum at increasing resolution.

use hj_homog::effective::{alpha_1d_oracle_fn, cell_corrector, CellOptions};
use hj_homog::hj_grid::PeriodicGrid;
use hj_homog::models::TonelliModel;

fn main() -> hj_homog::Result<()> {
    let model = TonelliModel::pendulum(1.0);
    for p in [0.0, 2.0] {
        let alpha = alpha_1d_oracle_fn(|x| model.potential_at(&[x]).unwrap(), p)?;
        for n in [128, 256, 512] {
            let c = cell_corrector(&model, &[p], alpha, PeriodicGrid::new(1, n)?, &CellOptions::default())?;
            println!(
                "P = {p}, n = {n:>3}: residual {:.3e}, oscillation {:.4}, {} sweeps, converged {}",
                c.residual,
                c.field.max() - c.field.min(),
                c.steps,
                c.converged
            );
        }
    }
    Ok(())
}
