//! Conjugates an alpha table and evaluates the homogenized solution by Hopf-Lax.

use hj_homog::effective::{alpha_table, beta_from_alpha, AlphaRoute, BetaTable, HomologyVector};
use hj_homog::hj_grid::{hopf_lax_effective, BoxField};
use hj_homog::lattice::LatticeBox;
use hj_homog::models::TonelliModel;

fn main() -> hj_homog::Result<()> {
    let model = TonelliModel::pendulum(1.0);
    let grid = LatticeBox::symmetric(1, 4.0, 161)?;
    let alpha = alpha_table(&model, &grid, &AlphaRoute::Oracle1d)?;
    println!("alpha convex on the lattice: {}", alpha.convexity().passed);
    for h in [0.0, 0.5, 1.0, 2.0] {
        println!(
            "beta({h}) = {:.6}",
            beta_from_alpha(&alpha, &HomologyVector::new(vec![h])?)?
        );
    }

    let t = 1.0;
    let beta = BetaTable::from_alpha(&alpha, LatticeBox::symmetric(1, 3.5, 281)?)?;
    let field = BoxField::from_fn(LatticeBox::symmetric(1, 5.0, 1281)?, |y| y[0].abs())?;
    for y in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let v = hopf_lax_effective(&field, &beta, &[y], t)?;
        println!("u({y:+}, {t}) = {:.6}  argmin {:+.4}", v.value, v.argmin[0]);
    }
    Ok(())
}
