//! Value iteration on rescaled covers of the circle and flat torus.

use hj_homog::cover::GraphComplex;
use hj_homog::discrete_weakkam::{cover_homogenize, HomogenizeOptions};

type Case = (&'static str, GraphComplex, fn(&[f64]) -> f64);

fn main() -> hj_homog::Result<()> {
    let eps = [0.5, 0.25, 0.125, 0.0625];
    let cases: [Case; 3] = [
        ("circle, cone", GraphComplex::circle(), |y| y[0].abs()),
        ("circle, affine", GraphComplex::circle(), |y| 0.3 + 0.5 * y[0]),
        ("torus, cone", GraphComplex::flat_torus(2), |y| y[0].hypot(y[1])),
    ];
    for (name, g, f) in cases {
        println!("{name}");
        for run in cover_homogenize(&g, &f, &eps, 1.0, &HomogenizeOptions::default())? {
            let r = run.row;
            println!(
                "  eps {:<7} sup error {:.5}  modulus {:.4}  R {:>3}  {} interior nodes",
                r.eps, r.sup_error, r.equicontinuity_modulus, r.window_r, r.interior_nodes
            );
        }
    }
    Ok(())
}
