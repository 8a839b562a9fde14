//! Quasi-isometry constants of rescaled covers and torsion collapse.

use hj_homog::cover::{hedlund_model, torsion_collapse_check, verify_space_convergence, GraphComplex, SpaceOptions};

fn main() -> hj_homog::Result<()> {
    let eps = [0.5, 0.25, 0.125];
    for (name, g) in [
        ("flat torus", GraphComplex::flat_torus(2)),
        ("hedlund", hedlund_model(4, 0.2)?),
    ] {
        let s = verify_space_convergence(&g, &eps, &SpaceOptions::default())?;
        println!("{name}: C = {:.3}, stable {}", s.c, s.c_stable);
        for r in &s.rows {
            println!(
                "  eps {:<6} R {:>3} B {:.3} A {:.4} fiber {:.4} bound {}",
                r.eps, r.radius, r.b, r.a_eps, r.fiber_diameter, r.fiber_bound
            );
        }
    }

    let fin = GraphComplex::circle_with_fin(4)?;
    let t = torsion_collapse_check(&fin, &[0.5, 0.25, 0.125, 0.0625])?;
    for r in &t.rows {
        println!(
            "torsion fiber at eps {:<6}: {} nodes, diameter {:.4}",
            r.eps, r.fiber_size, r.fiber_diameter
        );
    }
    println!("ratios {:?}", t.ratios);
    Ok(())
}
