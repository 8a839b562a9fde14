//! Stable norms on the flat torus graph and on the Hedlund tube graph.

use hj_homog::cover::{build_cover_window, hedlund_model, stable_norm_estimate, tube_changes, GraphComplex};
use hj_homog::effective::HomologyVector;

fn main() -> hj_homog::Result<()> {
    let torus = GraphComplex::flat_torus(2);
    let w = build_cover_window(&torus, 3)?;
    println!("flat torus window R = 3: {} nodes, {} edges", w.len(), w.edge_count());
    let d = stable_norm_estimate(&torus, &HomologyVector::new(vec![2.0, 1.0])?, &[1, 2, 4])?;
    println!("||(2,1)|| ~ {:.3}  ratios {:?}", d.estimate, d.ratios);

    let n = 8;
    let g = hedlund_model(n, 0.1)?;
    println!("Hedlund graph: {} vertices, {} edges", g.n_vertices(), g.edges().len());
    let mut base = 0.0;
    for h in [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0]] {
        let e = stable_norm_estimate(&g, &HomologyVector::new(h.to_vec())?, &[4, 8, 16])?;
        if base == 0.0 {
            base = e.estimate;
        }
        println!(
            "{h:?}: estimate {:.4}, ratio to (1,0,0) {:.3}, tube changes {}",
            e.estimate,
            e.estimate / base,
            tube_changes(n, &g, &e.path_edges)
        );
    }
    Ok(())
}
