//! Discrete effective Hamiltonian, Mañé potential and corrector on small graphs.

use hj_homog::cover::GraphComplex;
use hj_homog::discrete_weakkam::{
    alpha_bruteforce, alpha_discrete, alpha_karp_exact, discrete_corrector, mane_potential, random_graph,
};

fn main() -> hj_homog::Result<()> {
    let g = GraphComplex::flat_torus(2);
    for p in [[0.0, 0.0], [0.5, 0.0], [1.5, -0.5]] {
        let a = alpha_discrete(&g, &p, 1e-9)?;
        println!("flat torus alpha({p:?}) = {:.6} via cycle {:?}", a.alpha, a.cycle);
    }

    let g = random_graph(7, 6, 1, 6, true)?;
    println!("random graph: {} vertices, {} edges", g.n_vertices(), g.edges().len());
    for p in [-1.0, 0.0, 0.75] {
        let a = alpha_discrete(&g, &[p], 1e-9)?;
        let exact = alpha_karp_exact(&g, &[p])?;
        let brute = alpha_bruteforce(&g, &[p])?.alpha;
        let u = discrete_corrector(&g, &a)?;
        println!(
            "P = {p:+}: bisection {:.9}, Karp {exact}, enumeration {brute:.9}; corrector amplitude {:.4}, min slack {:.2e}",
            a.alpha,
            u.amplitude(),
            u.min_slack()
        );
        let m = mane_potential(&g, &[p], a.alpha, 0, 3)?;
        println!("         Mañé potential 0 -> 3 at k = alpha: {m:?}");
    }
    Ok(())
}
