use serde::Serialize;

use crate::hj_grid::{lax_oleinik_step, PeriodicGrid, ValueField};
use crate::models::TonelliModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CellOptions {
    pub dt: f64,
    pub max_steps: usize,
    /// Stop once the sup-change of one sweep is at most this.
    pub tol: f64,
}

impl Default for CellOptions {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            max_steps: 100_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellCorrector {
    pub field: ValueField,
    pub alpha: f64,
    /// `max_x |H(x, P + Dv) − α|` with a Godunov discretization of `Dv`.
    pub residual: f64,
    pub converged: bool,
    pub steps: usize,
    pub last_change: f64,
}

/// Solves the cell problem `H(x, P + Dv) = α(P)` by iterating
/// `v ← T_dt v + α·dt` for `L − P·v`, renormalized to zero mean.
///
/// Returns the last iterate flagged `converged = false` when the step budget
/// runs out.
pub fn cell_corrector(
    model: &TonelliModel,
    p: &[f64],
    alpha: f64,
    grid: PeriodicGrid,
    options: &CellOptions,
) -> Result<CellCorrector> {
    if p.len() != model.dim() {
        return Err(Error::Input("P dimension differs from the model".into()));
    }
    let tilted = model.tilted(p);
    let mut v = ValueField::constant(grid, 0.0)?;
    let mut converged = false;
    let mut steps = 0;
    let mut last_change = f64::INFINITY;
    while steps < options.max_steps {
        let stepped = lax_oleinik_step(&v, &tilted, options.dt)?;
        let shift = alpha * options.dt;
        let mean = stepped.mean() + shift;
        let next = stepped.map(|x| x + shift - mean)?.with_time(0.0);
        last_change = next.sup_distance(&v);
        v = next;
        steps += 1;
        if last_change <= options.tol {
            converged = true;
            break;
        }
    }
    let residual = godunov_residual(model, p, &v, alpha)?;
    Ok(CellCorrector {
        field: v,
        alpha,
        residual,
        converged,
        steps,
        last_change,
    })
}

/// `max_x |Ĥ(x, P + D⁻v, P + D⁺v) − α|` with the Godunov numerical Hamiltonian
/// (per axis for mechanical models; central differences for 2-D custom models).
pub fn godunov_residual(model: &TonelliModel, p: &[f64], v: &ValueField, alpha: f64) -> Result<f64> {
    let g = v.grid();
    let dim = g.dim();
    let n = g.n() as f64;
    let vals = v.values();
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let x = g.coords(i);
        let mut back = [0.0; 2];
        let mut fwd = [0.0; 2];
        for k in 0..dim {
            let mut e = [0i64; 2];
            e[k] = 1;
            let plus = vals[g.shift(i, e)];
            e[k] = -1;
            let minus = vals[g.shift(i, e)];
            back[k] = p[k] + (vals[i] - minus) * n;
            fwd[k] = p[k] + (plus - vals[i]) * n;
        }
        let h = if model.is_mechanical() {
            // H is separable and convex per axis with minimum at q_k = −tilt_k
            let mut q = [0.0; 2];
            for k in 0..dim {
                let c = -model.tilt()[k];
                let lo = back[k].max(c);
                let hi = fwd[k].min(c);
                q[k] = if (lo - c).abs() >= (hi - c).abs() { lo } else { hi };
            }
            model.hamiltonian(&x, &q[..dim])?
        } else if dim == 1 {
            godunov_1d(model, &x, back[0], fwd[0])?
        } else {
            let q = [0.5 * (back[0] + fwd[0]), 0.5 * (back[1] + fwd[1])];
            model.hamiltonian(&x, &q)?
        };
        worst = worst.max((h - alpha).abs());
    }
    Ok(worst)
}

/// Godunov flux of a convex 1-D Hamiltonian: `min_{[a,b]} H` if `a ≤ b`, else
/// `max(H(a), H(b))`.
fn godunov_1d(model: &TonelliModel, x: &[f64], a: f64, b: f64) -> Result<f64> {
    let h = |q: f64| model.hamiltonian(x, &[q]);
    if a > b {
        return Ok(h(a)?.max(h(b)?));
    }
    let (mut lo, mut hi) = (a, b);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    while hi - lo > 1e-9 {
        let c = hi - INV_PHI * (hi - lo);
        let d = lo + INV_PHI * (hi - lo);
        if h(c)? <= h(d)? {
            hi = d;
        } else {
            lo = c;
        }
    }
    h(0.5 * (lo + hi))
}
