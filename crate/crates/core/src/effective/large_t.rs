use serde::Serialize;

use crate::hj_grid::{solve_cauchy, PeriodicGrid, ValueField};
use crate::models::TonelliModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct LargeTimeEstimate {
    pub alpha: f64,
    /// `(max − min)/T` of the final field.
    pub spread: f64,
    pub t_final: f64,
}

/// `α(P) ≈ −max_x u_T(x)/T` where `u` solves the problem for `L − P·v` from `u₀ = 0`.
pub fn alpha_large_t(
    model: &TonelliModel,
    p: &[f64],
    t_final: f64,
    dt: f64,
    grid: PeriodicGrid,
) -> Result<LargeTimeEstimate> {
    if p.len() != model.dim() {
        return Err(Error::Input("P dimension differs from the model".into()));
    }
    if !(t_final > 0.0) {
        return Err(Error::Input(format!("T must be positive, got {t_final}")));
    }
    let tilted = model.tilted(p);
    let u0 = ValueField::constant(grid, 0.0)?;
    let u = solve_cauchy(&u0, &tilted, t_final, dt)?.field;
    let spread = (u.max() - u.min()) / t_final;
    if spread > 0.1 {
        return Err(Error::NotConverged { spread });
    }
    Ok(LargeTimeEstimate {
        alpha: -u.max() / t_final,
        spread,
        t_final,
    })
}
