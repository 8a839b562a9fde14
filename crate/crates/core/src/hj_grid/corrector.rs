use serde::Serialize;

use crate::models::TonelliModel;
use crate::{Error, Result};

use super::field::{PeriodicGrid, ValueField};
use super::lax::{fast_scale, scaled_step};

/// `u^ε(x, t) = a + P·x − α(P)·t + ε·v(x/ε)` built from a cell corrector `v`.
#[derive(Debug, Clone)]
pub struct AffineCorrectorFamily {
    pub p: Vec<f64>,
    pub a: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Periodic part `ε·v(x/ε)` on the fine grid with `n_cell/ε` points per axis.
    pub periodic: ValueField,
    /// `sup |T_dt u^ε − (u^ε − α dt)|` for one oscillatory step.
    pub residual: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AffineCorrectorSummary {
    pub eps: f64,
    pub dt: f64,
    pub alpha: f64,
    pub residual: f64,
}

impl AffineCorrectorFamily {
    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        let dot: f64 = self.p.iter().zip(x).map(|(p, x)| p * x).sum();
        self.a + dot - self.alpha * t + self.periodic.interpolate(x)
    }

    pub fn summary(&self) -> AffineCorrectorSummary {
        AffineCorrectorSummary {
            eps: self.eps,
            dt: self.dt,
            alpha: self.alpha,
            residual: self.residual,
        }
    }
}

/// Assembles the corrector family and measures its one-step residual.
///
/// Since `T_dt(P·x + w) = P·x + T_dt^{L−P·v} w`, the residual is computed on the
/// periodic part with the tilted model.
pub fn reconstruct_affine_corrector(
    model: &TonelliModel,
    p: &[f64],
    a: f64,
    corrector: &ValueField,
    alpha_p: f64,
    eps: f64,
    dt: f64,
) -> Result<AffineCorrectorFamily> {
    let fast = fast_scale(eps)?;
    let cell = corrector.grid();
    if p.len() != cell.dim() {
        return Err(Error::Input("P dimension does not match the corrector grid".into()));
    }
    let fine = PeriodicGrid::new(cell.dim(), cell.n() * fast)?;
    let values = (0..fine.len())
        .map(|i| {
            let ax = fine.axes(i);
            let mut c = [0usize; 2];
            for k in 0..cell.dim() {
                c[k] = ax[k] % cell.n();
            }
            eps * corrector.values()[cell.index(c)]
        })
        .collect();
    let periodic = ValueField::new(fine, values, 0.0)?;
    let tilted = model.tilted(p);
    let stepped = scaled_step(&periodic, &tilted, fast, dt)?;
    let residual = stepped
        .values()
        .iter()
        .zip(periodic.values())
        .map(|(s, w)| (s - (w - alpha_p * dt)).abs())
        .fold(0.0, f64::max);
    Ok(AffineCorrectorFamily {
        p: p.to_vec(),
        a,
        alpha: alpha_p,
        eps,
        periodic,
        residual,
        dt,
    })
}
