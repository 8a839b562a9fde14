use serde::Serialize;

use crate::cover::GraphComplex;
use crate::{Error, Result};

use super::alpha::{bellman_ford, weight, DiscreteAlphaResult};

/// Value of the Mañé potential `Φ_k(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ManeValue {
    Finite(f64),
    /// A negative cycle makes the infimum `−∞` (`k < α(P)`).
    UnboundedBelow,
}

impl ManeValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::UnboundedBelow => None,
        }
    }
}

/// `Φ_k(x, y)`: cheapest path from `x` to `y` for the weights
/// `c − P·z + k·ℓ` (the empty path counts when `x = y`).
pub fn mane_potential(base: &GraphComplex, p: &[f64], k: f64, x: usize, y: usize) -> Result<ManeValue> {
    Ok(match mane_potential_from(base, p, k, x)? {
        Some(d) => ManeValue::Finite(d[y]),
        None => ManeValue::UnboundedBelow,
    })
}

/// `Φ_k(x, ·)` for every vertex, or `None` when unbounded below.
pub fn mane_potential_from(base: &GraphComplex, p: &[f64], k: f64, x: usize) -> Result<Option<Vec<f64>>> {
    if x >= base.n_vertices() {
        return Err(Error::Input(format!("vertex {x} out of range")));
    }
    if p.len() != base.k() {
        return Err(Error::Input("P dimension differs from k".into()));
    }
    let w: Vec<f64> = base.edges().iter().map(|e| weight(p, k, e)).collect();
    let (dist, _, cycle) = bellman_ford(base, &w, Some(&[x]));
    let Some(cycle) = cycle else { return Ok(Some(dist)) };
    // A cycle of weight zero up to round-off means k is the critical value.
    let total: f64 = cycle.iter().map(|&e| w[e]).sum();
    let scale: f64 = cycle.iter().map(|&e| w[e].abs()).sum::<f64>() + 1.0;
    if total < -1e-9 * scale {
        return Ok(None);
    }
    let nudged = k + 1e-10 * (1.0 + k.abs());
    let w: Vec<f64> = base.edges().iter().map(|e| weight(p, nudged, e)).collect();
    let (dist, _, cycle) = bellman_ford(base, &w, Some(&[x]));
    Ok(if cycle.is_some() { None } else { Some(dist) })
}

/// Discrete weak-KAM solution with its edge slacks
/// `s(e) = u(tail) + c − P·z + α·ℓ − u(head)`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretePotential {
    pub u: Vec<f64>,
    pub alpha: f64,
    pub slack: Vec<f64>,
    pub cycle: Vec<usize>,
}

impl DiscretePotential {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Smallest slack on the certifying cycle.
    pub fn cycle_slack(&self) -> f64 {
        self.cycle.iter().map(|&e| self.slack[e]).fold(f64::INFINITY, f64::min)
    }

    pub fn amplitude(&self) -> f64 {
        let hi = self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.u.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// `u(v) = min_{w on the certifying cycle} Φ_α(w, v)`.
pub fn discrete_corrector(base: &GraphComplex, alpha: &DiscreteAlphaResult) -> Result<DiscretePotential> {
    let p = &alpha.p;
    if p.len() != base.k() {
        return Err(Error::Input("P dimension differs from k".into()));
    }
    if alpha.cycle.is_empty() {
        return Err(Error::Input("alpha result carries no certifying cycle".into()));
    }
    let w: Vec<f64> = base.edges().iter().map(|e| weight(p, alpha.alpha, e)).collect();
    let sources: Vec<usize> = alpha.cycle.iter().map(|&e| base.edge(e).tail).collect();
    let (u, _, _) = bellman_ford(base, &w, Some(&sources));
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Consistency(
            "corrector unreachable from the certifying cycle".into(),
        ));
    }
    let slack: Vec<f64> = base
        .edges()
        .iter()
        .zip(&w)
        .map(|(e, we)| u[e.tail] + we - u[e.head])
        .collect();
    let pot = DiscretePotential {
        u,
        alpha: alpha.alpha,
        slack,
        cycle: alpha.cycle.clone(),
    };
    if pot.min_slack() < -1e-9 {
        return Err(Error::Consistency(format!(
            "edge slack {:.3e} below -1e-9; alpha tolerance too loose",
            pot.min_slack()
        )));
    }
    if pot.cycle_slack() > 1e-6 {
        return Err(Error::Consistency(format!(
            "certifying cycle not tight (slack {:.3e})",
            pot.cycle_slack()
        )));
    }
    Ok(pot)
}
