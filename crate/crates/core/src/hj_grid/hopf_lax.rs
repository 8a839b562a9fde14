use serde::Serialize;

use crate::effective::BetaTable;
use crate::lattice::LatticeBox;
use crate::{Error, Result};

/// Initial data sampled on a box of `H_1(M, R) ≅ R^k`.
#[derive(Debug, Clone)]
pub struct BoxField {
    lattice: LatticeBox,
    values: Vec<f64>,
}

impl BoxField {
    pub fn new(lattice: LatticeBox, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Input(format!(
                "{} values for a lattice of {} nodes",
                values.len(),
                lattice.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("box field values must be finite".into()));
        }
        Ok(Self { lattice, values })
    }

    pub fn from_fn(lattice: LatticeBox, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = lattice.points().map(|x| f(&x)).collect();
        Self::new(lattice, values)
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfLaxValue {
    pub value: f64,
    pub argmin: Vec<f64>,
}

/// `u(y, t) = min_x f(x) + t·β((y − x)/t)` over the nodes of `f`'s lattice.
///
/// Slopes outside the range of `beta` count as `+∞`.
pub fn hopf_lax_effective(f: &BoxField, beta: &BetaTable, y: &[f64], t: f64) -> Result<HopfLaxValue> {
    if !(t > 0.0) {
        return Err(Error::Input(format!("Hopf-Lax needs t > 0, got {t}")));
    }
    let lat = &f.lattice;
    if y.len() != lat.dim() || beta.dim() != lat.dim() {
        return Err(Error::Input("dimension mismatch in Hopf-Lax evaluation".into()));
    }
    let mut best = f64::INFINITY;
    let mut best_idx = usize::MAX;
    let mut slope = vec![0.0; lat.dim()];
    for (i, &fx) in f.values.iter().enumerate() {
        let x = lat.point(i);
        for k in 0..slope.len() {
            slope[k] = (y[k] - x[k]) / t;
        }
        let Some(b) = beta.eval(&slope) else { continue };
        let cand = fx + t * b;
        if cand < best {
            best = cand;
            best_idx = i;
        }
    }
    if best_idx == usize::MAX {
        return Err(Error::Window(format!(
            "no lattice point reaches y={y:?} at t={t} within the slope table"
        )));
    }
    if lat.is_boundary(best_idx) {
        return Err(Error::Window(format!(
            "Hopf-Lax minimizer for y={y:?} lies on the window boundary"
        )));
    }
    Ok(HopfLaxValue {
        value: best,
        argmin: lat.point(best_idx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_beta(half: f64, count: usize) -> BetaTable {
        let slopes = LatticeBox::symmetric(1, half, count).unwrap();
        BetaTable::from_fn(slopes, |h| Some(h[0] * h[0] / 2.0))
    }

    #[test]
    fn zero_data_stays_zero() {
        let f = BoxField::from_fn(LatticeBox::symmetric(1, 2.0, 81).unwrap(), |_| 0.0).unwrap();
        let beta = quadratic_beta(4.0, 161);
        for y in [-1.0, 0.0, 0.7] {
            let r = hopf_lax_effective(&f, &beta, &[y], 0.5).unwrap();
            assert!(r.value.abs() < 1e-12);
            assert!((r.argmin[0] - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_value_at_half() {
        let f = BoxField::from_fn(LatticeBox::symmetric(1, 3.0, 6001).unwrap(), |x| x[0].abs()).unwrap();
        let beta = quadratic_beta(4.0, 8001);
        let r = hopf_lax_effective(&f, &beta, &[0.5], 1.0).unwrap();
        assert!((r.value - 0.125).abs() < 1e-5, "{}", r.value);
        let r = hopf_lax_effective(&f, &beta, &[2.0], 1.0).unwrap();
        assert!((r.value - 1.5).abs() < 1e-5);
    }

    #[test]
    fn affine_data_follows_conjugacy() {
        // β(h) = h²/2 is conjugate to α(P) = P²/2
        let p = 0.75;
        let f = BoxField::from_fn(LatticeBox::symmetric(1, 3.0, 3001).unwrap(), |x| p * x[0]).unwrap();
        let beta = quadratic_beta(4.0, 8001);
        let r = hopf_lax_effective(&f, &beta, &[0.4], 1.0).unwrap();
        assert!((r.value - (p * 0.4 - p * p / 2.0)).abs() < 1e-5);
    }

    #[test]
    fn boundary_minimizer_is_an_error() {
        let f = BoxField::from_fn(LatticeBox::symmetric(1, 1.0, 41).unwrap(), |x| -x[0]).unwrap();
        let beta = quadratic_beta(8.0, 321);
        assert!(matches!(
            hopf_lax_effective(&f, &beta, &[0.9], 0.1),
            Err(Error::Window(_))
        ));
    }
}
