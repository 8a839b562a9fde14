use crate::models::PotentialTable;
use crate::{Error, Result};

const PANELS: usize = 4096;
const BISECTION_TOL: f64 = 1e-10;

/// Composite Simpson rule for `∫₀¹ √(2(E − U(x))) dx` on [`PANELS`] panels.
fn action(u: &[f64], e: f64) -> f64 {
    let h = 1.0 / PANELS as f64;
    let g = |v: f64| (2.0 * (e - v)).max(0.0).sqrt();
    let mut total = g(u[0]) + g(u[PANELS]);
    for (i, &v) in u.iter().enumerate().take(PANELS).skip(1) {
        total += if i % 2 == 1 { 4.0 * g(v) } else { 2.0 * g(v) };
    }
    total * h / 3.0
}

fn samples(u: impl Fn(f64) -> f64) -> Result<(Vec<f64>, f64)> {
    let vals: Vec<f64> = (0..=PANELS).map(|i| u(i as f64 / PANELS as f64)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("potential is not finite".into()));
    }
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((vals, max))
}

/// `P_c = ∫₀¹ √(2(max U − U))`, the half-width of the flat piece of `α`.
pub fn critical_slope(u: impl Fn(f64) -> f64) -> Result<f64> {
    let (vals, max) = samples(u)?;
    Ok(action(&vals, max))
}

/// `α(P)` of `L = v²/2 − U(x)` on `T¹`: `max U` for `|P| ≤ P_c`, otherwise the
/// energy `E` with `∫₀¹ √(2(E − U)) = |P|`.
pub fn alpha_1d_oracle_fn(u: impl Fn(f64) -> f64, p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::Input(format!("P={p} is not finite")));
    }
    let (vals, max) = samples(u)?;
    let target = p.abs();
    if target <= action(&vals, max) {
        return Ok(max);
    }
    // at E = max U + P²/2 the action already exceeds |P|
    let (mut lo, mut hi) = (max, max + 0.5 * target * target);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if action(&vals, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`alpha_1d_oracle_fn`] for a tabulated potential.
pub fn alpha_1d_oracle(table: &PotentialTable, p: f64) -> Result<f64> {
    alpha_1d_oracle_fn(|x| table.eval(x), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(x: f64) -> f64 {
        (2.0 * PI * x).cos()
    }

    #[test]
    fn constant_potential() {
        for p in [0.5, 1.0, 3.0] {
            let a = alpha_1d_oracle_fn(|_| 0.0, p).unwrap();
            assert!((a - p * p / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_piece() {
        assert_eq!(alpha_1d_oracle_fn(cosine, 0.0).unwrap(), 1.0);
        let pc = critical_slope(cosine).unwrap();
        assert!((pc - 4.0 / PI).abs() < 1e-6);
        assert_eq!(alpha_1d_oracle_fn(cosine, 0.99 * pc).unwrap(), 1.0);
        assert!(alpha_1d_oracle_fn(cosine, 1.01 * pc).unwrap() > 1.0);
    }

    #[test]
    fn frozen_value_at_ten() {
        let a = alpha_1d_oracle_fn(cosine, 10.0).unwrap();
        // E ≈ P²/2 + 1/(4P²) from expanding the action in 1/E
        assert!((a - 50.0025).abs() < 1e-5);
        assert!((a - ORACLE_P10).abs() < 1e-9, "{a:.12}");
    }

    const ORACLE_P10: f64 = 5.000_250_007_817_703_6e1;

    #[test]
    fn table_and_closure_agree() {
        let t = PotentialTable::from_fn(8192, cosine).unwrap();
        let a = alpha_1d_oracle(&t, 2.0).unwrap();
        let b = alpha_1d_oracle_fn(cosine, 2.0).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn rejects_nan() {
        assert!(alpha_1d_oracle_fn(|_| f64::NAN, 1.0).is_err());
    }
}
