//! Effective Hamiltonian `α` and effective Lagrangian `β` of periodic models.
//!
//! `α(P)` is computed by three independent routes: the large-time slope of the
//! Lax-Oleinik semigroup, the min-max formula `min_u max_x H(x, P + Du)`, and (for
//! 1-D mechanical models) a quadrature oracle. `β` is the discrete convex
//! conjugate of a tabulated `α`.

mod cell;
mod large_t;
mod minmax;
mod oracle;

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::hj_grid::PeriodicGrid;
use crate::lattice::LatticeBox;
use crate::models::{legendre_inverse, TonelliModel};
use crate::{Error, Result};

pub use cell::{cell_corrector, godunov_residual, CellCorrector, CellOptions};
pub use large_t::{alpha_large_t, LargeTimeEstimate};
pub use minmax::{alpha_minmax, MinmaxOptions, MinmaxResult};
pub use oracle::{alpha_1d_oracle, alpha_1d_oracle_fn, critical_slope};

/// A class `P ∈ H^1(M, R)` in the coordinates of a fixed cocycle basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyVector(Vec<f64>);

/// A class `h ∈ H_1(M, R)` in the dual basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomologyVector(Vec<f64>);

macro_rules! real_vector {
    ($t:ident) => {
        impl $t {
            pub fn new(components: Vec<f64>) -> Result<Self> {
                if components.is_empty() || components.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Input(format!(
                        "{} needs finite components, got {components:?}",
                        stringify!($t)
                    )));
                }
                Ok(Self(components))
            }

            pub fn components(&self) -> &[f64] {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }
        }
    };
}

real_vector!(CohomologyVector);
real_vector!(HomologyVector);

impl HomologyVector {
    /// Pairing `h·P`.
    pub fn pair(&self, p: &CohomologyVector) -> f64 {
        self.0.iter().zip(&p.0).map(|(a, b)| a * b).sum()
    }
}

/// The route that produced an [`AlphaTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMethod {
    LargeT,
    Minmax,
    Oracle1d,
    Bisection,
    Karp,
    Bruteforce,
}

impl AlphaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LargeT => "large_T",
            Self::Minmax => "minmax",
            Self::Oracle1d => "oracle1d",
            Self::Bisection => "bisection",
            Self::Karp => "karp",
            Self::Bruteforce => "bruteforce",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "large_T" | "large_t" => Self::LargeT,
            "minmax" => Self::Minmax,
            "oracle1d" => Self::Oracle1d,
            "bisection" => Self::Bisection,
            "karp" => Self::Karp,
            "bruteforce" => Self::Bruteforce,
            other => return Err(Error::Input(format!("unknown alpha method `{other}`"))),
        })
    }
}

/// Midpoint convexity along every axis of the P-lattice.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityCheck {
    /// Most negative `α(P−s e) + α(P+s e) − 2α(P)`.
    pub worst_second_difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `α` sampled on a lattice of cohomology classes.
#[derive(Debug, Clone)]
pub struct AlphaTable {
    grid: LatticeBox,
    alpha: Vec<f64>,
    error_bar: Vec<f64>,
    method: AlphaMethod,
    convexity: ConvexityCheck,
}

/// Default P-lattice: 17 points per axis on `[−4, 4]`.
pub fn default_p_grid(dim: usize) -> LatticeBox {
    LatticeBox::symmetric(dim, 4.0, 17).expect("valid default lattice")
}

impl AlphaTable {
    /// Builds a table; `tolerance` is the per-value method tolerance used by the
    /// convexity check (twice it is allowed).
    pub fn new(
        grid: LatticeBox,
        alpha: Vec<f64>,
        error_bar: Vec<f64>,
        method: AlphaMethod,
        tolerance: f64,
    ) -> Result<Self> {
        if alpha.len() != grid.len() || error_bar.len() != grid.len() {
            return Err(Error::Input("alpha table size does not match its lattice".into()));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::Input("alpha values must be finite".into()));
        }
        let convexity = convexity_check(&grid, &alpha, tolerance);
        Ok(Self {
            grid,
            alpha,
            error_bar,
            method,
            convexity,
        })
    }

    pub fn grid(&self) -> &LatticeBox {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn error_bars(&self) -> &[f64] {
        &self.error_bar
    }

    pub fn method(&self) -> AlphaMethod {
        self.method
    }

    pub fn convexity(&self) -> &ConvexityCheck {
        &self.convexity
    }

    /// `min_P α(P)`, which equals `−β(0)`.
    pub fn min(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cols: String = (0..self.grid.dim()).map(|k| format!("P{k},")).collect();
        writeln!(out, "{cols}alpha,method,error_bar")?;
        for (i, (a, e)) in self.alpha.iter().zip(&self.error_bar).enumerate() {
            let p: String = self.grid.point(i).iter().map(|c| format!("{c:.16e},")).collect();
            writeln!(out, "{p}{a:.16e},{},{e:.16e}", self.method.as_str())?;
        }
        Ok(())
    }

    /// Reads a table written by [`AlphaTable::write_csv`]; the lattice is
    /// reconstructed from the listed points.
    pub fn read_csv<R: BufRead>(input: R, tolerance: f64) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "empty alpha table".into(),
        })??;
        let dim = header.split(',').filter(|c| c.starts_with('P')).count();
        if dim == 0 {
            return Err(Error::Parse {
                line: 1,
                msg: "no P columns".into(),
            });
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut alpha = Vec::new();
        let mut bars = Vec::new();
        let mut method = None;
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line: i + 2,
                msg: msg.to_string(),
            };
            let cols: Vec<&str> = line.trim().split(',').collect();
            if cols.len() != dim + 3 {
                return Err(perr("wrong column count"));
            }
            let p = cols[..dim]
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| perr("bad P")))
                .collect::<Result<Vec<_>>>()?;
            points.push(p);
            alpha.push(cols[dim].parse().map_err(|_| perr("bad alpha"))?);
            method = Some(AlphaMethod::parse(cols[dim + 1])?);
            bars.push(cols[dim + 2].parse().map_err(|_| perr("bad error bar"))?);
        }
        let method = method.ok_or(Error::Parse {
            line: 0,
            msg: "no rows".into(),
        })?;
        let grid = lattice_from_points(&points, dim)?;
        Self::new(grid, alpha, bars, method, tolerance)
    }
}

fn lattice_from_points(points: &[Vec<f64>], dim: usize) -> Result<LatticeBox> {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let counts_total = points.len();
    let count = (counts_total as f64).powf(1.0 / dim as f64).round() as usize;
    if count < 2 || count.pow(dim as u32) != counts_total {
        return Err(Error::Parse {
            line: 0,
            msg: "alpha table is not a square lattice".into(),
        });
    }
    let step = (hi[0] - lo[0]) / (count - 1) as f64;
    let grid = LatticeBox::new(lo, step, vec![count; dim])?;
    for (i, p) in points.iter().enumerate() {
        if grid.snap(p) != Some(i) {
            return Err(Error::Parse {
                line: i + 2,
                msg: "rows are not in lattice order".into(),
            });
        }
    }
    Ok(grid)
}

fn convexity_check(grid: &LatticeBox, alpha: &[f64], tolerance: f64) -> ConvexityCheck {
    let mut worst = f64::INFINITY;
    for i in 0..grid.len() {
        let m = grid.multi_index(i);
        for axis in 0..grid.dim() {
            if m[axis] == 0 || m[axis] + 1 >= grid.counts()[axis] {
                continue;
            }
            let mut lo = m.clone();
            lo[axis] -= 1;
            let mut hi = m.clone();
            hi[axis] += 1;
            let d = alpha[grid.flat_index(&lo)] + alpha[grid.flat_index(&hi)] - 2.0 * alpha[i];
            worst = worst.min(d);
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    ConvexityCheck {
        worst_second_difference: worst,
        tolerance,
        passed: worst >= -2.0 * tolerance,
    }
}

/// Parameters selecting and configuring a continuous `α` route.
#[derive(Debug, Clone)]
pub enum AlphaRoute {
    LargeT { n: usize, t_final: f64, dt: f64 },
    Minmax { n: usize, options: MinmaxOptions },
    Oracle1d,
}

impl AlphaRoute {
    fn method(&self) -> AlphaMethod {
        match self {
            Self::LargeT { .. } => AlphaMethod::LargeT,
            Self::Minmax { .. } => AlphaMethod::Minmax,
            Self::Oracle1d => AlphaMethod::Oracle1d,
        }
    }

    /// Tolerance attached to values of this route.
    pub fn tolerance(&self) -> f64 {
        match self {
            Self::Oracle1d => 1e-8,
            _ => 0.02,
        }
    }
}

/// Tabulates `α` over `grid` by `route`; P-values are evaluated in parallel.
pub fn alpha_table(model: &TonelliModel, grid: &LatticeBox, route: &AlphaRoute) -> Result<AlphaTable> {
    if grid.dim() != model.dim() {
        return Err(Error::Input("P-lattice dimension differs from the model".into()));
    }
    let rows: Vec<Result<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            match route {
                AlphaRoute::LargeT { n, t_final, dt } => {
                    let g = PeriodicGrid::new(model.dim(), *n)?;
                    let est = alpha_large_t(model, &p, *t_final, *dt, g)?;
                    Ok((est.alpha, est.spread))
                }
                AlphaRoute::Minmax { n, options } => {
                    let g = PeriodicGrid::new(model.dim(), *n)?;
                    let r = alpha_minmax(model, &p, g, options)?;
                    Ok((r.alpha, r.smoothing_gap))
                }
                AlphaRoute::Oracle1d => {
                    model
                        .mechanical_parts()
                        .filter(|(m, _)| m.len() == 1 && m[0] == 1.0)
                        .ok_or(Error::UnsupportedModel("the 1-D quadrature oracle"))?;
                    let shifted = |x: f64| model.potential_at(&[x]).unwrap_or(f64::NAN);
                    let tilt = model.tilt()[0];
                    Ok((alpha_1d_oracle_fn(shifted, p[0] + tilt)?, 0.0))
                }
            }
        })
        .collect();
    let (alpha, bars): (Vec<f64>, Vec<f64>) = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    AlphaTable::new(grid.clone(), alpha, bars, route.method(), route.tolerance())
}

/// `β(h)` as the discrete conjugate of the table.
pub fn beta_from_alpha(alpha: &AlphaTable, h: &HomologyVector) -> Result<f64> {
    legendre_inverse(&alpha.grid, &alpha.alpha, h.components())
}

/// `β` sampled on a slope lattice; `None` marks slopes whose conjugate is not
/// resolved by the P-lattice (treated as `+∞`).
#[derive(Debug, Clone)]
pub struct BetaTable {
    slopes: LatticeBox,
    values: Vec<Option<f64>>,
}

impl BetaTable {
    pub fn new(slopes: LatticeBox, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != slopes.len() {
            return Err(Error::Input("beta table size does not match its lattice".into()));
        }
        Ok(Self { slopes, values })
    }

    pub fn from_fn(slopes: LatticeBox, f: impl Fn(&[f64]) -> Option<f64>) -> Self {
        let values = slopes.points().map(|h| f(&h)).collect();
        Self { slopes, values }
    }

    /// Conjugates `alpha` at every slope of `slopes`.
    pub fn from_alpha(alpha: &AlphaTable, slopes: LatticeBox) -> Result<Self> {
        let values = slopes
            .points()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|h| match legendre_inverse(&alpha.grid, &alpha.alpha, &h) {
                Ok(b) => Ok(Some(b)),
                Err(Error::EnlargeGrid) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { slopes, values })
    }

    pub fn slopes(&self) -> &LatticeBox {
        &self.slopes
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.slopes.dim()
    }

    /// Multilinear interpolation; `None` outside the lattice or next to an
    /// unresolved node.
    pub fn eval(&self, h: &[f64]) -> Option<f64> {
        if self.slopes.dim() == 1 {
            let s = (h[0] - self.slopes.lo()[0]) / self.slopes.step();
            let last = self.values.len() - 1;
            if !(s >= -1e-9 && s <= last as f64 + 1e-9) {
                return None;
            }
            let s = s.clamp(0.0, last as f64);
            let i = (s.floor() as usize).min(last.saturating_sub(1));
            let t = s - i as f64;
            if t > 1.0 - 1e-9 && last > 0 {
                return self.values[i + 1];
            }
            let a = self.values[i]?;
            if t < 1e-9 || last == 0 {
                return Some(a);
            }
            let b = self.values[i + 1]?;
            return Some(a + t * (b - a));
        }
        let stencil = self.slopes.interpolation_stencil(h)?;
        let mut total = 0.0;
        for (i, w) in stencil {
            total += w * self.values[i]?;
        }
        Some(total)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cols: String = (0..self.slopes.dim()).map(|k| format!("h{k},")).collect();
        writeln!(out, "{cols}beta")?;
        for (i, b) in self.values.iter().enumerate() {
            let h: String = self.slopes.point(i).iter().map(|c| format!("{c:.16e},")).collect();
            match b {
                Some(b) => writeln!(out, "{h}{b:.16e}")?,
                None => writeln!(out, "{h}inf")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::double_conjugate;

    fn quadratic_table(count: usize) -> AlphaTable {
        let g = LatticeBox::symmetric(1, 4.0, count).unwrap();
        let a: Vec<f64> = g.points().map(|p| p[0] * p[0] / 2.0).collect();
        let n = a.len();
        AlphaTable::new(g, a, vec![0.0; n], AlphaMethod::Oracle1d, 1e-12).unwrap()
    }

    #[test]
    fn beta_of_quadratic() {
        let t = quadratic_table(801);
        let b = beta_from_alpha(&t, &HomologyVector::new(vec![1.0]).unwrap()).unwrap();
        assert!((b - 0.5).abs() < 1e-3);
        let b0 = beta_from_alpha(&t, &HomologyVector::new(vec![0.0]).unwrap()).unwrap();
        assert_eq!(b0, -t.min());
        assert!(t.convexity().passed);
    }

    #[test]
    fn pendulum_beta_at_zero() {
        let m = TonelliModel::pendulum(1.0);
        let t = alpha_table(&m, &default_p_grid(1), &AlphaRoute::Oracle1d).unwrap();
        let b0 = beta_from_alpha(&t, &HomologyVector::new(vec![0.0]).unwrap()).unwrap();
        assert!((b0 + 1.0).abs() < 1e-9);
        assert!(t.convexity().passed);
    }

    #[test]
    fn double_conjugate_of_quadratic_recovers_it() {
        let t = quadratic_table(81);
        let slopes = LatticeBox::symmetric(1, 4.0, 801).unwrap();
        let dc = double_conjugate(t.grid(), t.values(), &slopes).unwrap();
        for (d, a) in dc.iter().zip(t.values()) {
            assert!(*d <= a + 1e-6);
            assert!((d - a).abs() < 2e-3);
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = quadratic_table(17);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = AlphaTable::read_csv(buf.as_slice(), 1e-12).unwrap();
        assert_eq!(back.values(), t.values());
        assert_eq!(back.grid(), t.grid());
        assert_eq!(back.method(), AlphaMethod::Oracle1d);
    }

    #[test]
    fn convexity_flags_concave_tables() {
        let g = LatticeBox::symmetric(1, 1.0, 5).unwrap();
        let t = AlphaTable::new(
            g,
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
            vec![0.0; 5],
            AlphaMethod::Minmax,
            0.02,
        )
        .unwrap();
        assert!(!t.convexity().passed);
    }

    #[test]
    fn beta_table_interpolates_and_marks_infinity() {
        let t = quadratic_table(33);
        let beta = BetaTable::from_alpha(&t, LatticeBox::symmetric(1, 8.0, 33).unwrap()).unwrap();
        assert!(beta.eval(&[7.5]).is_none());
        assert!((beta.eval(&[1.25]).unwrap() - 0.78125).abs() < 0.05);
        assert!(beta.eval(&[9.0]).is_none());
    }

    #[test]
    fn vectors_reject_nan() {
        assert!(CohomologyVector::new(vec![f64::NAN]).is_err());
        let p = CohomologyVector::new(vec![1.0, 2.0]).unwrap();
        let h = HomologyVector::new(vec![3.0, -1.0]).unwrap();
        assert_eq!(h.pair(&p), 1.0);
    }
}
