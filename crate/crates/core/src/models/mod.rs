//! Tonelli Lagrangians and Hamiltonians on the periodic domain `[0,1)^dim`.
//!
//! A [`TonelliModel`] is either *mechanical* (`L = ½ Σ m_k v_k² − U(x)`, with
//! closed-form Hamiltonian and derivatives) or *custom* (a user closure, with an
//! optional closed-form Hamiltonian). Every model can be translated in `x` and
//! tilted by a closed one-form `P`, which replaces `L` by `L − P·v` and `H(x, p)` by
//! `H(x, p + P)`.

mod dynamics;
mod legendre;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::{Error, Point, Result};

pub use dynamics::{euler_lagrange_integrate, Trajectory};
pub use legendre::{double_conjugate, legendre_inverse, legendre_transform};

/// Closure signature for custom Lagrangians and Hamiltonians: `(x, v) -> value`.
pub type DensityFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Step of the central differences used when closed-form derivatives are absent.
pub const FD_STEP: f64 = 1e-5;

/// Points per axis of the `x` sample grid used by [`TonelliModel::v_bound`].
const BOUND_SAMPLES: usize = 16;

/// A 1-periodic potential sampled on a uniform grid, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    values: Vec<f64>,
}

impl PotentialTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Input("potential table needs at least 2 samples".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("potential sample {i} is not finite")));
        }
        Ok(Self { values })
    }

    /// Samples `f` at `i / m` for `i = 0..m`.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|i| f(i as f64 / m as f64)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.values.len();
        let s = x.rem_euclid(1.0) * m as f64;
        let i = (s.floor() as usize).min(m - 1);
        let t = s - i as f64;
        let a = self.values[i];
        let b = self.values[(i + 1) % m];
        a + t * (b - a)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Potential energy `U(x)` of a mechanical model.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// `A cos(2πx₁)`
    Cosine {
        amplitude: f64,
    },
    /// `A cos(2πx₁) cos(2πx₂)`
    CosineProduct {
        amplitude: f64,
    },
    /// 1-D sampled table.
    Table(PotentialTable),
}

impl Potential {
    pub fn value(&self, x: &[f64]) -> f64 {
        use std::f64::consts::TAU;
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine { amplitude } => amplitude * (TAU * x[0]).cos(),
            Potential::CosineProduct { amplitude } => amplitude * (TAU * x[0]).cos() * (TAU * x[1]).cos(),
            Potential::Table(t) => t.eval(x[0]),
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        use std::f64::consts::TAU;
        match self {
            Potential::Zero => out.iter_mut().for_each(|g| *g = 0.0),
            Potential::Cosine { amplitude } => {
                out[0] = -TAU * amplitude * (TAU * x[0]).sin();
                out.iter_mut().skip(1).for_each(|g| *g = 0.0);
            }
            Potential::CosineProduct { amplitude } => {
                let (s0, c0) = (TAU * x[0]).sin_cos();
                let (s1, c1) = (TAU * x[1]).sin_cos();
                out[0] = -TAU * amplitude * s0 * c1;
                out[1] = -TAU * amplitude * c0 * s1;
            }
            Potential::Table(t) => {
                out[0] = (t.eval(x[0] + FD_STEP) - t.eval(x[0] - FD_STEP)) / (2.0 * FD_STEP);
            }
        }
    }
}

#[derive(Clone)]
enum Kind {
    Mechanical {
        mass: [f64; 2],
        potential: Potential,
    },
    Custom {
        lagrangian: DensityFn,
        hamiltonian: Option<DensityFn>,
    },
}

/// A Tonelli Lagrangian/Hamiltonian pair on `[0,1)^dim`, `dim ∈ {1, 2}`.
#[derive(Clone)]
pub struct TonelliModel {
    name: String,
    dim: usize,
    kind: Kind,
    offset: [f64; 2],
    tilt: [f64; 2],
}

impl fmt::Debug for TonelliModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TonelliModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("offset", &&self.offset[..self.dim])
            .field("tilt", &&self.tilt[..self.dim])
            .finish()
    }
}

impl TonelliModel {
    /// `L = |v|²/2`.
    pub fn flat(dim: usize) -> Self {
        Self::mechanical("flat", dim, [1.0, 1.0], Potential::Zero)
    }

    /// `L = v²/2 − A cos(2πx)`.
    pub fn pendulum(amplitude: f64) -> Self {
        Self::mechanical("pendulum", 1, [1.0, 1.0], Potential::Cosine { amplitude })
    }

    /// `L = (v₁² + 2v₂²)/2 − A cos(2πx₁) cos(2πx₂)`.
    pub fn aniso2d(amplitude: f64) -> Self {
        Self::mechanical("aniso2d", 2, [1.0, 2.0], Potential::CosineProduct { amplitude })
    }

    /// `L = v²/2 − U(x)` with `U` a sampled periodic table.
    pub fn tabulated(table: PotentialTable) -> Self {
        Self::mechanical("table", 1, [1.0, 1.0], Potential::Table(table))
    }

    pub fn mechanical(name: &str, dim: usize, mass: [f64; 2], potential: Potential) -> Self {
        assert!(dim == 1 || dim == 2, "models live on T^1 or T^2");
        Self {
            name: name.to_string(),
            dim,
            kind: Kind::Mechanical { mass, potential },
            offset: [0.0; 2],
            tilt: [0.0; 2],
        }
    }

    /// A model given by an arbitrary Lagrangian closure. Without a Hamiltonian
    /// closure, `H` is computed by numerical Legendre transform.
    pub fn custom(name: &str, dim: usize, lagrangian: DensityFn, hamiltonian: Option<DensityFn>) -> Self {
        assert!(dim == 1 || dim == 2, "models live on T^1 or T^2");
        Self {
            name: name.to_string(),
            dim,
            kind: Kind::Custom {
                lagrangian,
                hamiltonian,
            },
            offset: [0.0; 2],
            tilt: [0.0; 2],
        }
    }

    /// Builds a preset by name: `flat`, `pendulum`, `aniso2d`.
    pub fn preset(name: &str, dim: usize, amplitude: f64) -> Result<Self> {
        match name {
            "flat" => Ok(Self::flat(dim)),
            "pendulum" => Ok(Self::pendulum(amplitude)),
            "aniso2d" => Ok(Self::aniso2d(amplitude)),
            other => Err(Error::Input(format!("unknown model preset `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tilt(&self) -> &[f64] {
        &self.tilt[..self.dim]
    }

    /// The model `x ↦ L(x + shift, v)`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for (o, s) in out.offset.iter_mut().zip(shift) {
            *o += s;
        }
        out
    }

    /// The model `L − P·v`, i.e. `H(x, p + P)`.
    pub fn tilted(&self, p: &[f64]) -> Self {
        let mut out = self.clone();
        for (t, q) in out.tilt.iter_mut().zip(p) {
            *t += q;
        }
        out
    }

    pub fn is_mechanical(&self) -> bool {
        matches!(self.kind, Kind::Mechanical { .. })
    }

    /// Mass vector and potential for mechanical models.
    pub fn mechanical_parts(&self) -> Option<(&[f64], &Potential)> {
        match &self.kind {
            Kind::Mechanical { mass, potential } => Some((&mass[..self.dim], potential)),
            Kind::Custom { .. } => None,
        }
    }

    #[inline]
    fn shifted(&self, x: &[f64]) -> [f64; 2] {
        let mut y = [0.0; 2];
        for k in 0..self.dim {
            y[k] = x[k] + self.offset[k];
        }
        y
    }

    #[inline]
    fn tilt_dot(&self, v: &[f64]) -> f64 {
        (0..self.dim).map(|k| self.tilt[k] * v[k]).sum()
    }

    /// Potential `U(x)` (translated) of a mechanical model.
    pub fn potential_at(&self, x: &[f64]) -> Option<f64> {
        let (_, pot) = self.mechanical_parts()?;
        Some(pot.value(&self.shifted(x)[..self.dim]))
    }

    /// Velocity-only part `½ Σ m v² − P·v` of a mechanical model.
    #[inline]
    pub fn kinetic(&self, v: &[f64]) -> Option<f64> {
        let (mass, _) = self.mechanical_parts()?;
        let k: f64 = (0..self.dim).map(|i| 0.5 * mass[i] * v[i] * v[i]).sum();
        Some(k - self.tilt_dot(v))
    }

    /// `L(x, v)` including translation and tilt.
    #[inline]
    pub fn lagrangian(&self, x: &[f64], v: &[f64]) -> f64 {
        let y = self.shifted(x);
        let y = &y[..self.dim];
        match &self.kind {
            Kind::Mechanical { mass, potential } => {
                let k: f64 = (0..self.dim).map(|i| 0.5 * mass[i] * v[i] * v[i]).sum();
                k - potential.value(y) - self.tilt_dot(v)
            }
            Kind::Custom { lagrangian, .. } => lagrangian(y, &v[..self.dim]) - self.tilt_dot(v),
        }
    }

    /// `L(x, v)`, failing on non-finite values.
    pub fn lagrangian_checked(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let l = self.lagrangian(x, v);
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::ModelEvaluation(Point {
                x: x.to_vec(),
                v: v.to_vec(),
            }))
        }
    }

    /// `H(x, p)`: closed form when available, numerical Legendre transform otherwise.
    pub fn hamiltonian(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        match &self.kind {
            Kind::Mechanical { mass, potential } => {
                let y = self.shifted(x);
                let k: f64 = (0..self.dim)
                    .map(|i| {
                        let q = p[i] + self.tilt[i];
                        0.5 * q * q / mass[i]
                    })
                    .sum();
                Ok(k + potential.value(&y[..self.dim]))
            }
            Kind::Custom {
                hamiltonian: Some(h), ..
            } => {
                let y = self.shifted(x);
                let q: Vec<f64> = (0..self.dim).map(|i| p[i] + self.tilt[i]).collect();
                Ok(h(&y[..self.dim], &q))
            }
            Kind::Custom { hamiltonian: None, .. } => legendre_transform(self, x, p),
        }
    }

    /// `∂H/∂p`: closed form for mechanical models, central differences otherwise.
    pub fn hamiltonian_p(&self, x: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        if let Kind::Mechanical { mass, .. } = &self.kind {
            for i in 0..self.dim {
                out[i] = (p[i] + self.tilt[i]) / mass[i];
            }
            return Ok(());
        }
        let mut q = p[..self.dim].to_vec();
        for i in 0..self.dim {
            q[i] = p[i] + FD_STEP;
            let hi = self.hamiltonian(x, &q)?;
            q[i] = p[i] - FD_STEP;
            let lo = self.hamiltonian(x, &q)?;
            q[i] = p[i];
            out[i] = (hi - lo) / (2.0 * FD_STEP);
        }
        Ok(())
    }

    /// Momentum `L_v(x, v)`.
    pub fn momentum(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Mechanical { mass, .. } => {
                for i in 0..self.dim {
                    out[i] = mass[i] * v[i] - self.tilt[i];
                }
            }
            Kind::Custom { .. } => {
                let mut w = v[..self.dim].to_vec();
                for i in 0..self.dim {
                    w[i] = v[i] + FD_STEP;
                    let hi = self.lagrangian(x, &w);
                    w[i] = v[i] - FD_STEP;
                    let lo = self.lagrangian(x, &w);
                    w[i] = v[i];
                    out[i] = (hi - lo) / (2.0 * FD_STEP);
                }
            }
        }
    }

    /// Smallest `R ∈ {1, 2, 4, …}` with `L(x, R e)/R > slope + 1` for every sampled
    /// `x` and every probe direction `e`.
    pub fn v_bound(&self, slope: f64) -> Result<f64> {
        if !slope.is_finite() {
            return Err(Error::Input(format!("slope {slope} is not finite")));
        }
        let xs = sample_points(self.dim, BOUND_SAMPLES);
        let dirs = probe_directions(self.dim);
        let mut radius = 1.0_f64;
        for _ in 0..48 {
            let mut ok = true;
            'scan: for x in &xs {
                for e in &dirs {
                    let v: Vec<f64> = e.iter().map(|c| c * radius).collect();
                    let l = self.lagrangian_checked(x, &v)?;
                    if l / radius <= slope + 1.0 {
                        ok = false;
                        break 'scan;
                    }
                }
            }
            if ok {
                return Ok(radius);
            }
            radius *= 2.0;
        }
        Err(Error::Input(format!(
            "model `{}` shows no superlinear growth up to |v| = {radius}",
            self.name
        )))
    }
}

/// Uniform samples of `[0,1)^dim` with `m` points per axis.
pub(crate) fn sample_points(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
    if dim == 1 {
        axis.iter().map(|&a| vec![a]).collect()
    } else {
        axis.iter()
            .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
            .collect()
    }
}

fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        let d = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![d, d],
            vec![d, -d],
            vec![-d, d],
            vec![-d, -d],
        ]
    }
}

/// Superlinearity ratios `L(x, s e)/s` at `s ∈ {R, 2R, 4R}` for one sample.
#[derive(Debug, Clone, Serialize)]
pub struct SuperlinearityRow {
    pub x: Vec<f64>,
    pub direction: Vec<f64>,
    pub ratios: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct TonelliReport {
    pub model: String,
    /// Velocity spacing of the second-difference stencil.
    pub delta: f64,
    /// Minimum of `L(x,v+δ) + L(x,v−δ) − 2L(x,v)` over the sample set.
    pub min_second_difference: f64,
    pub worst_x: Vec<f64>,
    pub worst_v: Vec<f64>,
    pub radius: f64,
    pub superlinearity: Vec<SuperlinearityRow>,
    pub convexity_pass: bool,
    pub superlinearity_pass: bool,
}

impl TonelliReport {
    pub fn passed(&self) -> bool {
        self.convexity_pass && self.superlinearity_pass
    }
}

/// Tolerance on the convexity gap below which a model is rejected.
pub const CONVEXITY_TOLERANCE: f64 = -1e-9;

/// Scans second differences in `v` and superlinearity ratios over a sample grid.
pub fn check_tonelli(model: &TonelliModel, samples: usize) -> Result<TonelliReport> {
    if samples < 8 {
        return Err(Error::Input(format!("need at least 8 samples per axis, got {samples}")));
    }
    let dim = model.dim();
    let radius = model.v_bound(0.0).unwrap_or(1.0);
    let vmax = 2.0 * radius;
    let delta = 2.0 * vmax / samples as f64;
    let xs = sample_points(dim, samples);
    let vs: Vec<Vec<f64>> = sample_points(dim, samples)
        .into_iter()
        .map(|u| u.iter().map(|c| -vmax + 2.0 * vmax * c).collect())
        .collect();
    let mut stencil_dirs: Vec<Vec<f64>> = (0..dim)
        .map(|k| (0..dim).map(|j| if j == k { delta } else { 0.0 }).collect())
        .collect();
    if dim == 2 {
        stencil_dirs.push(vec![delta, delta]);
    }

    let mut worst = f64::INFINITY;
    let mut worst_x = Vec::new();
    let mut worst_v = Vec::new();
    for x in &xs {
        for v in &vs {
            let centre = model.lagrangian_checked(x, v)?;
            for d in &stencil_dirs {
                let plus: Vec<f64> = v.iter().zip(d).map(|(a, b)| a + b).collect();
                let minus: Vec<f64> = v.iter().zip(d).map(|(a, b)| a - b).collect();
                let gap = model.lagrangian_checked(x, &plus)? + model.lagrangian_checked(x, &minus)? - 2.0 * centre;
                if gap < worst {
                    worst = gap;
                    worst_x = x.clone();
                    worst_v = v.clone();
                }
            }
        }
    }

    let mut rows = Vec::new();
    let mut superlinear = true;
    for x in &xs {
        for e in probe_directions(dim) {
            let mut ratios = [0.0; 3];
            for (slot, s) in ratios.iter_mut().zip([radius, 2.0 * radius, 4.0 * radius]) {
                let v: Vec<f64> = e.iter().map(|c| c * s).collect();
                *slot = model.lagrangian_checked(x, &v)? / s;
            }
            if !(ratios[0] < ratios[1] && ratios[1] < ratios[2]) {
                superlinear = false;
            }
            rows.push(SuperlinearityRow {
                x: x.clone(),
                direction: e,
                ratios,
            });
        }
    }

    Ok(TonelliReport {
        model: model.name().to_string(),
        delta,
        min_second_difference: worst,
        worst_x,
        worst_v,
        radius,
        superlinearity: rows,
        convexity_pass: worst >= CONVEXITY_TOLERANCE,
        superlinearity_pass: superlinear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn cubic() -> TonelliModel {
        TonelliModel::custom("cubic", 1, Arc::new(|_x, v| v[0].powi(3)), None)
    }

    #[test]
    fn flat_convexity_gap_is_delta_squared() {
        let r = check_tonelli(&TonelliModel::flat(1), 16).unwrap();
        assert!(r.passed());
        assert!((r.min_second_difference - r.delta * r.delta).abs() < 1e-12);
    }

    #[test]
    fn pendulum_passes() {
        let r = check_tonelli(&TonelliModel::pendulum(1.0), 16).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.min_second_difference - r.delta * r.delta).abs() < 1e-12);
    }

    #[test]
    fn cubic_fails_on_negative_velocities() {
        let r = check_tonelli(&cubic(), 16).unwrap();
        assert!(!r.convexity_pass);
        assert!(r.worst_v[0] < 0.0);
        // 6 v δ² at the most negative sampled velocity
        let expected = 6.0 * r.worst_v[0] * r.delta * r.delta;
        assert!((r.min_second_difference - expected).abs() < 1e-9 * expected.abs());
        assert!(!r.superlinearity_pass);
    }

    #[test]
    fn aniso_passes_in_two_dimensions() {
        let r = check_tonelli(&TonelliModel::aniso2d(1.0), 8).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(matches!(check_tonelli(&TonelliModel::flat(1), 4), Err(Error::Input(_))));
    }

    #[test]
    fn nan_lagrangian_names_the_point() {
        let m = TonelliModel::custom(
            "holey",
            1,
            Arc::new(|x, v| if x[0] > 0.5 { f64::NAN } else { v[0] * v[0] }),
            None,
        );
        match check_tonelli(&m, 8) {
            Err(Error::ModelEvaluation(p)) => assert!(p.x[0] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn v_bound_matches_margin_rule() {
        // R/2 − 1/R > s + 1 at the worst x.
        assert_eq!(TonelliModel::pendulum(1.0).v_bound(0.0).unwrap(), 4.0);
        assert_eq!(TonelliModel::flat(1).v_bound(1.0).unwrap(), 8.0);
        assert_eq!(TonelliModel::flat(1).v_bound(0.0).unwrap(), 4.0);
    }

    #[test]
    fn tilt_and_translation() {
        let m = TonelliModel::pendulum(1.0);
        let t = m.tilted(&[2.0]);
        assert!((t.lagrangian(&[0.0], &[1.0]) - (0.5 - 1.0 - 2.0)).abs() < 1e-15);
        assert!((t.hamiltonian(&[0.0], &[0.0]).unwrap() - (2.0 + 1.0)).abs() < 1e-15);
        let s = m.translated(&[0.25]);
        assert!((s.potential_at(&[0.0]).unwrap() - (TAU * 0.25).cos()).abs() < 1e-15);
    }

    #[test]
    fn table_interpolates_linearly() {
        let t = PotentialTable::new(vec![0.0, 1.0, 0.0, -1.0]).unwrap();
        assert!((t.eval(0.125) - 0.5).abs() < 1e-15);
        assert!((t.eval(1.125) - 0.5).abs() < 1e-15);
        assert!((t.eval(0.875) + 0.5).abs() < 1e-15);
        assert_eq!(t.max(), 1.0);
        assert!(PotentialTable::new(vec![0.0, f64::INFINITY]).is_err());
    }
}
