use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cover::{hedlund_model, GraphComplex};
use crate::hj_grid::fast_scale;
use crate::models::TonelliModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub preset: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one_usize")]
    pub dim: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl ModelSpec {
    pub fn build(&self) -> Result<TonelliModel> {
        TonelliModel::preset(&self.preset, self.dim, self.amplitude)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum GraphSpec {
    Circle,
    FlatTorus { k: usize },
    CircleWithFin { order: i64 },
    Hedlund { n: usize, delta: f64 },
    File { path: PathBuf },
}

impl GraphSpec {
    pub fn build(&self) -> Result<GraphComplex> {
        match self {
            Self::Circle => Ok(GraphComplex::circle()),
            Self::FlatTorus { k } => {
                if *k == 0 {
                    return Err(Error::Input("flat torus needs k >= 1".into()));
                }
                Ok(GraphComplex::flat_torus(*k))
            }
            Self::CircleWithFin { order } => GraphComplex::circle_with_fin(*order),
            Self::Hedlund { n, delta } => hedlund_model(*n, *delta),
            Self::File { path } => GraphComplex::parse(BufReader::new(File::open(path)?)),
        }
    }
}

/// Initial data. On the continuous engine distances are taken on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialData {
    /// `|y − y₀|`
    Cone { center: Vec<f64> },
    /// `a + P·y`
    Affine { a: f64, p: Vec<f64> },
    /// `s·|y − y₀|²/2`
    Quadratic {
        center: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn torus_delta(x: f64, c: f64) -> f64 {
    let d = (x - c).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl InitialData {
    pub fn dim(&self) -> usize {
        match self {
            Self::Cone { center } | Self::Quadratic { center, .. } => center.len(),
            Self::Affine { p, .. } => p.len(),
        }
    }

    /// Value on `R^k`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Self::Cone { center } => y.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt(),
            Self::Affine { a, p } => a + y.iter().zip(p).map(|(u, q)| u * q).sum::<f64>(),
            Self::Quadratic { center, scale } => {
                0.5 * scale * y.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>()
            }
        }
    }

    /// Periodic value on the torus `R^d/Z^d` (minimal-image distances).
    pub fn eval_periodic(&self, y: &[f64]) -> Result<f64> {
        match self {
            Self::Cone { center } => Ok(y
                .iter()
                .zip(center)
                .map(|(a, c)| torus_delta(*a, *c).powi(2))
                .sum::<f64>()
                .sqrt()),
            Self::Quadratic { center, scale } => Ok(0.5
                * scale
                * y.iter()
                    .zip(center)
                    .map(|(a, c)| torus_delta(*a, *c).powi(2))
                    .sum::<f64>()),
            Self::Affine { .. } => Err(Error::Input("affine data is not periodic on the torus".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub engine: Engine,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    pub initial: InitialData,
    pub eps_list: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_dt() -> f64 {
    1e-2
}

fn default_n() -> usize {
    1024
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Input("empty configuration".into()));
        }
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::Input("eps_list is empty".into()));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Input("eps values must lie in (0, 1]".into()));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Input("eps_list must be strictly decreasing".into()));
        }
        if !(self.t > 0.0) {
            return Err(Error::Input("T must be positive".into()));
        }
        match self.engine {
            Engine::Continuous => {
                let model = self
                    .model
                    .as_ref()
                    .ok_or_else(|| Error::Input("continuous engine needs a model".into()))?;
                for &e in &self.eps_list {
                    fast_scale(e)?;
                }
                if self.initial.dim() != model.dim {
                    return Err(Error::Input("initial data and model dimensions differ".into()));
                }
                if matches!(self.initial, InitialData::Affine { .. }) {
                    return Err(Error::Input("affine data is not periodic on the torus".into()));
                }
            }
            Engine::Discrete => {
                if self.graph.is_none() {
                    return Err(Error::Input("discrete engine needs a graph".into()));
                }
            }
        }
        Ok(())
    }
}
