//! Discrete Lax-Oleinik solvers for Hamilton-Jacobi equations on `T^1`/`T^2`.

mod characteristics;
mod corrector;
mod field;
mod hopf_lax;
mod lax;

pub use characteristics::{characteristics_check, CharacteristicsReport};
pub use corrector::{reconstruct_affine_corrector, AffineCorrectorFamily, AffineCorrectorSummary};
pub use field::{PeriodicGrid, ValueField};
pub use hopf_lax::{hopf_lax_effective, BoxField, HopfLaxValue};
pub use lax::{
    fast_scale, lax_oleinik_step, scaled_step, solve_cauchy, solve_cauchy_observed, solve_oscillatory, CauchySolution,
};
