//! Numerical homogenization of Hamilton-Jacobi equations.
//!
//! Two engines share one vocabulary:
//!
//! * a continuous engine on periodic grids (`models`, `hj_grid`, `effective`) that
//!   solves the oscillatory Cauchy problem with a discrete Lax-Oleinik semigroup and
//!   computes the effective Hamiltonian by large-time averaging, min-max descent and
//!   a quadrature oracle;
//! * a discrete engine on weighted graph complexes (`cover`, `discrete_weakkam`) that
//!   builds windows of the free abelian cover, measures stable norms, and computes
//!   the effective Hamiltonian as a maximum cycle ratio.
//!
//! `harness` wires both engines into convergence studies and the acceptance checks.

pub mod cover;
pub mod discrete_weakkam;
pub mod effective;
mod error;
pub mod harness;
pub mod hj_grid;
pub mod lattice;
pub mod models;

pub use error::{Error, Point, Result};
