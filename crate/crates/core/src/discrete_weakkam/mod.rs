//! Weak KAM theory on graph complexes: `α` by cycle means, the Mañé
//! potential, correctors and homogenization on cover windows.

mod alpha;
mod homogenize;
mod potential;

pub use alpha::{
    alpha_bruteforce, alpha_discrete, alpha_karp, alpha_karp_exact, discrete_alpha_table, negative_cycle, random_graph,
    simple_cycles, DiscreteAlphaResult,
};
pub use homogenize::{
    cover_homogenize, CoverReference, DiscreteHomogRow, DiscreteHomogRun, HomogenizeOptions, NodeError,
};
pub use potential::{discrete_corrector, mane_potential, mane_potential_from, DiscretePotential, ManeValue};
