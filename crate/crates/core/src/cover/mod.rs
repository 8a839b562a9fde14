//! Graph complexes, their free abelian covers and metric asymptotics.

mod convergence;
mod graph;
mod paths;
mod stable;
mod window;

pub use convergence::{
    distances_from, torsion_collapse_check, verify_space_convergence, SpaceConvergence, SpaceOptions, SpaceRow,
    TorsionCollapse, TorsionRow,
};
pub use graph::{Edge, GraphComplex};
pub use paths::{dijkstra, shortest_path_distance, ShortestPaths, Weight};
pub use stable::{
    hedlund_coords, hedlund_model, hedlund_tube, stable_norm_estimate, translate_window, tube_changes,
    StableNormEstimate,
};
pub use window::{build_cover_window, build_torsioned_cover, CoverNode, CoverWindow, TorsionedCover};
