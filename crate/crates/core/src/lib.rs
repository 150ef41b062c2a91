//! Orthonormal 2-frames in R^n and C^n, the closed polygons they map to, and
//! numerical estimates of the best-conditioned 2 x 2 submatrix constant.
//!
//! A real `n x 2` frame maps to a closed planar polygon of perimeter 2 (the
//! complex square map) and a complex frame to a closed spatial polygon (the
//! Hopf map). Under these maps `sigma_min(i, j)^2` of rows `i, j` equals half
//! the triangle deficit `|a_i| + |a_j| - |a_i + a_j|` of edges `i, j`, so the
//! worst-case constant is an isoperimetric polygon problem, solved here by a
//! smoothed minimax optimizer.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod frames;
pub mod io;
pub mod optimizer;
pub mod oracle;
pub mod polygons;

pub use error::{Error, Result};
pub use frames::{
    best_submatrix, random_frame, ComplexFrame, Field, Frame, RealFrame, SubmatrixConditioning, TwoFrame,
};
pub use optimizer::{estimate_bn2, OptimizationReport, OptimizerConfig, Space};
pub use polygons::{
    hopf_map, inverse_hopf_map, inverse_square_map, square_map, AnyPolygon, PlanarPolygon, SpatialPolygon,
};
