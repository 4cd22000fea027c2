//! Dual curvature measures of convex polytopes and a numerical solver for the
//! dual Minkowski problem with negative index.
//!
//! Given a finite measure `μ` on the unit sphere that is not concentrated on any
//! closed hemisphere and an index `q < 0`, [`solver::solve`] recovers the
//! polytope `K` whose `q`-th dual curvature measure equals `μ`, by maximizing
//! `Φ_μ(K) = −(1/|μ|) ∫ log h_K dμ + log V̄_q(K)` over log-support vectors.
//!
//! Modules:
//! - [`geom`]: directions, measures, polytopes, polarity, Wulff shapes.
//! - [`quadrature`]: sphere quadrature adapted to the radial facet cells.
//! - [`measure`]: dual volumes, dual curvature measures, `Φ_μ`.
//! - [`solver`]: the ascent solver and its certificates.
//! - [`oracle`]: Monte-Carlo references and the radial comparison check.
//! - [`generate`]: seeded random measures and bodies.
//! - [`io`]: JSON file formats.

// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generate;
pub mod geom;
pub mod io;
pub mod measure;
pub mod oracle;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use geom::{
    hausdorff_distance, hemisphere_check, hemisphere_witness, polar, radial_value, reverse_gauss_cell,
    support_value, wulff_shape, Atom, BodyPair, Direction, DiscreteMeasure, Polytope,
};
pub use measure::{dual_curvature, dual_volume, normalized_dual_volume, phi_functional, DualCurvature};
pub use quadrature::{build_rule, QuadratureRule};
pub use solver::{solve, SolverConfig, SolverReport, Status};
