//! Guaranteed two-sided bounds for Steklov eigenvalues
//! (`-Δu + u = 0` in Ω, `∂u/∂n = λu` on ∂Ω) on polygonal domains.
//!
//! Lower bounds come from the Crouzeix-Raviart nonconforming discretisation
//! through an explicit projection-error constant; upper bounds from the
//! conforming P1 discretisation.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod bounds;
pub mod cli;
pub mod dense_eigen;
pub mod eigensolve;
pub mod error;
pub mod linsolve;
pub mod mesh;
pub mod report;
pub mod sparse;

pub use assembly::{assemble, Assembled, DofMap, ElementKind};
pub use bounds::{
    compute_bounds, compute_ch, convergence_rates, lower_bound_map, BoundRow, BoundsReport, RateTable,
};
pub use eigensolve::{certify, schur_reduce, solve_largest, to_lambda, Enclosure, Pencil, Spectrum};
pub use error::{AssemblyError, BoundsError, MeshError, ParseError, SolverError};
pub use mesh::{check_admissibility, compute_geometry, DomainTag, GeometryTable, Mesh};
pub use sparse::SparseSymMatrix;
