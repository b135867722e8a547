//! Origin-symmetric convex bodies, subspaces and ellipsoids in low
//! dimension.
//!
//! Bodies are polytopes stored by vertices; their facet description is
//! derived on demand by double-description vertex enumeration of the polar.

mod body;
mod dd;
mod ellipsoid;
mod subspace;

pub use body::{convex_hull_points, SymmetricBody, MAX_DIM, MERGE_TOL};
pub(crate) use body::gauge_of_points;
pub use dd::polytope_vertices;
pub use ellipsoid::{Containment, EllipseMetrics, Ellipsoid, Shape, EIGEN_FLOOR, SYMMETRY_TOL};
pub use subspace::Subspace;
