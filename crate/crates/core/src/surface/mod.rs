//! Star-shaped spherical surfaces, the pseudospectral grid, and extrinsic
//! geometry with respect to an ambient metric.

pub mod calculus;
mod geometry;
mod grid;
mod representation;
mod simons;

pub use calculus::{covariant_divergence, laplace_beltrami, surface_gradient, LiftedTensor};
pub use geometry::{geometry, integrate, GeometryFields};
pub use grid::{coeff_count, coeff_index, degree_of, make_grid, FieldDerivatives, PointValue, SphericalGrid};
pub use representation::Surface;
pub use simons::{simons_defect, simons_residual};

pub use geometry::norm2_2;
