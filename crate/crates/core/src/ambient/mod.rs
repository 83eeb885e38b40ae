//! Analytic ambient geometry: metric charts, curvature, geodesics and
//! normal coordinates.

mod curvature;
mod expansion;
mod geodesic;
mod metric;
pub mod polynomial;
mod recenter;

pub use curvature::{Christoffel, CurvatureAtPoint, MetricJet, Riemann};
pub use expansion::{christoffel_expansion_check, ExpansionReport};
pub use geodesic::{
    distance, exp_map, exp_with_jacobian, log_map, log_map_from, orthonormal_frame, tangent_norm,
    GeodesicSolverParams,
};
pub use metric::{LocalGeometry, MetricChart, MetricSpec};
pub use polynomial::{Monomial, Polynomial};
pub use recenter::{recenter_chart, recenter_chart_with_step, RecenteredChart, RECENTER_FD_STEP};
