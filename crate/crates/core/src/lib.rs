//! Numerical laboratory for small area-constrained Willmore spheres in
//! analytic Riemannian 3-manifolds given in one coordinate chart.
//!
//! - [`ambient`]: metrics, curvature, geodesics and normal coordinates.
//! - [`surface`]: star-shaped spectral surfaces and their extrinsic geometry.
//! - [`functionals`]: Willmore energy, Gauss–Bonnet terms and the Euler–Lagrange residual.
//! - [`flow`]: area-constrained minimization.
//! - [`barycenter`]: geometric center of mass and odd moments.
//! - [`suite`]: area ladders, estimate records and rate fits.
//! - [`cli`] and [`config`]: the `willmore` driver.

pub mod ambient;
pub mod barycenter;
pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod suite;
pub mod surface;

pub use error::{Error, Result};
