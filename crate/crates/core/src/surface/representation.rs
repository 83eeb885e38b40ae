//! Star-shaped surfaces `y(ω) = c + ρ(ω) ω` and their JSON form.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::grid::{coeff_count, coeff_index, degree_of, SphericalGrid};
use crate::ambient::MetricChart;
use crate::error::{Error, Result};

/// JSON: `{"center": [x, y, z], "L": degree, "coeffs": [...]}` with
/// coefficients in `(l, m)` lexicographic order, `m = -l..=l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surface {
    pub center: [f64; 3],
    #[serde(rename = "L")]
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

fn angles(w: &Vector3<f64>) -> (f64, f64) {
    let n = w.norm();
    ((w.z / n).clamp(-1.0, 1.0).acos(), w.y.atan2(w.x))
}

impl Surface {
    pub fn new(center: Vector3<f64>, coeffs: Vec<f64>) -> Self {
        Surface {
            center: [center.x, center.y, center.z],
            degree: degree_of(coeffs.len()),
            coeffs,
        }
    }

    /// Round sphere of coordinate radius `r`.
    pub fn round(center: Vector3<f64>, r: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; coeff_count(degree)];
        coeffs[0] = r * (4.0 * std::f64::consts::PI).sqrt();
        Surface::new(center, coeffs)
    }

    /// Projects a radial function onto degree `degree` using the grid quadrature.
    pub fn from_radial_fn(
        grid: &SphericalGrid,
        center: Vector3<f64>,
        degree: usize,
        f: impl Fn(&Vector3<f64>) -> f64,
    ) -> Self {
        let vals: Vec<f64> = (0..grid.len()).map(|k| f(&Vector3::from(grid.direction(k)))).collect();
        Surface::new(center, grid.analyze(&vals, degree))
    }

    /// Ellipsoid with semi-axes `(a, b, c)` along the coordinate axes.
    pub fn ellipsoid(grid: &SphericalGrid, center: Vector3<f64>, axes: [f64; 3], degree: usize) -> Self {
        Surface::from_radial_fn(grid, center, degree, |w| {
            1.0 / ((w.x / axes[0]).powi(2) + (w.y / axes[1]).powi(2) + (w.z / axes[2]).powi(2)).sqrt()
        })
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }

    pub fn coeff(&self, l: usize, m: i64) -> f64 {
        self.coeffs[coeff_index(l, m)]
    }

    pub fn coeff_mut(&mut self, l: usize, m: i64) -> &mut f64 {
        &mut self.coeffs[coeff_index(l, m)]
    }

    /// Mean radius `a_00 / √(4π)`.
    pub fn mean_radius(&self) -> f64 {
        self.coeffs[0] / (4.0 * std::f64::consts::PI).sqrt()
    }

    pub fn radius_at(&self, w: &Vector3<f64>) -> f64 {
        let (t, p) = angles(w);
        SphericalGrid::eval_point(&self.coeffs, t, p).f
    }

    /// Chart point on the surface in direction `w` from the center.
    pub fn point_at(&self, w: &Vector3<f64>) -> Vector3<f64> {
        let u = w.normalize();
        self.center() + u * self.radius_at(&u)
    }

    pub fn radii(&self, grid: &SphericalGrid) -> Vec<f64> {
        grid.synthesize(&self.coeffs)
    }

    pub fn points(&self, grid: &SphericalGrid) -> Vec<Vector3<f64>> {
        let c = self.center();
        self.radii(grid)
            .iter()
            .enumerate()
            .map(|(k, r)| c + Vector3::from(grid.direction(k)) * *r)
            .collect()
    }

    pub fn translated(&self, t: &Vector3<f64>) -> Self {
        let mut s = self.clone();
        s.center = (self.center() + t).into();
        s
    }

    /// Multiplies all radii by `s` about the center.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Image under the rotation `q` about the origin, refitted on `grid`.
    pub fn rotated(&self, q: &nalgebra::Rotation3<f64>, grid: &SphericalGrid) -> Self {
        let inv = q.inverse();
        let base = self.clone();
        Surface::from_radial_fn(grid, q * self.center(), self.degree, move |w| base.radius_at(&(inv * w)))
    }

    /// Checks star-shapedness on the grid and that the surface lies in the chart.
    pub fn validate(&self, grid: &SphericalGrid, chart: &MetricChart) -> Result<()> {
        for (k, (r, y)) in self.radii(grid).iter().zip(self.points(grid)).enumerate() {
            if !(*r > 0.0) {
                return Err(Error::Degenerate {
                    node: k,
                    reason: format!("radial function {r:e} is not positive"),
                });
            }
            if !chart.contains(&y) {
                return Err(Error::outside(&y, chart.valid_radius()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("surface serialization cannot fail")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let s: Surface = serde_json::from_str(text).map_err(|e| Error::Json {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        if s.coeffs.len() != coeff_count(s.degree) {
            return Err(Error::Json {
                path: origin.to_string(),
                message: format!(
                    "coeffs: expected (L+1)^2 = {} entries for L = {}, found {}",
                    coeff_count(s.degree),
                    s.degree,
                    s.coeffs.len()
                ),
            });
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        Surface::from_json(&text, &path.display().to_string())
    }

    /// Star-shaped refit about `center` of a closed surface given by its
    /// values `points[k]` at the nodes of `source`. Each target direction is
    /// traced back to its source parameter by fixed-point iteration on the
    /// spectrally interpolated embedding.
    pub fn refit(
        source: &SphericalGrid,
        points: &[Vector3<f64>],
        center: Vector3<f64>,
        target: &SphericalGrid,
        degree: usize,
    ) -> Result<Self> {
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                let v: Vec<f64> = points.iter().map(|p| p[a] - center[a]).collect();
                source.analyze_full(&v)
            })
            .collect();
        let eval = |w: &Vector3<f64>| -> Vector3<f64> {
            let (t, p) = angles(w);
            Vector3::new(
                SphericalGrid::eval_point(&comps[0], t, p).f,
                SphericalGrid::eval_point(&comps[1], t, p).f,
                SphericalGrid::eval_point(&comps[2], t, p).f,
            )
        };
        let mut radii = Vec::with_capacity(target.len());
        for k in 0..target.len() {
            let goal = Vector3::from(target.direction(k));
            let mut w = goal;
            let mut z = eval(&w);
            let mut converged = false;
            for _ in 0..200 {
                let dir = z.normalize();
                let err = goal - dir;
                if err.norm() < 1e-15 {
                    converged = true;
                    break;
                }
                w = (w + err).normalize();
                z = eval(&w);
            }
            if !converged && (goal - z.normalize()).norm() > 1e-12 {
                return Err(Error::NoConvergence {
                    solver: "ray-cast refit",
                    iterations: 200,
                    residual: (goal - z.normalize()).norm(),
                });
            }
            radii.push(z.dot(&goal));
        }
        Ok(Surface::new(center, target.analyze(&radii, degree)))
    }
}
