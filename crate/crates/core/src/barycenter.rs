//! Geometric center of mass `p0 = argmin_p ∫_Σ dist(p, x)² dμ` and moment
//! diagnostics in normal coordinates about `p0`.
//!
//! `∇w(p) = −2 ∫ log_p(x) dμ`, so the Karcher step `p ← p + v` with
//! `v = |Σ|⁻¹ ∫ log_p(x) dμ` is a Newton step for `w` up to curvature terms.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::ambient::{log_map_from, orthonormal_frame, recenter_chart, tangent_norm, GeodesicSolverParams, MetricChart};
use crate::error::{Error, Result};
use crate::surface::{geometry, SphericalGrid, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CenterParams {
    /// Stop when `|∇w|_g / |Σ| ≤ tol` (chart length units).
    pub tol: f64,
    pub max_iters: usize,
    /// Forward-difference step of the Hessian check, in units of `R`.
    pub hessian_step: f64,
}

impl Default for CenterParams {
    fn default() -> Self {
        CenterParams {
            tol: 1e-11,
            max_iters: 50,
            hessian_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterReport {
    pub p0: [f64; 3],
    pub w_value: f64,
    /// `|∇w(p0)|_g / |Σ|`
    pub grad_norm: f64,
    /// `∫ y^α dμ_g` in normal coordinates about `p0`.
    pub moment_g: [f64; 3],
    /// `∫ y^α dμ^E` in normal coordinates about `p0`.
    pub moment_e: [f64; 3],
    /// `max |dist(p0, x) − R|` over the nodes.
    pub dist_band: f64,
    /// Euclidean diameter of the node set in normal coordinates.
    pub diameter: f64,
    pub area: f64,
    pub iterations: usize,
    /// Smallest eigenvalue of `Hess w(p0)` (coordinate, finite differences) over `2|Σ|`.
    pub hessian_min: f64,
    pub hessian_positive: bool,
}

impl CenterReport {
    pub fn p0(&self) -> Vector3<f64> {
        Vector3::from(self.p0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Logarithms of all nodes about `p`, warm-started from `guess`.
struct Sweep {
    logs: Vec<Vector3<f64>>,
}

fn sweep(
    chart: &MetricChart,
    p: &Vector3<f64>,
    nodes: &[Vector3<f64>],
    guess: Option<(&Sweep, Vector3<f64>)>,
    gp: &GeodesicSolverParams,
) -> Result<Sweep> {
    let logs = nodes
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let g0 = match guess {
                Some((s, shift)) => s.logs[k] + shift,
                None => x - p,
            };
            log_map_from(chart, p, x, &g0, gp)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { logs })
}

fn mean_log(s: &Sweep, weights: &[f64], area: f64) -> Vector3<f64> {
    s.logs.iter().zip(weights).fold(Vector3::zeros(), |acc, (v, w)| acc + v * *w) / area
}

fn w_value(chart: &MetricChart, p: &Vector3<f64>, s: &Sweep, weights: &[f64]) -> Result<f64> {
    let g = chart.metric(p)?;
    Ok(s.logs.iter().zip(weights).map(|(v, w)| w * v.dot(&(g * v))).sum())
}

/// Geometric center of `surface`, with moments evaluated in normal coordinates about it.
pub fn geometric_center(
    chart: &MetricChart,
    surface: &Surface,
    grid: &SphericalGrid,
    params: &CenterParams,
    gp: &GeodesicSolverParams,
) -> Result<CenterReport> {
    center_and_recenter(chart, surface, grid, params, gp).map(|(r, _)| r)
}

/// [`geometric_center`] together with the surface refitted in normal
/// coordinates about `p0`.
pub fn center_and_recenter(
    chart: &MetricChart,
    surface: &Surface,
    grid: &SphericalGrid,
    params: &CenterParams,
    gp: &GeodesicSolverParams,
) -> Result<(CenterReport, Surface)> {
    let fields = geometry(chart, surface, grid)?;
    let nodes = &fields.position;
    let weights = &fields.quad;
    let area = fields.area();
    let radius = (area / (4.0 * std::f64::consts::PI)).sqrt();
    let diam = nodes
        .iter()
        .flat_map(|a| nodes.iter().step_by(7).map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    if diam >= 0.25 * chart.valid_radius() {
        return Err(Error::Config(format!(
            "surface diameter {diam:.3e} exceeds valid_radius/4 = {}",
            0.25 * chart.valid_radius()
        )));
    }

    let mut p = nodes.iter().zip(weights).fold(Vector3::zeros(), |acc, (x, w)| acc + x * *w) / area;
    let mut s = sweep(chart, &p, nodes, None, gp)?;
    let mut v = mean_log(&s, weights, area);
    let mut gnorm = 2.0 * tangent_norm(chart, &p, &v)?;
    let mut iterations = 0;
    while gnorm > params.tol {
        if iterations >= params.max_iters {
            return Err(Error::NoConvergence {
                solver: "geometric center",
                iterations,
                residual: gnorm,
            });
        }
        iterations += 1;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let q = p + v * t;
            let sq = sweep(chart, &q, nodes, Some((&s, p - q)), gp)?;
            let vq = mean_log(&sq, weights, area);
            let gq = 2.0 * tangent_norm(chart, &q, &vq)?;
            if gq < gnorm {
                accepted = Some((q, sq, vq, gq));
                break;
            }
            t *= 0.5;
        }
        let Some((q, sq, vq, gq)) = accepted else {
            break;
        };
        p = q;
        s = sq;
        v = vq;
        gnorm = gq;
    }
    if gnorm > params.tol * 10.0 {
        return Err(Error::NoConvergence {
            solver: "geometric center",
            iterations,
            residual: gnorm,
        });
    }

    let g = chart.metric(&p)?;
    let frame = orthonormal_frame(&g);
    let to_normal = frame.transpose() * g;
    let z: Vec<Vector3<f64>> = s.logs.iter().map(|v| to_normal * v).collect();
    let moment_g = z.iter().zip(weights).fold(Vector3::zeros(), |acc, (z, w)| acc + z * *w);
    let dist_band = z.iter().map(|z| (z.norm() - radius).abs()).fold(0.0, f64::max);
    let diameter = z
        .iter()
        .enumerate()
        .flat_map(|(i, a)| z[i + 1..].iter().map(move |b| (a - b).norm_squared()))
        .fold(0.0, f64::max)
        .sqrt();

    let zs = Surface::refit(grid, &z, Vector3::zeros(), grid, surface.degree)?;
    let flat = MetricChart::flat(chart.valid_radius())?;
    let ef = geometry(&flat, &zs, grid)?;
    let moment_e = ef.position.iter().zip(&ef.quad).fold(Vector3::zeros(), |acc, (y, w)| acc + y * *w);

    // Hess w by forward differences of ∇w = −2 g ∫ log dμ in coordinates.
    let h = params.hessian_step * radius;
    let grad0 = g * v * (-2.0 * area);
    let mut hess = Matrix3::zeros();
    for c in 0..3 {
        let mut e = Vector3::zeros();
        e[c] = h;
        let q = p + e;
        let sq = sweep(chart, &q, nodes, Some((&s, -e)), gp)?;
        let gq = chart.metric(&q)? * mean_log(&sq, weights, area) * (-2.0 * area);
        hess.set_column(c, &((gq - grad0) / h));
    }
    let hess = (hess + hess.transpose()) * 0.5;
    // normalize by the flat value 2|Σ|g
    let gi_half = frame.transpose() * hess * frame / (2.0 * area);
    let hessian_min = SymmetricEigen::new(gi_half).eigenvalues.min();

    let report = CenterReport {
        p0: [p.x, p.y, p.z],
        w_value: w_value(chart, &p, &s, weights)?,
        grad_norm: gnorm,
        moment_g: [moment_g.x, moment_g.y, moment_g.z],
        moment_e: [moment_e.x, moment_e.y, moment_e.z],
        dist_band,
        area,
        iterations,
        hessian_min,
        hessian_positive: hessian_min > 0.0,
        diameter,
    };
    Ok((report, zs))
}

/// A surface expressed in normal coordinates about its geometric center.
#[derive(Debug, Clone)]
pub struct RecenteredSurface {
    pub chart: MetricChart,
    pub surface: Surface,
}

/// Re-expresses `surface` in normal coordinates about `p0`.
pub fn recenter_surface(
    chart: &MetricChart,
    surface: &Surface,
    p0: &Vector3<f64>,
    grid: &SphericalGrid,
    gp: &GeodesicSolverParams,
) -> Result<RecenteredSurface> {
    let nodes = surface.points(grid);
    let g = chart.metric(p0)?;
    let to_normal = orthonormal_frame(&g).transpose() * g;
    let s = sweep(chart, p0, &nodes, None, gp)?;
    let z: Vec<Vector3<f64>> = s.logs.iter().map(|v| to_normal * v).collect();
    Ok(RecenteredSurface {
        chart: recenter_chart(chart, p0, gp)?,
        surface: Surface::refit(grid, &z, Vector3::zeros(), grid, surface.degree)?,
    })
}

/// Maximal odd moment of one degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub degree: usize,
    pub count: usize,
    pub max_abs: f64,
}

/// Integrals against `dμ^E` of all distinct products of `2k + 1` factors
/// from `{ν^α, y^α/R}`, `k = 0..=max_k`. The surface must be given in
/// normal coordinates about its center; `ν` and `dμ^E` are Euclidean there.
pub fn moment_suite(chart_at_p0: &MetricChart, surface: &Surface, grid: &SphericalGrid, max_k: usize) -> Result<Vec<MomentEntry>> {
    let flat = MetricChart::flat(chart_at_p0.valid_radius())?;
    let f = geometry(&flat, surface, grid)?;
    let area = f.area();
    let radius = (area / (4.0 * std::f64::consts::PI)).sqrt();
    let factor = |i: usize, k: usize| -> f64 {
        if i < 3 {
            f.nu[k][i]
        } else {
            f.position[k][i - 3] / radius
        }
    };
    let mut out = Vec::new();
    for kk in 0..=max_k {
        let degree = 2 * kk + 1;
        let mut combo = vec![0usize; degree];
        let mut max_abs: f64 = 0.0;
        let mut count = 0;
        loop {
            let val: f64 = (0..f.len())
                .map(|k| f.quad[k] * combo.iter().map(|&i| factor(i, k)).product::<f64>())
                .sum();
            max_abs = max_abs.max(val.abs());
            count += 1;
            // next nondecreasing multi-index over 6 factors
            let Some(pos) = (0..degree).rev().find(|&j| combo[j] < 5) else {
                break;
            };
            let v = combo[pos] + 1;
            for c in combo.iter_mut().skip(pos) {
                *c = v;
            }
        }
        out.push(MomentEntry { degree, count, max_abs });
    }
    Ok(out)
}

/// Number of distinct odd products of degree `2k+1` from six factors.
pub fn moment_count(k: usize) -> usize {
    let d = 2 * k + 1;
    (1..=d).fold(1usize, |acc, i| acc * (5 + i) / i)
}
