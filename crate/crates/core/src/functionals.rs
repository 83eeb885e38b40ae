//! Willmore energy, its companion functionals, and the Euler–Lagrange
//! residual of the area-constrained problem.
//!
//! Variation convention: for a normal speed `f` (along the outward `ν`),
//! `δ|Σ| = ∫ H f dμ` and `δW = −½ ∫ f (ΔH + H|Å|² + H Ric(ν,ν)) dμ`.
//! Critical points of `W` at fixed area are the zeros of
//! `E_λ = ΔH + H|Å|² + H Ric(ν,ν) + λH` for some `λ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ambient::MetricChart;
use crate::error::{Error, Result};
use crate::surface::{geometry, laplace_beltrami, GeometryFields, SphericalGrid, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub area: f64,
    #[serde(rename = "R")]
    pub area_radius: f64,
    #[serde(rename = "W")]
    pub willmore: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "gb_residual")]
    pub gauss_bonnet_residual: f64,
    #[serde(rename = "lambda")]
    pub lambda_opt: f64,
    #[serde(rename = "el_l2")]
    pub el_residual_l2: f64,
}

/// `G = ΔH + H|Å|² + H Ric(ν,ν)` at every node.
pub fn willmore_gradient(fields: &GeometryFields, grid: &SphericalGrid) -> Vec<f64> {
    let lap = laplace_beltrami(fields, grid, &fields.h);
    (0..fields.len())
        .map(|k| lap[k] + fields.h[k] * (fields.a_circ_norm2[k] + fields.ric_nn[k]))
        .collect()
}

/// `λ* = −∫ G H dμ / ∫ H² dμ` for precomputed `G`.
pub fn lambda_from(fields: &GeometryFields, g: &[f64]) -> Result<f64> {
    let hh: Vec<f64> = fields.h.iter().map(|h| h * h).collect();
    let den = fields.integrate(&hh);
    if !(den > 0.0) {
        return Err(Error::Degenerate {
            node: 0,
            reason: "∫H² dμ vanishes; the multiplier is undefined".into(),
        });
    }
    let gh: Vec<f64> = g.iter().zip(&fields.h).map(|(a, b)| a * b).collect();
    Ok(-fields.integrate(&gh) / den)
}

/// Residual field `G + λH` and its `L²(dμ)` norm.
pub fn el_residual_fields(fields: &GeometryFields, grid: &SphericalGrid, lambda: f64) -> (Vec<f64>, f64) {
    let g = willmore_gradient(fields, grid);
    let e: Vec<f64> = g.iter().zip(&fields.h).map(|(g, h)| g + lambda * h).collect();
    let norm = fields.l2_norm(&e);
    (e, norm)
}

pub fn el_residual(chart: &MetricChart, surface: &Surface, grid: &SphericalGrid, lambda: f64) -> Result<(Vec<f64>, f64)> {
    let fields = geometry(chart, surface, grid)?;
    Ok(el_residual_fields(&fields, grid, lambda))
}

pub fn optimal_lambda(chart: &MetricChart, surface: &Surface, grid: &SphericalGrid) -> Result<f64> {
    let fields = geometry(chart, surface, grid)?;
    lambda_from(&fields, &willmore_gradient(&fields, grid))
}

/// All functionals from precomputed geometry.
pub fn report_from_fields(fields: &GeometryFields, grid: &SphericalGrid) -> Result<FunctionalReport> {
    let area = fields.area();
    let hh: Vec<f64> = fields.h.iter().map(|h| h * h).collect();
    let w = 0.25 * fields.integrate(&hh);
    let u = fields.integrate(&fields.a_circ_norm2);
    let vv: Vec<f64> = fields.ric_nn.iter().zip(&fields.sc).map(|(r, s)| r - 0.5 * s).collect();
    let v = fields.integrate(&vv);
    let g = willmore_gradient(fields, grid);
    let lambda = lambda_from(fields, &g)?;
    let e: Vec<f64> = g.iter().zip(&fields.h).map(|(g, h)| g + lambda * h).collect();
    Ok(FunctionalReport {
        area,
        area_radius: (area / (4.0 * PI)).sqrt(),
        willmore: w,
        u,
        v,
        gauss_bonnet_residual: w - 4.0 * PI - 0.5 * u - v,
        lambda_opt: lambda,
        el_residual_l2: fields.l2_norm(&e),
    })
}

pub fn evaluate(chart: &MetricChart, surface: &Surface, grid: &SphericalGrid) -> Result<FunctionalReport> {
    let fields = geometry(chart, surface, grid)?;
    report_from_fields(&fields, grid)
}

impl FunctionalReport {
    /// `el_residual_l2 · R³`
    pub fn scaled_residual(&self) -> f64 {
        self.el_residual_l2 * self.area_radius.powi(3)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Header line followed by one data row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(self)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
