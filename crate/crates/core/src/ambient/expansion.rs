//! Check of the first-order normal-coordinate expansions
//! `Γ^ν_{αβ}(y) ≈ −⅓(Rm^ν_{αγβ} + Rm^ν_{βγα}) y^γ` and
//! `div b ≈ −⅓ Ric_{βγ} y^γ b^β` for constant fields `b`.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::metric::MetricChart;
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    /// `max(|g(0) − δ|, |∂g(0)|)`; should be ~0 for a chart in normal form.
    pub normal_form_defect: f64,
    pub radii: Vec<f64>,
    pub christoffel_residuals: Vec<f64>,
    pub divergence_residuals: Vec<f64>,
    /// Log–log slope, `None` when the residuals vanish identically.
    pub christoffel_slope: Option<f64>,
    pub divergence_slope: Option<f64>,
}

fn probe_directions() -> Vec<Vector3<f64>> {
    let mut dirs = Vec::new();
    for a in 0..3 {
        for s in [-1.0, 1.0] {
            dirs.push(Vector3::from_fn(|k, _| if k == a { s } else { 0.0 }));
        }
    }
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                dirs.push(Vector3::new(sx, sy, sz) / 3f64.sqrt());
            }
        }
    }
    dirs
}

/// Least-squares slope of `ln(values)` against `ln(radii)`, skipping zeros.
pub(crate) fn loglog_slope(radii: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Runs the check at radii `r0 · 2^{-k}`, `k = 0..levels`.
pub fn christoffel_expansion_check(chart: &MetricChart, r0: f64, levels: usize) -> Result<ExpansionReport> {
    let origin = Vector3::zeros();
    let jet0 = chart.jet(&origin)?;
    let mut defect = (jet0.g - Matrix3::identity()).amax();
    for d in &jet0.dg {
        defect = defect.max(d.amax());
    }
    let curv = chart.curvature_at(&origin)?;
    let ginv0 = jet0.g.try_inverse().unwrap_or_else(Matrix3::identity);
    // Rm^ν_{abc} = g^{νμ} Rm_{abcμ}
    let rm_up = |nu: usize, a: usize, b: usize, c: usize| -> f64 { (0..3).map(|m| ginv0[(nu, m)] * curv.rm.get(a, b, c, m)).sum() };
    let dirs = probe_directions();
    let mut radii = Vec::with_capacity(levels);
    let mut gres = Vec::with_capacity(levels);
    let mut dres = Vec::with_capacity(levels);
    for k in 0..levels {
        let r = r0 * 0.5f64.powi(k as i32);
        let mut gmax: f64 = 0.0;
        let mut dmax: f64 = 0.0;
        for dir in &dirs {
            let y = dir * r;
            let gamma = chart.christoffel(&y)?;
            for nu in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        let model: f64 = (0..3)
                            .map(|c| -(rm_up(nu, a, c, b) + rm_up(nu, b, c, a)) * y[c] / 3.0)
                            .sum();
                        gmax = gmax.max((gamma.get(nu, a, b) - model).abs());
                    }
                }
            }
            // div b = Γ^a_{ab} b^b for constant b = e_β
            for beta in 0..3 {
                let div: f64 = (0..3).map(|a| gamma.get(a, a, beta)).sum();
                let model: f64 = -(0..3).map(|c| curv.ric[(beta, c)] * y[c]).sum::<f64>() / 3.0;
                dmax = dmax.max((div - model).abs());
            }
        }
        radii.push(r);
        gres.push(gmax);
        dres.push(dmax);
    }
    Ok(ExpansionReport {
        normal_form_defect: defect,
        christoffel_slope: loglog_slope(&radii, &gres),
        divergence_slope: loglog_slope(&radii, &dres),
        radii,
        christoffel_residuals: gres,
        divergence_residuals: dres,
    })
}
