//! Discrete Simons identity
//! `ΔÅ_ij = (∇²H)°_ij + HÅ_i^kÅ_kj + ½H²Å_ij − |Å|²Å_ij − ½H|Å|²γ_ij
//!        + Å_j^k γ^{lm} Rm_{likm} + Å^{kl} Rm_{ikjl} + ∇_iω_j + ∇_jω_i − div ω γ_ij`.
//!
//! The ω term is written symmetrized; it reduces to `2∇_iω_j` when ∇ω is
//! symmetric, which fails for general ambient metrics.

use nalgebra::Matrix3;

use super::calculus::{
    covariant_derivative, induced_metric_lift, l2_norm, lift_2tensor, lift_covector, trace12, LiftedTensor,
};
use super::geometry::{geometry, GeometryFields};
use super::grid::SphericalGrid;
use super::representation::Surface;
use crate::ambient::MetricChart;
use crate::error::Result;

/// Lift of `LHS − RHS` of the Simons identity.
pub fn simons_defect(chart: &MetricChart, fields: &GeometryFields, grid: &SphericalGrid) -> Result<LiftedTensor> {
    let n = fields.len();
    let ac = lift_2tensor(fields, &fields.a_circ);
    let lap_ac = trace12(fields, &covariant_derivative(fields, grid, &covariant_derivative(fields, grid, &ac)));
    let hess_h = covariant_derivative(fields, grid, &covariant_derivative(fields, grid, &LiftedTensor::scalar(&fields.h)));
    let lap_h = trace12(fields, &hess_h);
    let omega = lift_covector(fields, &fields.omega);
    let grad_omega = covariant_derivative(fields, grid, &omega);
    let div_omega = trace12(fields, &grad_omega);
    let gl = induced_metric_lift(fields);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let gi = fields.metric_inv[k];
        let a = ac.matrix_at(k);
        let gm = gl.matrix_at(k);
        let h = fields.h[k];
        let a2 = fields.a_circ_norm2[k];
        let proj = Matrix3::identity() - fields.nu[k] * fields.nu_flat[k].transpose();
        let gt = gi - fields.nu[k] * fields.nu[k].transpose();
        let rm = chart.curvature_at(&fields.position[k])?.rm;
        let mut q = Matrix3::zeros();
        let aup = gi * a * gi;
        let mut z = Matrix3::zeros();
        for mu in 0..3 {
            for ka in 0..3 {
                let mut sq = 0.0;
                let mut sz = 0.0;
                for l in 0..3 {
                    for r in 0..3 {
                        sq += gt[(l, r)] * rm.get(l, mu, ka, r);
                        sz += aup[(l, r)] * rm.get(mu, l, ka, r);
                    }
                }
                q[(mu, ka)] = sq;
                z[(mu, ka)] = sz;
            }
        }
        let q = proj.transpose() * q * proj;
        let z = proj.transpose() * z * proj;
        let rhs = (hess_h.matrix_at(k) - gm * (0.5 * lap_h.comps[0][k]))
            + a * gi * a * h
            + a * (0.5 * h * h - a2)
            - gm * (0.5 * h * a2)
            + q * gi * a
            + z
            + (grad_omega.matrix_at(k) + grad_omega.matrix_at(k).transpose())
            - gm * div_omega.comps[0][k];
        out.push(lap_ac.matrix_at(k) - rhs);
    }
    Ok(LiftedTensor::from_matrices(&out))
}

/// `L²(dμ)` norm of the Simons identity defect.
pub fn simons_residual(chart: &MetricChart, surface: &Surface, grid: &SphericalGrid) -> Result<f64> {
    let fields = geometry(chart, surface, grid)?;
    let d = simons_defect(chart, &fields, grid)?;
    Ok(l2_norm(&fields, &d))
}
