//! Geodesic normal coordinates about a chart point.
//!
//! The derived chart is `z ↦ x(z) = exp_{p0}(F z)` with `F` a g-orthonormal
//! frame at `p0`. Its metric `J^T g(x) J` uses the exponential Jacobian `J`
//! from the variational equations (RK4 order); metric derivatives are fourth
//! order central differences of that metric with step [`RecenteredChart::fd_step`].

use nalgebra::{Matrix3, Vector3};

use super::curvature::MetricJet;
use super::geodesic::{exp_jacobian_with_steps, exp_with_steps, orthonormal_frame, GeodesicSolverParams};
use super::metric::MetricChart;
use crate::error::{Error, Result};

/// Default finite-difference step for metric derivatives of a recentered chart.
pub const RECENTER_FD_STEP: f64 = 5e-3;

#[derive(Debug, Clone)]
pub struct RecenteredChart {
    base: MetricChart,
    p0: Vector3<f64>,
    frame: Matrix3<f64>,
    params: GeodesicSolverParams,
    fd_step: f64,
}

impl RecenteredChart {
    pub fn base(&self) -> &MetricChart {
        &self.base
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.p0
    }

    pub fn frame(&self) -> Matrix3<f64> {
        self.frame
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    fn steps(&self, z: &Vector3<f64>) -> usize {
        self.params.steps_for(&(self.frame * z))
    }

    /// Base-chart point with normal coordinates `z`.
    pub fn to_base(&self, z: &Vector3<f64>) -> Result<Vector3<f64>> {
        exp_with_steps(&self.base, &self.p0, &(self.frame * z), self.steps(z))
    }

    fn metric_with_steps(&self, z: &Vector3<f64>, steps: usize) -> Result<Matrix3<f64>> {
        let (x, jexp) = exp_jacobian_with_steps(&self.base, &self.p0, &(self.frame * z), steps)?;
        let j = jexp * self.frame;
        let g = self.base.metric(&x)?;
        let m = j.transpose() * g * j;
        Ok((m + m.transpose()) * 0.5)
    }

    pub(crate) fn metric(&self, z: &Vector3<f64>) -> Result<Matrix3<f64>> {
        self.metric_with_steps(z, self.steps(z))
    }

    pub(crate) fn jet(&self, z: &Vector3<f64>) -> Result<MetricJet> {
        let n = self.steps(z);
        let h = self.fd_step;
        let e = |i: usize, s: f64| Vector3::from_fn(|k, _| if k == i { s } else { 0.0 });
        let eval = |dz: Vector3<f64>| self.metric_with_steps(&(z + dz), n);
        let g0 = eval(Vector3::zeros())?;
        let mut dg = [Matrix3::zeros(); 3];
        let mut d2g = [[Matrix3::zeros(); 3]; 3];
        for c in 0..3 {
            let p1 = eval(e(c, h))?;
            let m1 = eval(e(c, -h))?;
            let p2 = eval(e(c, 2.0 * h))?;
            let m2 = eval(e(c, -2.0 * h))?;
            dg[c] = (-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * h);
            d2g[c][c] = (-p2 + p1 * 16.0 - g0 * 30.0 + m1 * 16.0 - m2) / (12.0 * h * h);
        }
        for c in 0..3 {
            for d in (c + 1)..3 {
                let cross = |s: f64| -> Result<Matrix3<f64>> {
                    Ok(eval(e(c, s) + e(d, s))? - eval(e(c, s) + e(d, -s))? - eval(e(c, -s) + e(d, s))?
                        + eval(e(c, -s) + e(d, -s))?)
                };
                let s1 = cross(h)?;
                let s2 = cross(2.0 * h)?;
                let m = (s1 * 16.0 - s2) / (48.0 * h * h);
                d2g[c][d] = m;
                d2g[d][c] = m;
            }
        }
        Ok(MetricJet { g: g0, dg, d2g })
    }

    /// Scalar curvature is a scalar: its value is the base value at `x(z)`, its
    /// gradient follows by the chain rule, and its Hessian is a fourth-order
    /// central difference of that gradient.
    pub(crate) fn scalar_curvature_jet(&self, z: &Vector3<f64>) -> Result<(f64, Vector3<f64>, Matrix3<f64>)> {
        let n = self.steps(z);
        let grad_at = |w: &Vector3<f64>| -> Result<(f64, Vector3<f64>)> {
            let (x, jexp) = exp_jacobian_with_steps(&self.base, &self.p0, &(self.frame * w), n)?;
            let (sc, dsc, _) = self.base.scalar_curvature_jet(&x)?;
            Ok((sc, (jexp * self.frame).transpose() * dsc))
        };
        let (sc, grad) = grad_at(z)?;
        let h = self.fd_step;
        let mut hess = Matrix3::zeros();
        for c in 0..3 {
            let e = Vector3::from_fn(|k, _| if k == c { h } else { 0.0 });
            let p1 = grad_at(&(z + e))?.1;
            let m1 = grad_at(&(z - e))?.1;
            let p2 = grad_at(&(z + e * 2.0))?.1;
            let m2 = grad_at(&(z - e * 2.0))?.1;
            hess.set_column(c, &((-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * h)));
        }
        Ok((sc, grad, (hess + hess.transpose()) * 0.5))
    }
}

/// Chart of g-normal coordinates centered at `p0`, with frame given by
/// Gram–Schmidt of `(∂_1, ∂_2, ∂_3)` at `p0`.
pub fn recenter_chart(chart: &MetricChart, p0: &Vector3<f64>, params: &GeodesicSolverParams) -> Result<MetricChart> {
    recenter_chart_with_step(chart, p0, params, RECENTER_FD_STEP)
}

pub fn recenter_chart_with_step(
    chart: &MetricChart,
    p0: &Vector3<f64>,
    params: &GeodesicSolverParams,
    fd_step: f64,
) -> Result<MetricChart> {
    params.validate()?;
    if p0.norm() >= 0.5 * chart.valid_radius() {
        return Err(Error::outside(p0, 0.5 * chart.valid_radius()));
    }
    let frame = orthonormal_frame(&chart.metric(p0)?);
    let radius = 0.5 * (chart.valid_radius() - p0.norm());
    Ok(MetricChart::from_recentered(
        RecenteredChart {
            base: chart.clone(),
            p0: *p0,
            frame,
            params: *params,
            fd_step,
        },
        radius,
    ))
}
