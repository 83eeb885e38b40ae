//! Geodesics: fixed-step RK4 exponential map, Newton shooting for the
//! logarithm, and Riemannian distance.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::metric::MetricChart;
use crate::error::{Error, Result};

/// Integration and shooting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSolverParams {
    /// RK4 step, measured as coordinate length of the initial velocity.
    pub step_size: f64,
    /// Coordinate residual accepted by the shooting method.
    pub shoot_tol: f64,
    pub max_newton_iters: usize,
}

impl Default for GeodesicSolverParams {
    fn default() -> Self {
        GeodesicSolverParams {
            step_size: 1.0 / 2000.0,
            shoot_tol: 1e-12,
            max_newton_iters: 30,
        }
    }
}

impl GeodesicSolverParams {
    /// Default parameters with step `valid_radius / 2000`.
    pub fn for_chart(chart: &MetricChart) -> Self {
        GeodesicSolverParams {
            step_size: chart.valid_radius() / 2000.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.shoot_tol > 0.0 && self.max_newton_iters > 0) {
            return Err(Error::Config(format!(
                "geodesic parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Number of RK4 steps used for an initial velocity `v`.
    pub fn steps_for(&self, v: &Vector3<f64>) -> usize {
        ((v.norm() / self.step_size).ceil() as usize).max(1)
    }
}

fn accel(chart: &MetricChart, x: &Vector3<f64>, v: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(-chart.christoffel(x)?.contract(v, v))
}

/// `exp_p(v)`: the geodesic with `γ(0) = p`, `γ'(0) = v`, evaluated at `t = 1`.
pub fn exp_map(chart: &MetricChart, p: &Vector3<f64>, v: &Vector3<f64>, params: &GeodesicSolverParams) -> Result<Vector3<f64>> {
    exp_with_steps(chart, p, v, params.steps_for(v))
}

pub(crate) fn exp_with_steps(chart: &MetricChart, p: &Vector3<f64>, v: &Vector3<f64>, steps: usize) -> Result<Vector3<f64>> {
    chart.check(p)?;
    if v.norm() == 0.0 {
        return Ok(*p);
    }
    let h = 1.0 / steps as f64;
    let mut x = *p;
    let mut u = *v;
    for _ in 0..steps {
        let k1x = u;
        let k1v = accel(chart, &x, &u)?;
        let x2 = x + k1x * (0.5 * h);
        let u2 = u + k1v * (0.5 * h);
        let k2v = accel(chart, &x2, &u2)?;
        let x3 = x + u2 * (0.5 * h);
        let u3 = u + k2v * (0.5 * h);
        let k3v = accel(chart, &x3, &u3)?;
        let x4 = x + u3 * h;
        let u4 = u + k3v * h;
        let k4v = accel(chart, &x4, &u4)?;
        x += (k1x + u2 * 2.0 + u3 * 2.0 + u4) * (h / 6.0);
        u += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        chart.check(&x)?;
    }
    Ok(x)
}

#[derive(Clone, Copy)]
struct VarState {
    x: Vector3<f64>,
    v: Vector3<f64>,
    // columns: variations of x and v along each initial-velocity direction
    jx: Matrix3<f64>,
    jv: Matrix3<f64>,
}

impl VarState {
    fn axpy(&self, k: &VarState, h: f64) -> VarState {
        VarState {
            x: self.x + k.x * h,
            v: self.v + k.v * h,
            jx: self.jx + k.jx * h,
            jv: self.jv + k.jv * h,
        }
    }
}

fn var_rhs(chart: &MetricChart, s: &VarState) -> Result<VarState> {
    let (gamma, dgamma) = chart.christoffel_derivative(&s.x)?;
    let acc = -gamma.contract(&s.v, &s.v);
    let mut djv = Matrix3::zeros();
    for col in 0..3 {
        let dx = s.jx.column(col).into_owned();
        let dv = s.jv.column(col).into_owned();
        let mut a = -gamma.contract(&s.v, &dv) * 2.0;
        for (m, dgm) in dgamma.iter().enumerate() {
            if dx[m] != 0.0 {
                a -= dgm.contract(&s.v, &s.v) * dx[m];
            }
        }
        djv.set_column(col, &a);
    }
    Ok(VarState {
        x: s.v,
        v: acc,
        jx: s.jv,
        jv: djv,
    })
}

/// `exp_p(v)` together with the Jacobian `∂ exp_p(v) / ∂v`, obtained by
/// integrating the variational (Jacobi) equations alongside the geodesic.
pub fn exp_with_jacobian(
    chart: &MetricChart,
    p: &Vector3<f64>,
    v: &Vector3<f64>,
    params: &GeodesicSolverParams,
) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    exp_jacobian_with_steps(chart, p, v, params.steps_for(v))
}

pub(crate) fn exp_jacobian_with_steps(
    chart: &MetricChart,
    p: &Vector3<f64>,
    v: &Vector3<f64>,
    steps: usize,
) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    chart.check(p)?;
    let h = 1.0 / steps as f64;
    let mut s = VarState {
        x: *p,
        v: *v,
        jx: Matrix3::zeros(),
        jv: Matrix3::identity(),
    };
    for _ in 0..steps {
        let k1 = var_rhs(chart, &s)?;
        let k2 = var_rhs(chart, &s.axpy(&k1, 0.5 * h))?;
        let k3 = var_rhs(chart, &s.axpy(&k2, 0.5 * h))?;
        let k4 = var_rhs(chart, &s.axpy(&k3, h))?;
        s = VarState {
            x: s.x + (k1.x + k2.x * 2.0 + k3.x * 2.0 + k4.x) * (h / 6.0),
            v: s.v + (k1.v + k2.v * 2.0 + k3.v * 2.0 + k4.v) * (h / 6.0),
            jx: s.jx + (k1.jx + k2.jx * 2.0 + k3.jx * 2.0 + k4.jx) * (h / 6.0),
            jv: s.jv + (k1.jv + k2.jv * 2.0 + k3.jv * 2.0 + k4.jv) * (h / 6.0),
        };
        chart.check(&s.x)?;
    }
    Ok((s.x, s.jx))
}

/// `exp_p^{-1}(q)` by Newton shooting on the initial velocity, starting from `q − p`.
pub fn log_map(chart: &MetricChart, p: &Vector3<f64>, q: &Vector3<f64>, params: &GeodesicSolverParams) -> Result<Vector3<f64>> {
    log_map_from(chart, p, q, &(q - p), params)
}

/// Newton shooting from a caller-supplied initial velocity.
pub fn log_map_from(
    chart: &MetricChart,
    p: &Vector3<f64>,
    q: &Vector3<f64>,
    guess: &Vector3<f64>,
    params: &GeodesicSolverParams,
) -> Result<Vector3<f64>> {
    chart.check(p)?;
    chart.check(q)?;
    if p == q {
        return Ok(Vector3::zeros());
    }
    let mut v = *guess;
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_newton_iters {
        let (x, jac) = exp_with_jacobian(chart, p, &v, params)?;
        let r = x - q;
        residual = r.norm();
        if residual <= params.shoot_tol {
            return Ok(v);
        }
        let step = jac.lu().solve(&r).ok_or(Error::NoConvergence {
            solver: "log_map (singular exponential Jacobian)",
            iterations: 0,
            residual,
        })?;
        v -= step;
        if step.norm() <= 1e-3 * params.shoot_tol {
            // update below resolution; accept if the residual is near tolerance
            let x = exp_map(chart, p, &v, params)?;
            residual = (x - q).norm();
            if residual <= 10.0 * params.shoot_tol {
                return Ok(v);
            }
        }
    }
    Err(Error::NoConvergence {
        solver: "log_map",
        iterations: params.max_newton_iters,
        residual,
    })
}

/// `|v|_g` at `p`.
pub fn tangent_norm(chart: &MetricChart, p: &Vector3<f64>, v: &Vector3<f64>) -> Result<f64> {
    let g = chart.metric(p)?;
    Ok(v.dot(&(g * v)).max(0.0).sqrt())
}

/// Riemannian distance `|log_p(q)|_g`.
pub fn distance(chart: &MetricChart, p: &Vector3<f64>, q: &Vector3<f64>, params: &GeodesicSolverParams) -> Result<f64> {
    let v = log_map(chart, p, q, params)?;
    tangent_norm(chart, p, &v)
}

/// Gram–Schmidt of the coordinate basis `(∂_1, ∂_2, ∂_3)` with respect to
/// `g(p)`. Columns of the result are g-orthonormal.
pub fn orthonormal_frame(g: &Matrix3<f64>) -> Matrix3<f64> {
    let mut frame = Matrix3::zeros();
    for i in 0..3 {
        let mut e = Vector3::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
        for j in 0..i {
            let f = frame.column(j).into_owned();
            let c = e.dot(&(g * f));
            e -= f * c;
        }
        let n = e.dot(&(g * e)).sqrt();
        frame.set_column(i, &(e / n));
    }
    frame
}
