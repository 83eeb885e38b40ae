//! Extrinsic geometry of a star-shaped surface with respect to the ambient
//! metric, node by node.
//!
//! Frame `e_θ = ∂y/∂θ`, `e_φ = ∂y/∂φ`; index 0 is θ and index 1 is φ.
//! `A_ij = g(∇_{e_i} ν, e_j) = −g(ν, ∇_{e_i} e_j)` with `ν` the outward unit
//! normal, so round spheres have `H > 0`.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use super::grid::SphericalGrid;
use super::representation::Surface;
use crate::ambient::{Christoffel, MetricChart};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GeometryFields {
    pub position: Vec<Vector3<f64>>,
    pub direction: Vec<Vector3<f64>>,
    pub radius: Vec<f64>,
    pub e_theta: Vec<Vector3<f64>>,
    pub e_phi: Vec<Vector3<f64>>,
    pub gamma: Vec<Matrix2<f64>>,
    pub gamma_inv: Vec<Matrix2<f64>>,
    /// Area element relative to the round measure: `√det γ / sin θ`.
    pub dmu: Vec<f64>,
    /// Quadrature weight times `dmu`; `∫ f dμ = Σ quad[k] f[k]`.
    pub quad: Vec<f64>,
    pub nu: Vec<Vector3<f64>>,
    /// `g ν`, the normal as a covector.
    pub nu_flat: Vec<Vector3<f64>>,
    pub a: Vec<Matrix2<f64>>,
    pub a_circ: Vec<Matrix2<f64>>,
    pub h: Vec<f64>,
    pub a_circ_norm2: Vec<f64>,
    pub ric_nn: Vec<f64>,
    /// `ω_i = Ric(ν, e_i)`
    pub omega: Vec<Vector2<f64>>,
    pub t: Vec<Matrix2<f64>>,
    pub t_circ: Vec<Matrix2<f64>>,
    pub sc: Vec<f64>,
    /// Radial alignment `g(ν, ω)`, converting radial to normal speed.
    pub alpha: Vec<f64>,
    /// `dual[k][i] = g γ^{ij} e_j`, the covector lift of `dθ`, `dφ`.
    pub dual: Vec<[Vector3<f64>; 2]>,
    pub metric: Vec<Matrix3<f64>>,
    pub metric_inv: Vec<Matrix3<f64>>,
    pub christoffel: Vec<Christoffel>,
    pub ricci: Vec<Matrix3<f64>>,
    /// `surface_christoffel[k][m][(i, j)] = Γ̃^m_{ij}`
    pub surface_christoffel: Vec<[Matrix2<f64>; 2]>,
}

#[inline]
pub(crate) fn trace2(ginv: &Matrix2<f64>, m: &Matrix2<f64>) -> f64 {
    (ginv * m).trace()
}

/// `|S|² = γ^{ik} γ^{jl} S_ij S_kl`
#[inline]
pub fn norm2_2(ginv: &Matrix2<f64>, s: &Matrix2<f64>) -> f64 {
    (ginv * s * ginv * s.transpose()).trace()
}

pub fn geometry(chart: &MetricChart, surface: &Surface, grid: &SphericalGrid) -> Result<GeometryFields> {
    let n = grid.len();
    let rho = grid.synthesize_all(&surface.coeffs);
    let c = surface.center();
    let mut f = GeometryFields {
        position: Vec::with_capacity(n),
        direction: Vec::with_capacity(n),
        radius: rho.f.clone(),
        e_theta: Vec::with_capacity(n),
        e_phi: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
        gamma_inv: Vec::with_capacity(n),
        dmu: Vec::with_capacity(n),
        quad: Vec::with_capacity(n),
        nu: Vec::with_capacity(n),
        nu_flat: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        a_circ: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        a_circ_norm2: Vec::with_capacity(n),
        ric_nn: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        t_circ: Vec::with_capacity(n),
        sc: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        dual: Vec::with_capacity(n),
        metric: Vec::with_capacity(n),
        metric_inv: Vec::with_capacity(n),
        christoffel: Vec::with_capacity(n),
        ricci: Vec::with_capacity(n),
        surface_christoffel: Vec::with_capacity(n),
    };
    for k in 0..n {
        let r = rho.f[k];
        if !(r > 0.0) {
            return Err(Error::Degenerate {
                node: k,
                reason: format!("radial function {r:e} is not positive"),
            });
        }
        let (st, ct) = (grid.sin_theta(k), grid.cos_theta(k));
        let (sp, cp) = grid.phi(k).sin_cos();
        let w = Vector3::new(st * cp, st * sp, ct);
        let w_t = Vector3::new(ct * cp, ct * sp, -st);
        let w_p = Vector3::new(-st * sp, st * cp, 0.0);
        let w_tp = Vector3::new(-ct * sp, ct * cp, 0.0);
        let w_pp = Vector3::new(-st * cp, -st * sp, 0.0);
        let (rt, rp) = (rho.f_t[k], rho.f_p[k]);
        let y = c + w * r;
        let yt = w * rt + w_t * r;
        let yp = w * rp + w_p * r;
        let ytt = w * rho.f_tt[k] + w_t * (2.0 * rt) - w * r;
        let ytp = w * rho.f_tp[k] + w_p * rt + w_t * rp + w_tp * r;
        let ypp = w * rho.f_pp[k] + w_p * (2.0 * rp) + w_pp * r;

        let amb = chart.local_geometry(&y)?;
        let g = amb.g;
        let ginv = g.try_inverse().ok_or_else(|| Error::Degenerate {
            node: k,
            reason: "ambient metric is singular".into(),
        })?;
        let gam = amb.christoffel;
        let gt = g * yt;
        let gp = g * yp;
        let gamma = Matrix2::new(yt.dot(&gt), yt.dot(&gp), yp.dot(&gt), yp.dot(&gp));
        let det = gamma.determinant();
        if !(gamma[(0, 0)] > 0.0 && det > 0.0) {
            return Err(Error::Degenerate {
                node: k,
                reason: format!("induced metric is not positive definite (det {det:e})"),
            });
        }
        let gamma_inv = Matrix2::new(gamma[(1, 1)], -gamma[(0, 1)], -gamma[(1, 0)], gamma[(0, 0)]) / det;
        let n_co = yt.cross(&yp);
        let nu_raw = ginv * n_co;
        let nu = nu_raw / n_co.dot(&nu_raw).sqrt();
        let nu_flat = g * nu;
        let cov = |u: &Vector3<f64>, v: &Vector3<f64>, d: &Vector3<f64>| d + gam.contract(u, v);
        let dtt = cov(&yt, &yt, &ytt);
        let dtp = cov(&yt, &yp, &ytp);
        let dpp = cov(&yp, &yp, &ypp);
        let a = -Matrix2::new(nu_flat.dot(&dtt), nu_flat.dot(&dtp), nu_flat.dot(&dtp), nu_flat.dot(&dpp));
        let h = trace2(&gamma_inv, &a);
        let a_circ = a - gamma * (0.5 * h);
        let ric = amb.ricci;
        let ric_nu = ric * nu;
        let ric_nn = nu.dot(&ric_nu);
        let omega = Vector2::new(yt.dot(&ric_nu), yp.dot(&ric_nu));
        let rt_ = ric * yt;
        let rp_ = ric * yp;
        let t = Matrix2::new(yt.dot(&rt_), yt.dot(&rp_), yp.dot(&rt_), yp.dot(&rp_));
        let t_circ = t - gamma * (0.5 * (amb.sc - ric_nn));
        let eup0 = yt * gamma_inv[(0, 0)] + yp * gamma_inv[(0, 1)];
        let eup1 = yt * gamma_inv[(1, 0)] + yp * gamma_inv[(1, 1)];
        // Γ̃^m_ij = g(∇_{e_i} e_j, E^m)
        let ge0 = g * eup0;
        let ge1 = g * eup1;
        let sch = [
            Matrix2::new(ge0.dot(&dtt), ge0.dot(&dtp), ge0.dot(&dtp), ge0.dot(&dpp)),
            Matrix2::new(ge1.dot(&dtt), ge1.dot(&dtp), ge1.dot(&dtp), ge1.dot(&dpp)),
        ];
        let dmu = det.sqrt() / st;
        f.position.push(y);
        f.direction.push(w);
        f.e_theta.push(yt);
        f.e_phi.push(yp);
        f.gamma.push(gamma);
        f.gamma_inv.push(gamma_inv);
        f.dmu.push(dmu);
        f.quad.push(dmu * grid.weights()[k]);
        f.nu.push(nu);
        f.nu_flat.push(nu_flat);
        f.a.push(a);
        f.a_circ.push(a_circ);
        f.h.push(h);
        f.a_circ_norm2.push(norm2_2(&gamma_inv, &a_circ));
        f.ric_nn.push(ric_nn);
        f.omega.push(omega);
        f.t.push(t);
        f.t_circ.push(t_circ);
        f.sc.push(amb.sc);
        f.alpha.push(nu_flat.dot(&w));
        f.dual.push([ge0, ge1]);
        f.metric.push(g);
        f.metric_inv.push(ginv);
        f.christoffel.push(gam);
        f.ricci.push(ric);
        f.surface_christoffel.push(sch);
    }
    Ok(f)
}

impl GeometryFields {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.quad.iter().sum()
    }

    /// `∫ f dμ`
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.quad.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `(∫ f² dμ)^{1/2}`
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.quad.iter().zip(f).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    }

    /// `|ω|²_γ` per node.
    pub fn omega_norm2(&self) -> Vec<f64> {
        self.omega
            .iter()
            .zip(&self.gamma_inv)
            .map(|(w, gi)| w.dot(&(gi * w)))
            .collect()
    }
}

/// `∫ f dμ` over the surface described by `fields`.
pub fn integrate(fields: &GeometryFields, grid: &SphericalGrid, f: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), fields.len());
    fields.integrate(f)
}
