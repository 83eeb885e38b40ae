//! Analytic Riemannian metrics on coordinate balls.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::curvature::{
    christoffel_derivative_from_jet, christoffel_from_jet, riemann_from_jet, Christoffel, CurvatureAtPoint,
    MetricJet,
};
use super::polynomial::{Polynomial, PolynomialJet};
use super::recenter::RecenteredChart;
use crate::error::{Error, Result};

/// Serializable description of a builtin metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Flat {
        valid_radius: f64,
    },
    SpaceForm {
        kappa: f64,
        valid_radius: f64,
    },
    Conformal {
        /// Conformal exponent `φ`; the metric is `e^{2φ} δ`.
        phi: Polynomial,
        valid_radius: f64,
    },
}

impl MetricSpec {
    pub fn build(&self) -> Result<MetricChart> {
        match self {
            MetricSpec::Flat { valid_radius } => MetricChart::flat(*valid_radius),
            MetricSpec::SpaceForm { kappa, valid_radius } => MetricChart::space_form(*kappa, *valid_radius),
            MetricSpec::Conformal { phi, valid_radius } => MetricChart::conformal(phi.clone(), *valid_radius),
        }
    }

    /// The default test metric `φ = 0.15 (y1² + 2 y2² + 3 y3²) − 0.1 y1`.
    pub fn morse_default() -> Self {
        MetricSpec::Conformal {
            phi: Polynomial::from_terms(&[
                ([2, 0, 0], 0.15),
                ([0, 2, 0], 0.30),
                ([0, 0, 2], 0.45),
                ([1, 0, 0], -0.1),
            ]),
            valid_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ConformalFactor {
    pub(crate) jet: PolynomialJet,
}

#[derive(Debug, Clone)]
pub(crate) enum ChartKind {
    Flat,
    SpaceForm { kappa: f64 },
    Conformal(Box<ConformalFactor>),
    Recentered(Box<RecenteredChart>),
}

/// A Riemannian metric on the coordinate ball `|y| < valid_radius`.
#[derive(Debug, Clone)]
pub struct MetricChart {
    valid_radius: f64,
    pub(crate) kind: ChartKind,
}

/// Ambient quantities needed by surface geometry at one chart point.
#[derive(Debug, Clone, Copy)]
pub struct LocalGeometry {
    pub g: Matrix3<f64>,
    pub christoffel: Christoffel,
    pub ricci: Matrix3<f64>,
    pub sc: f64,
}

impl MetricChart {
    pub fn flat(valid_radius: f64) -> Result<Self> {
        check_radius(valid_radius)?;
        Ok(MetricChart {
            valid_radius,
            kind: ChartKind::Flat,
        })
    }

    /// Constant sectional curvature `kappa` in geodesic polar form about the origin.
    pub fn space_form(kappa: f64, valid_radius: f64) -> Result<Self> {
        check_radius(valid_radius)?;
        if !kappa.is_finite() {
            return Err(Error::Config("space form curvature must be finite".into()));
        }
        if kappa > 0.0 && valid_radius * kappa.sqrt() >= std::f64::consts::PI {
            return Err(Error::Config(format!(
                "space form chart radius {valid_radius} reaches the conjugate locus for kappa = {kappa}"
            )));
        }
        Ok(MetricChart {
            valid_radius,
            kind: ChartKind::SpaceForm { kappa },
        })
    }

    pub fn conformal(phi: Polynomial, valid_radius: f64) -> Result<Self> {
        check_radius(valid_radius)?;
        if phi.degree() > 4 {
            return Err(Error::Config(format!(
                "conformal exponent has degree {}, at most 4 is supported",
                phi.degree()
            )));
        }
        Ok(MetricChart {
            valid_radius,
            kind: ChartKind::Conformal(Box::new(ConformalFactor {
                jet: PolynomialJet::new(phi),
            })),
        })
    }

    pub(crate) fn from_recentered(chart: RecenteredChart, valid_radius: f64) -> Self {
        MetricChart {
            valid_radius,
            kind: ChartKind::Recentered(Box::new(chart)),
        }
    }

    pub fn valid_radius(&self) -> f64 {
        self.valid_radius
    }

    pub fn is_flat(&self) -> bool {
        match &self.kind {
            ChartKind::Flat => true,
            ChartKind::Conformal(c) => c.jet.value.is_zero(),
            ChartKind::SpaceForm { kappa } => *kappa == 0.0,
            ChartKind::Recentered(r) => r.base().is_flat(),
        }
    }

    /// Short label used in report headers.
    pub fn describe(&self) -> String {
        match &self.kind {
            ChartKind::Flat => "flat".to_string(),
            ChartKind::SpaceForm { kappa } => format!("space_form(kappa={kappa})"),
            ChartKind::Conformal(c) => format!("conformal({} terms)", c.jet.value.terms.len()),
            ChartKind::Recentered(r) => format!("normal coordinates of {}", r.base().describe()),
        }
    }

    #[inline]
    pub fn contains(&self, y: &Vector3<f64>) -> bool {
        y.norm() < self.valid_radius
    }

    #[inline]
    pub(crate) fn check(&self, y: &Vector3<f64>) -> Result<()> {
        if self.contains(y) && y.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::outside(y, self.valid_radius))
        }
    }

    pub fn metric(&self, y: &Vector3<f64>) -> Result<Matrix3<f64>> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Flat => Matrix3::identity(),
            ChartKind::SpaceForm { kappa } => space_form_jet(*kappa, y, false).g,
            ChartKind::Conformal(c) => Matrix3::identity() * (2.0 * c.jet.value.eval(y)).exp(),
            ChartKind::Recentered(r) => r.metric(y)?,
        })
    }

    /// Metric with first and second partial derivatives.
    pub fn jet(&self, y: &Vector3<f64>) -> Result<MetricJet> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Flat => MetricJet {
                g: Matrix3::identity(),
                dg: [Matrix3::zeros(); 3],
                d2g: [[Matrix3::zeros(); 3]; 3],
            },
            ChartKind::SpaceForm { kappa } => space_form_jet(*kappa, y, true),
            ChartKind::Conformal(c) => {
                let (phi, grad, hess) = c.jet.eval_low(y);
                let e = (2.0 * phi).exp();
                let id = Matrix3::identity();
                let dg = [0, 1, 2].map(|a| id * (2.0 * grad[a] * e));
                let d2g = [0, 1, 2]
                    .map(|a| [0, 1, 2].map(|b| id * ((2.0 * hess[(a, b)] + 4.0 * grad[a] * grad[b]) * e)));
                MetricJet { g: id * e, dg, d2g }
            }
            ChartKind::Recentered(r) => r.jet(y)?,
        })
    }

    pub fn christoffel(&self, y: &Vector3<f64>) -> Result<Christoffel> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Flat => Christoffel::zero(),
            ChartKind::Conformal(c) => {
                let (_, d, _) = c.jet.eval_low(y);
                conformal_christoffel(&d)
            }
            _ => christoffel_from_jet(&self.jet(y)?).1,
        })
    }

    /// Christoffel symbols and their partial derivatives `∂_m Γ`.
    pub fn christoffel_derivative(&self, y: &Vector3<f64>) -> Result<(Christoffel, [Christoffel; 3])> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Flat => (Christoffel::zero(), [Christoffel::zero(); 3]),
            ChartKind::Conformal(c) => {
                let (_, d, h) = c.jet.eval_low(y);
                let gamma = conformal_christoffel(&d);
                let dgamma = [0, 1, 2].map(|m| conformal_christoffel(&h.column(m).into_owned()));
                (gamma, dgamma)
            }
            _ => {
                let (_, g, dg) = christoffel_derivative_from_jet(&self.jet(y)?);
                (g, dg)
            }
        })
    }

    /// Ricci tensor and scalar curvature, using closed forms where available.
    pub fn ricci(&self, y: &Vector3<f64>) -> Result<(Matrix3<f64>, f64)> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Flat => (Matrix3::zeros(), 0.0),
            ChartKind::SpaceForm { kappa } => {
                let g = space_form_jet(*kappa, y, false).g;
                (g * (2.0 * kappa), 6.0 * kappa)
            }
            ChartKind::Conformal(c) => {
                let (phi, d, h) = c.jet.eval_low(y);
                let lap = h.trace();
                let grad2 = d.norm_squared();
                let ric = -(h - d * d.transpose()) - Matrix3::identity() * (lap + grad2);
                let sc = (-2.0 * phi).exp() * (-4.0 * lap - 2.0 * grad2);
                (ric, sc)
            }
            ChartKind::Recentered(_) => {
                let (_, ric, _, sc, _) = riemann_from_jet(&self.jet(y)?);
                (ric, sc)
            }
        })
    }

    /// Metric, Christoffel symbols, Ricci tensor and scalar curvature at once.
    pub fn local_geometry(&self, y: &Vector3<f64>) -> Result<LocalGeometry> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Conformal(c) => {
                let (phi, d, h) = c.jet.eval_low(y);
                let lap = h.trace();
                let grad2 = d.norm_squared();
                LocalGeometry {
                    g: Matrix3::identity() * (2.0 * phi).exp(),
                    christoffel: conformal_christoffel(&d),
                    ricci: -(h - d * d.transpose()) - Matrix3::identity() * (lap + grad2),
                    sc: (-2.0 * phi).exp() * (-4.0 * lap - 2.0 * grad2),
                }
            }
            ChartKind::Recentered(_) => {
                let jet = self.jet(y)?;
                let (_, ric, _, sc, gamma) = riemann_from_jet(&jet);
                LocalGeometry {
                    g: jet.g,
                    christoffel: gamma,
                    ricci: ric,
                    sc,
                }
            }
            _ => {
                let (ricci, sc) = self.ricci(y)?;
                LocalGeometry {
                    g: self.metric(y)?,
                    christoffel: self.christoffel(y)?,
                    ricci,
                    sc,
                }
            }
        })
    }

    /// Scalar curvature with its coordinate gradient and coordinate Hessian
    /// (partial derivatives, not covariant).
    pub fn scalar_curvature_jet(&self, y: &Vector3<f64>) -> Result<(f64, Vector3<f64>, Matrix3<f64>)> {
        self.check(y)?;
        Ok(match &self.kind {
            ChartKind::Flat => (0.0, Vector3::zeros(), Matrix3::zeros()),
            ChartKind::SpaceForm { kappa } => (6.0 * kappa, Vector3::zeros(), Matrix3::zeros()),
            ChartKind::Conformal(c) => conformal_scalar_jet(&c.jet, y),
            ChartKind::Recentered(r) => r.scalar_curvature_jet(y)?,
        })
    }

    /// Full curvature package. Rm, Ric and Sc are always assembled from the
    /// metric jet; `∇Sc` and `Hess Sc` come from [`Self::scalar_curvature_jet`].
    pub fn curvature_at(&self, y: &Vector3<f64>) -> Result<CurvatureAtPoint> {
        let jet = self.jet(y)?;
        let (rm, ric, _ginv, sc, gamma) = riemann_from_jet(&jet);
        let (_, grad_sc, d2sc) = self.scalar_curvature_jet(y)?;
        let mut hess_sc = d2sc;
        for k in 0..3 {
            hess_sc -= gamma.0[k] * grad_sc[k];
        }
        let hess_sc = (hess_sc + hess_sc.transpose()) * 0.5;
        Ok(CurvatureAtPoint {
            point: [y.x, y.y, y.z],
            rm,
            g: jet.g,
            ric,
            sc,
            grad_sc,
            hess_sc,
            einstein: ric - jet.g * (0.5 * sc),
        })
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("valid_radius must be positive, got {r}")))
    }
}

/// `Γ^k_ij = δ_ki d_j + δ_kj d_i − δ_ij d_k` for `g = e^{2φ}δ` with `d = ∇φ`;
/// the same linear map applied to a column of `Hess φ` gives `∂_m Γ`.
fn conformal_christoffel(d: &Vector3<f64>) -> Christoffel {
    let mut out = Christoffel::zero();
    for k in 0..3 {
        let m = &mut out.0[k];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                if k == i {
                    v += d[j];
                }
                if k == j {
                    v += d[i];
                }
                if i == j {
                    v -= d[k];
                }
                m[(i, j)] = v;
            }
        }
    }
    out
}

/// Closed-form `Sc = e^{−2φ}(−4Δφ − 2|∇φ|²)` and its first two partial derivatives.
fn conformal_scalar_jet(jet: &PolynomialJet, y: &Vector3<f64>) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let v = jet.eval(y);
    let e = (-2.0 * v.value).exp();
    let d = v.grad;
    let h = v.hess;
    let f = -4.0 * v.lap - 2.0 * d.norm_squared();
    let fi = -4.0 * v.lap_grad - 4.0 * h * d;
    let mut fij = -4.0 * v.lap_hess - 4.0 * h * h;
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += d[k] * v.third[k][i][j];
            }
            fij[(i, j)] -= 4.0 * s;
        }
    }
    let sc = e * f;
    let grad = (fi - d * (2.0 * f)) * e;
    let hess = (fij - h * (2.0 * f) - (d * fi.transpose() + fi * d.transpose()) * 2.0
        + d * d.transpose() * (4.0 * f))
        * e;
    (sc, grad, hess)
}

/// Power series of `f(x) = sin²(√x)/x` and `q(x) = (1 − f(x))/x`, entire in `x`.
const SERIES_TERMS: usize = 24;

fn series_coefficients() -> [f64; SERIES_TERMS + 1] {
    // c_m = (−1)^m 2^{2m+1} / (2m+2)!
    let mut c = [0.0; SERIES_TERMS + 1];
    let mut fact = 2.0; // (2m+2)! at m = 0
    let mut pow = 2.0; // 2^{2m+1}
    for (m, cm) in c.iter_mut().enumerate() {
        if m > 0 {
            fact *= ((2 * m + 1) * (2 * m + 2)) as f64;
            pow *= 4.0;
        }
        *cm = if m % 2 == 0 { pow / fact } else { -pow / fact };
    }
    c
}

/// Values `(f, f', f'', q, q', q'')` of the space-form profile at `x = κ r²`.
pub(crate) fn space_form_profile(x: f64) -> [f64; 6] {
    if x.abs() < 1.0 {
        let c = series_coefficients();
        let mut out = [0.0; 6];
        let mut xp = [1.0; SERIES_TERMS + 1];
        for m in 1..=SERIES_TERMS {
            xp[m] = xp[m - 1] * x;
        }
        for m in 0..=SERIES_TERMS {
            out[0] += c[m] * xp[m];
            if m >= 1 {
                out[1] += c[m] * m as f64 * xp[m - 1];
            }
            if m >= 2 {
                out[2] += c[m] * (m * (m - 1)) as f64 * xp[m - 2];
            }
        }
        // q(x) = −Σ_{k≥0} c_{k+1} x^k
        for k in 0..SERIES_TERMS {
            let d = -c[k + 1];
            out[3] += d * xp[k];
            if k >= 1 {
                out[4] += d * k as f64 * xp[k - 1];
            }
            if k >= 2 {
                out[5] += d * (k * (k - 1)) as f64 * xp[k - 2];
            }
        }
        out
    } else {
        let (f, f1, f2) = if x > 0.0 {
            let t = x.sqrt();
            let (s, c) = t.sin_cos();
            (
                s * s / (t * t),
                (s * c * t - s * s) / t.powi(4),
                ((c * c - s * s) * t * t - 5.0 * s * c * t + 4.0 * s * s) / (2.0 * t.powi(6)),
            )
        } else {
            let t = (-x).sqrt();
            let (s, c) = (t.sinh(), t.cosh());
            (
                s * s / (t * t),
                -(s * c * t - s * s) / t.powi(4),
                ((c * c + s * s) * t * t - 5.0 * s * c * t + 4.0 * s * s) / (2.0 * t.powi(6)),
            )
        };
        let q = (1.0 - f) / x;
        let q1 = -(f1 + q) / x;
        let q2 = -(f2 + 2.0 * q1) / x;
        [f, f1, f2, q, q1, q2]
    }
}

/// `g_ij = a(u) δ_ij + B(u) y_i y_j` with `u = |y|²`, `a = f(κu)`, `B = κ q(κu)`.
fn space_form_jet(kappa: f64, y: &Vector3<f64>, derivatives: bool) -> MetricJet {
    let u = y.norm_squared();
    let p = space_form_profile(kappa * u);
    let a = p[0];
    let b = kappa * p[3];
    let id = Matrix3::identity();
    let yy = y * y.transpose();
    let g = id * a + yy * b;
    if !derivatives {
        return MetricJet {
            g,
            dg: [Matrix3::zeros(); 3],
            d2g: [[Matrix3::zeros(); 3]; 3],
        };
    }
    let a1 = kappa * p[1];
    let a2 = kappa * kappa * p[2];
    let b1 = kappa * kappa * p[4];
    let b2 = kappa * kappa * kappa * p[5];
    let basis = |i: usize| Vector3::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
    // E_c = e_c y^T + y e_c^T
    let sym = [0, 1, 2].map(|c| {
        let e = basis(c);
        e * y.transpose() + y * e.transpose()
    });
    let inner = id * a1 + yy * b1;
    let dg = [0, 1, 2].map(|c| inner * (2.0 * y[c]) + sym[c] * b);
    let mut d2g = [[Matrix3::zeros(); 3]; 3];
    for c in 0..3 {
        for d in 0..3 {
            let ec = basis(c);
            let ed = basis(d);
            let mut m = (id * a2 + yy * b2) * (4.0 * y[c] * y[d]);
            if c == d {
                m += inner * 2.0;
            }
            m += sym[d] * (2.0 * y[c] * b1) + sym[c] * (2.0 * y[d] * b1);
            m += (ec * ed.transpose() + ed * ec.transpose()) * b;
            d2g[c][d] = m;
        }
    }
    MetricJet { g, dg, d2g }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_branches_agree_at_the_switch() {
        for &x in &[0.999_999, -0.999_999, 1.000_001, -1.000_001] {
            let near = space_form_profile(x);
            let other = space_form_profile(if x.abs() < 1.0 { x.signum() * 1.000_001 } else { x.signum() * 0.999_999 });
            for k in 0..6 {
                assert!((near[k] - other[k]).abs() < 1e-5, "component {k}: {:?} vs {:?}", near, other);
            }
        }
        let p = space_form_profile(0.0);
        assert_eq!(p[0], 1.0);
        assert!((p[1] + 1.0 / 3.0).abs() < 1e-15);
        assert!((p[3] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_profile_matches_trig() {
        for &x in &[1.5f64, 4.0, -2.0, -9.0] {
            let p = space_form_profile(x);
            let t = x.abs().sqrt();
            let expect = if x > 0.0 { (t.sin() / t).powi(2) } else { (t.sinh() / t).powi(2) };
            assert!((p[0] - expect).abs() < 1e-14);
            let h = 1e-5;
            let fd = (space_form_profile(x + h)[0] - space_form_profile(x - h)[0]) / (2.0 * h);
            assert!((fd - p[1]).abs() < 1e-9);
            let fd2 = (space_form_profile(x + h)[4] - space_form_profile(x - h)[4]) / (2.0 * h);
            assert!((fd2 - p[5]).abs() < 1e-8);
        }
    }

    #[test]
    fn conformal_degree_is_bounded() {
        let phi = Polynomial::from_terms(&[([5, 0, 0], 1.0)]);
        assert!(matches!(MetricChart::conformal(phi, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn outside_points_are_rejected() {
        let chart = MetricChart::flat(1.0).unwrap();
        assert!(matches!(
            chart.metric(&Vector3::new(0.0, 0.0, 1.5)),
            Err(Error::OutsideChart { .. })
        ));
    }
}
