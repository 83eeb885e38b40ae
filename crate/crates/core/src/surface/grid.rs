//! Gauss–Legendre × uniform-longitude grid on S² with real orthonormal
//! spherical harmonics.
//!
//! Real harmonics: `Y_l0 = P̄_l^0(cos θ)`, `Y_lm = √2 P̄_l^m cos(mφ)` for
//! `m > 0` and `Y_lm = √2 P̄_l^{|m|} sin(|m|φ)` for `m < 0`, where `P̄` is the
//! associated Legendre function normalized so that `∫_{S²} Y² = 1`, without the
//! Condon–Shortley phase. Coefficient `(l, m)` lives at index `l² + l + m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[inline]
pub fn coeff_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients of a degree-`l` expansion.
#[inline]
pub fn coeff_count(l: usize) -> usize {
    (l + 1) * (l + 1)
}

/// Degree of a coefficient vector of length `(l+1)²`.
pub fn degree_of(len: usize) -> usize {
    let l = (len as f64).sqrt().round() as usize;
    assert_eq!(l * l, len, "coefficient vector length {len} is not a square");
    l - 1
}

#[inline]
fn leg_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// `P̄_l^m`, `dP̄/dθ`, `d²P̄/dθ²` at colatitude with `x = cos θ`, `s = sin θ`,
/// for `0 ≤ m ≤ l ≤ lmax`, in triangular order `l(l+1)/2 + m`.
pub(crate) fn legendre_table(x: f64, s: f64, lmax: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = leg_index(lmax, lmax) + 1;
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut d2p = vec![0.0; n];
    // x' = -s, s' = x along θ.
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    let mut dpmm = 0.0;
    let mut d2pmm = 0.0;
    for m in 0..=lmax {
        if m > 0 {
            let c = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let (v, d, d2) = (pmm, dpmm, d2pmm);
            pmm = c * s * v;
            dpmm = c * (x * v + s * d);
            d2pmm = c * (-s * v + 2.0 * x * d + s * d2);
        }
        let k = leg_index(m, m);
        p[k] = pmm;
        dp[k] = dpmm;
        d2p[k] = d2pmm;
        if m == lmax {
            break;
        }
        let c = ((2 * m + 3) as f64).sqrt();
        let k1 = leg_index(m + 1, m);
        p[k1] = c * x * pmm;
        dp[k1] = c * (-s * pmm + x * dpmm);
        d2p[k1] = c * (-x * pmm - 2.0 * s * dpmm + x * d2pmm);
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let (k0, k1, k2) = (leg_index(l, m), leg_index(l - 1, m), leg_index(l - 2, m));
            p[k0] = a * (x * p[k1] - b * p[k2]);
            dp[k0] = a * (-s * p[k1] + x * dp[k1] - b * dp[k2]);
            d2p[k0] = a * (-x * p[k1] - 2.0 * s * dp[k1] + x * d2p[k1] - b * d2p[k2]);
        }
    }
    (p, dp, d2p)
}

/// Gauss–Legendre nodes (descending) and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Grid values of a field and its angular derivatives.
#[derive(Debug, Clone)]
pub struct FieldDerivatives {
    pub f: Vec<f64>,
    pub f_t: Vec<f64>,
    pub f_p: Vec<f64>,
    pub f_tt: Vec<f64>,
    pub f_tp: Vec<f64>,
    pub f_pp: Vec<f64>,
}

/// Value and angular derivatives of an expansion at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointValue {
    pub f: f64,
    pub f_t: f64,
    pub f_p: f64,
    pub f_tt: f64,
    pub f_tp: f64,
    pub f_pp: f64,
}

#[derive(Debug, Clone)]
pub struct SphericalGrid {
    n_theta: usize,
    n_phi: usize,
    max_degree: usize,
    field_degree: usize,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    phi: Vec<f64>,
    ring_weights: Vec<f64>,
    weights: Vec<f64>,
    // per ring, triangular Legendre tables up to field_degree
    plm: Vec<Vec<f64>>,
    dplm: Vec<Vec<f64>>,
    d2plm: Vec<Vec<f64>>,
    // [m][i]
    cos_mp: Vec<Vec<f64>>,
    sin_mp: Vec<Vec<f64>>,
}

/// Builds a grid with `n_theta` Gauss–Legendre rings, `n_phi` longitudes and
/// surface expansions of degree `l`.
pub fn make_grid(n_theta: usize, n_phi: usize, l: usize) -> Result<SphericalGrid> {
    SphericalGrid::new(n_theta, n_phi, l)
}

impl SphericalGrid {
    pub fn new(n_theta: usize, n_phi: usize, l: usize) -> Result<Self> {
        if n_phi % 2 != 0 || n_phi < 2 * l + 2 || n_theta < l + 1 || l == 0 {
            return Err(Error::Config(format!(
                "grid {n_theta}x{n_phi} cannot carry degree {l}: need n_phi even, n_phi >= 2L+2, n_theta >= L+1, L >= 1"
            )));
        }
        let field_degree = (n_theta - 1).min(n_phi / 2 - 1);
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let sin_theta: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|i| 2.0 * PI * i as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for wj in &w {
            for _ in 0..n_phi {
                weights.push(wj * dphi);
            }
        }
        let mut plm = Vec::with_capacity(n_theta);
        let mut dplm = Vec::with_capacity(n_theta);
        let mut d2plm = Vec::with_capacity(n_theta);
        for j in 0..n_theta {
            let (p, dp, d2p) = legendre_table(x[j], sin_theta[j], field_degree);
            plm.push(p);
            dplm.push(dp);
            d2plm.push(d2p);
        }
        let cos_mp = (0..=field_degree)
            .map(|m| phi.iter().map(|p| (m as f64 * p).cos()).collect())
            .collect();
        let sin_mp = (0..=field_degree)
            .map(|m| phi.iter().map(|p| (m as f64 * p).sin()).collect())
            .collect();
        Ok(SphericalGrid {
            n_theta,
            n_phi,
            max_degree: l,
            field_degree,
            theta,
            cos_theta: x,
            sin_theta,
            phi,
            ring_weights: w,
            weights,
            plm,
            dplm,
            d2plm,
            cos_mp,
            sin_mp,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// Degree `L` of surface expansions.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Highest degree resolved exactly by analysis on this grid.
    pub fn field_degree(&self) -> usize {
        self.field_degree
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weights for the round measure `sin θ dθ dφ`, node-major
    /// `k = j·n_phi + i`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.theta[k / self.n_phi]
    }

    pub fn phi(&self, k: usize) -> f64 {
        self.phi[k % self.n_phi]
    }

    pub fn sin_theta(&self, k: usize) -> f64 {
        self.sin_theta[k / self.n_phi]
    }

    pub fn cos_theta(&self, k: usize) -> f64 {
        self.cos_theta[k / self.n_phi]
    }

    pub fn ring_weights(&self) -> &[f64] {
        &self.ring_weights
    }

    /// Unit vector `ω` at node `k`.
    pub fn direction(&self, k: usize) -> [f64; 3] {
        let (st, ct) = (self.sin_theta(k), self.cos_theta(k));
        let p = self.phi(k);
        [st * p.cos(), st * p.sin(), ct]
    }

    /// Quadrature of grid values against the round measure.
    pub fn quadrature(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    /// Spectral coefficients up to degree `l ≤ field_degree`.
    pub fn analyze(&self, f: &[f64], l: usize) -> Vec<f64> {
        assert!(l <= self.field_degree, "analysis degree {l} exceeds grid resolution {}", self.field_degree);
        assert_eq!(f.len(), self.len());
        let mut out = vec![0.0; coeff_count(l)];
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut fc = vec![0.0; l + 1];
        let mut fs = vec![0.0; l + 1];
        for j in 0..self.n_theta {
            let row = &f[j * self.n_phi..(j + 1) * self.n_phi];
            for m in 0..=l {
                let (cm, sm) = (&self.cos_mp[m], &self.sin_mp[m]);
                let mut a = 0.0;
                let mut b = 0.0;
                for i in 0..self.n_phi {
                    a += row[i] * cm[i];
                    b += row[i] * sm[i];
                }
                fc[m] = a * dphi * self.ring_weights[j];
                fs[m] = b * dphi * self.ring_weights[j];
            }
            let p = &self.plm[j];
            for m in 0..=l {
                let norm = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                for ll in m..=l {
                    let pv = norm * p[leg_index(ll, m)];
                    out[coeff_index(ll, m as i64)] += pv * fc[m];
                    if m > 0 {
                        out[coeff_index(ll, -(m as i64))] += pv * fs[m];
                    }
                }
            }
        }
        out
    }

    /// Analysis at the full grid resolution.
    pub fn analyze_full(&self, f: &[f64]) -> Vec<f64> {
        self.analyze(f, self.field_degree)
    }

    fn ring_sums(coeffs: &[f64], table: &[f64], ac: &mut [f64], as_: &mut [f64]) {
        let l = degree_of(coeffs.len());
        for m in 0..=l {
            let norm = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            let mut a = 0.0;
            let mut b = 0.0;
            for ll in m..=l {
                let pv = table[leg_index(ll, m)];
                a += coeffs[coeff_index(ll, m as i64)] * pv;
                if m > 0 {
                    b += coeffs[coeff_index(ll, -(m as i64))] * pv;
                }
            }
            ac[m] = norm * a;
            as_[m] = norm * b;
        }
    }

    fn check_degree(&self, coeffs: &[f64]) -> usize {
        let l = degree_of(coeffs.len());
        assert!(l <= self.field_degree, "synthesis degree {l} exceeds grid resolution {}", self.field_degree);
        l
    }

    /// Grid values of an expansion.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let l = self.check_degree(coeffs);
        let mut out = vec![0.0; self.len()];
        let mut ac = vec![0.0; l + 1];
        let mut as_ = vec![0.0; l + 1];
        for j in 0..self.n_theta {
            Self::ring_sums(coeffs, &self.plm[j], &mut ac, &mut as_);
            let row = &mut out[j * self.n_phi..(j + 1) * self.n_phi];
            for m in 0..=l {
                let (cm, sm) = (&self.cos_mp[m], &self.sin_mp[m]);
                for i in 0..self.n_phi {
                    row[i] += ac[m] * cm[i] + as_[m] * sm[i];
                }
            }
        }
        out
    }

    /// Values and first angular derivatives `(f, f_θ, f_φ)`.
    pub fn synthesize_first(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let l = self.check_degree(coeffs);
        let n = self.len();
        let (mut f, mut ft, mut fp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut ac = vec![0.0; l + 1];
        let mut as_ = vec![0.0; l + 1];
        let mut dc = vec![0.0; l + 1];
        let mut ds = vec![0.0; l + 1];
        for j in 0..self.n_theta {
            Self::ring_sums(coeffs, &self.plm[j], &mut ac, &mut as_);
            Self::ring_sums(coeffs, &self.dplm[j], &mut dc, &mut ds);
            let base = j * self.n_phi;
            for m in 0..=l {
                let (cm, sm) = (&self.cos_mp[m], &self.sin_mp[m]);
                let mf = m as f64;
                for i in 0..self.n_phi {
                    let k = base + i;
                    f[k] += ac[m] * cm[i] + as_[m] * sm[i];
                    ft[k] += dc[m] * cm[i] + ds[m] * sm[i];
                    fp[k] += mf * (as_[m] * cm[i] - ac[m] * sm[i]);
                }
            }
        }
        (f, ft, fp)
    }

    /// Values with first and second angular derivatives.
    pub fn synthesize_all(&self, coeffs: &[f64]) -> FieldDerivatives {
        let l = self.check_degree(coeffs);
        let n = self.len();
        let mut d = FieldDerivatives {
            f: vec![0.0; n],
            f_t: vec![0.0; n],
            f_p: vec![0.0; n],
            f_tt: vec![0.0; n],
            f_tp: vec![0.0; n],
            f_pp: vec![0.0; n],
        };
        let mut ac = vec![0.0; l + 1];
        let mut as_ = vec![0.0; l + 1];
        let mut dc = vec![0.0; l + 1];
        let mut ds = vec![0.0; l + 1];
        let mut ec = vec![0.0; l + 1];
        let mut es = vec![0.0; l + 1];
        for j in 0..self.n_theta {
            Self::ring_sums(coeffs, &self.plm[j], &mut ac, &mut as_);
            Self::ring_sums(coeffs, &self.dplm[j], &mut dc, &mut ds);
            Self::ring_sums(coeffs, &self.d2plm[j], &mut ec, &mut es);
            let base = j * self.n_phi;
            for m in 0..=l {
                let (cm, sm) = (&self.cos_mp[m], &self.sin_mp[m]);
                let mf = m as f64;
                for i in 0..self.n_phi {
                    let k = base + i;
                    d.f[k] += ac[m] * cm[i] + as_[m] * sm[i];
                    d.f_t[k] += dc[m] * cm[i] + ds[m] * sm[i];
                    d.f_p[k] += mf * (as_[m] * cm[i] - ac[m] * sm[i]);
                    d.f_tt[k] += ec[m] * cm[i] + es[m] * sm[i];
                    d.f_tp[k] += mf * (ds[m] * cm[i] - dc[m] * sm[i]);
                    d.f_pp[k] -= mf * mf * (ac[m] * cm[i] + as_[m] * sm[i]);
                }
            }
        }
        d
    }

    /// Evaluates an expansion and its derivatives at an arbitrary `(θ, φ)`.
    pub fn eval_point(coeffs: &[f64], theta: f64, phi: f64) -> PointValue {
        let l = degree_of(coeffs.len());
        let (p, dp, d2p) = legendre_table(theta.cos(), theta.sin(), l);
        let mut out = PointValue::default();
        for m in 0..=l {
            let norm = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            let (c, s) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
            let mf = m as f64;
            for ll in m..=l {
                let k = leg_index(ll, m);
                let a = norm * coeffs[coeff_index(ll, m as i64)];
                let b = if m > 0 { norm * coeffs[coeff_index(ll, -(m as i64))] } else { 0.0 };
                let ang = a * c + b * s;
                let angp = mf * (b * c - a * s);
                out.f += p[k] * ang;
                out.f_t += dp[k] * ang;
                out.f_p += p[k] * angp;
                out.f_tt += d2p[k] * ang;
                out.f_tp += dp[k] * angp;
                out.f_pp -= mf * mf * p[k] * ang;
            }
        }
        out
    }

    /// Truncates or zero-pads a coefficient vector to degree `l`.
    pub fn resize(coeffs: &[f64], l: usize) -> Vec<f64> {
        let mut out = vec![0.0; coeff_count(l)];
        let n = out.len().min(coeffs.len());
        out[..n].copy_from_slice(&coeffs[..n]);
        out
    }

    /// Grid values of the real harmonic `Y_lm`.
    pub fn harmonic(&self, l: usize, m: i64) -> Vec<f64> {
        let mut c = vec![0.0; coeff_count(l)];
        c[coeff_index(l, m)] = 1.0;
        self.synthesize(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        for p in 0..24 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "p={p}: {q} vs {exact}");
        }
    }

    #[test]
    fn low_order_harmonics_match_closed_forms() {
        let (th, ph) = (0.7_f64, 1.9_f64);
        let y = |l, m| {
            let mut c = vec![0.0; coeff_count(2)];
            c[coeff_index(l, m)] = 1.0;
            SphericalGrid::eval_point(&c, th, ph).f
        };
        let (x, s) = (th.cos(), th.sin());
        assert!((y(0, 0) - 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!((y(1, 0) - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-15);
        assert!((y(1, 1) - (3.0 / (4.0 * PI)).sqrt() * s * ph.cos()).abs() < 1e-15);
        assert!((y(1, -1) - (3.0 / (4.0 * PI)).sqrt() * s * ph.sin()).abs() < 1e-15);
        let c20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * x * x - 1.0);
        assert!((y(2, 0) - c20).abs() < 1e-15);
        let c22 = (15.0 / (16.0 * PI)).sqrt() * s * s * (2.0 * ph).cos();
        assert!((y(2, 2) - c22).abs() < 1e-15);
    }

    #[test]
    fn theta_derivatives_match_finite_differences() {
        let l = 9;
        let c: Vec<f64> = (0..coeff_count(l)).map(|k| ((k * 7919) % 13) as f64 / 13.0 - 0.4).collect();
        let (th, ph, h) = (1.1, 0.3, 1e-3);
        let v = SphericalGrid::eval_point(&c, th, ph);
        // fourth-order central differences
        let d = |f: &dyn Fn(f64) -> f64| (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
        let at_t = |s: f64| SphericalGrid::eval_point(&c, th + s, ph);
        let at_p = |s: f64| SphericalGrid::eval_point(&c, th, ph + s);
        assert!((d(&|s| at_t(s).f) - v.f_t).abs() < 1e-8);
        assert!((d(&|s| at_t(s).f_t) - v.f_tt).abs() < 1e-8);
        assert!((d(&|s| at_p(s).f) - v.f_p).abs() < 1e-8);
        assert!((d(&|s| at_p(s).f_t) - v.f_tp).abs() < 1e-8);
    }

    #[test]
    fn grid_rejects_underresolved_degree() {
        assert!(make_grid(8, 16, 10).is_err());
        assert!(make_grid(16, 31, 10).is_err());
    }
}
