//! Christoffel symbols and curvature tensors assembled from metric jets.
//!
//! Sign convention: `Rm_{abcd} = g((∇_a∇_b − ∇_b∇_a)∂_c, ∂_d)`, so that the
//! round sphere has positive sectional curvature `Rm_{abba}` and
//! `Ric_{bc} = g^{ad} Rm_{abcd}`.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

/// Metric value with first and second coordinate derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct MetricJet {
    pub g: Matrix3<f64>,
    /// `dg[c] = ∂_c g`
    pub dg: [Matrix3<f64>; 3],
    /// `d2g[c][d] = ∂_c ∂_d g`
    pub d2g: [[Matrix3<f64>; 3]; 3],
}

/// Christoffel symbols of the second kind; `self.0[k][(i, j)] = Γ^k_{ij}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Christoffel(pub [Matrix3<f64>; 3]);

impl Christoffel {
    pub fn zero() -> Self {
        Christoffel([Matrix3::zeros(); 3])
    }

    /// `Γ(v, w)^k = Γ^k_{ij} v^i w^j`
    #[inline]
    pub fn contract(&self, v: &Vector3<f64>, w: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            v.dot(&(self.0[0] * w)),
            v.dot(&(self.0[1] * w)),
            v.dot(&(self.0[2] * w)),
        )
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][(i, j)]
    }
}

/// Fully covariant Riemann tensor stored densely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Riemann(pub [f64; 81]);

impl Riemann {
    pub fn zero() -> Self {
        Riemann([0.0; 81])
    }

    #[inline]
    fn idx(a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * 3 + b) * 3 + c) * 3 + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.0[Self::idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.0[Self::idx(a, b, c, d)] = v;
    }

    /// `Rm(u, v, w, x)` for ambient vectors.
    pub fn apply(&self, u: &Vector3<f64>, v: &Vector3<f64>, w: &Vector3<f64>, x: &Vector3<f64>) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let ab = u[a] * v[b];
                if ab == 0.0 {
                    continue;
                }
                for c in 0..3 {
                    let abc = ab * w[c];
                    for d in 0..3 {
                        s += abc * x[d] * self.get(a, b, c, d);
                    }
                }
            }
        }
        s
    }

    /// Constant-curvature tensor `κ (g_ad g_bc − g_ac g_bd)`.
    pub fn constant_curvature(kappa: f64, g: &Matrix3<f64>) -> Self {
        let mut r = Riemann::zero();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        r.set(a, b, c, d, kappa * (g[(a, d)] * g[(b, c)] - g[(a, c)] * g[(b, d)]));
                    }
                }
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Curvature quantities at a chart point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureAtPoint {
    pub point: [f64; 3],
    #[serde(skip)]
    pub rm: Riemann,
    #[serde(skip)]
    pub g: Matrix3<f64>,
    pub ric: Matrix3<f64>,
    pub sc: f64,
    /// Coordinate gradient `∂_a Sc` (a covector).
    pub grad_sc: Vector3<f64>,
    /// Covariant Hessian `∇²Sc = ∂²Sc − Γ^k ∂_k Sc`.
    pub hess_sc: Matrix3<f64>,
    pub einstein: Matrix3<f64>,
}

impl CurvatureAtPoint {
    /// `|∇Sc|_g`
    pub fn grad_sc_norm(&self) -> f64 {
        let ginv = self.g.try_inverse().unwrap_or_else(Matrix3::identity);
        (self.grad_sc.transpose() * ginv * self.grad_sc)[(0, 0)].max(0.0).sqrt()
    }
}

pub fn christoffel_from_jet(jet: &MetricJet) -> (Matrix3<f64>, Christoffel) {
    let ginv = jet.g.try_inverse().expect("metric must be invertible");
    // first kind: Γ_{ij,l} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = [Matrix3::zeros(); 3];
    for (l, fl) in first.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                fl[(i, j)] = 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
            }
        }
    }
    let mut gamma = Christoffel::zero();
    for k in 0..3 {
        for l in 0..3 {
            let gkl = ginv[(k, l)];
            if gkl != 0.0 {
                gamma.0[k] += first[l] * gkl;
            }
        }
    }
    (ginv, gamma)
}

/// Christoffel symbols and their coordinate derivatives, `dgamma[m] = ∂_m Γ`.
pub fn christoffel_derivative_from_jet(jet: &MetricJet) -> (Matrix3<f64>, Christoffel, [Christoffel; 3]) {
    let (ginv, gamma) = christoffel_from_jet(jet);
    let mut dgamma = [Christoffel::zero(); 3];
    for (m, dgm) in dgamma.iter_mut().enumerate() {
        let dginv = -ginv * jet.dg[m] * ginv;
        let mut first = [Matrix3::zeros(); 3];
        let mut dfirst = [Matrix3::zeros(); 3];
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    first[l][(i, j)] = 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                    dfirst[l][(i, j)] =
                        0.5 * (jet.d2g[m][i][(j, l)] + jet.d2g[m][j][(i, l)] - jet.d2g[m][l][(i, j)]);
                }
            }
        }
        for k in 0..3 {
            for l in 0..3 {
                dgm.0[k] += first[l] * dginv[(k, l)] + dfirst[l] * ginv[(k, l)];
            }
        }
    }
    (ginv, gamma, dgamma)
}

/// Riemann, Ricci and scalar curvature from a metric jet.
pub fn riemann_from_jet(jet: &MetricJet) -> (Riemann, Matrix3<f64>, Matrix3<f64>, f64, Christoffel) {
    let (ginv, gamma, dgamma) = christoffel_derivative_from_jet(jet);
    // R^m_{abc} = ∂_a Γ^m_{bc} − ∂_b Γ^m_{ac} + Γ^m_{al} Γ^l_{bc} − Γ^m_{bl} Γ^l_{ac}
    let mut up = [0.0; 81];
    for m in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let mut v = dgamma[a].get(m, b, c) - dgamma[b].get(m, a, c);
                    for l in 0..3 {
                        v += gamma.get(m, a, l) * gamma.get(l, b, c) - gamma.get(m, b, l) * gamma.get(l, a, c);
                    }
                    up[((m * 3 + a) * 3 + b) * 3 + c] = v;
                }
            }
        }
    }
    let mut rm = Riemann::zero();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut v = 0.0;
                    for m in 0..3 {
                        v += jet.g[(d, m)] * up[((m * 3 + a) * 3 + b) * 3 + c];
                    }
                    rm.set(a, b, c, d, v);
                }
            }
        }
    }
    let mut ric = Matrix3::zeros();
    for b in 0..3 {
        for c in 0..3 {
            let mut v = 0.0;
            for a in 0..3 {
                for d in 0..3 {
                    v += ginv[(a, d)] * rm.get(a, b, c, d);
                }
            }
            ric[(b, c)] = v;
        }
    }
    let ric = (ric + ric.transpose()) * 0.5;
    let sc = (ginv * ric).trace();
    (rm, ric, ginv, sc, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curvature_tensor_contracts_to_einstein_ricci() {
        let g = Matrix3::identity();
        let rm = Riemann::constant_curvature(1.0, &g);
        let mut ric = Matrix3::zeros();
        for b in 0..3 {
            for c in 0..3 {
                ric[(b, c)] = (0..3).map(|a| rm.get(a, b, c, a)).sum();
            }
        }
        assert!((ric - Matrix3::identity() * 2.0).norm() < 1e-15);
        // sectional curvature of the (0,1) plane
        assert_eq!(rm.get(0, 1, 1, 0), 1.0);
    }
}
