//! Intrinsic calculus on the surface via ambient lifts.
//!
//! A tangential covariant tensor `S_{i…}` is stored through its lift
//! `Ŝ = S_{ij…} E^i ⊗ E^j ⊗ …` with `E^i = g γ^{ij} e_j`. Lift components are
//! smooth functions on S² even where the coordinate frame degenerates, so they
//! can be differentiated pseudospectrally. The surface covariant derivative is
//! the ambient covariant derivative along `e_i`, projected tangentially in every
//! slot, with the new derivative slot placed first.

use nalgebra::{Matrix2, Matrix3, Vector3};

use super::geometry::GeometryFields;
use super::grid::SphericalGrid;

/// Lift of a tangential covariant tensor; `comps[c][k]` with multi-index
/// `c = μ_1·3^{r−1} + … + μ_r`.
#[derive(Debug, Clone)]
pub struct LiftedTensor {
    pub rank: usize,
    pub comps: Vec<Vec<f64>>,
}

#[inline]
fn pow3(r: usize) -> usize {
    3usize.pow(r as u32)
}

impl LiftedTensor {
    pub fn zeros(rank: usize, n: usize) -> Self {
        LiftedTensor {
            rank,
            comps: vec![vec![0.0; n]; pow3(rank)],
        }
    }

    pub fn scalar(f: &[f64]) -> Self {
        LiftedTensor {
            rank: 0,
            comps: vec![f.to_vec()],
        }
    }

    pub fn nodes(&self) -> usize {
        self.comps[0].len()
    }

    fn node(&self, k: usize) -> Vec<f64> {
        self.comps.iter().map(|c| c[k]).collect()
    }

    fn set_node(&mut self, k: usize, v: &[f64]) {
        for (c, x) in self.comps.iter_mut().zip(v) {
            c[k] = *x;
        }
    }

    pub fn matrix_at(&self, k: usize) -> Matrix3<f64> {
        assert_eq!(self.rank, 2);
        Matrix3::from_fn(|a, b| self.comps[3 * a + b][k])
    }

    pub fn vector_at(&self, k: usize) -> Vector3<f64> {
        assert_eq!(self.rank, 1);
        Vector3::new(self.comps[0][k], self.comps[1][k], self.comps[2][k])
    }

    pub fn from_matrices(m: &[Matrix3<f64>]) -> Self {
        let mut t = LiftedTensor::zeros(2, m.len());
        for (k, mk) in m.iter().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    t.comps[3 * a + b][k] = mk[(a, b)];
                }
            }
        }
        t
    }

    pub fn from_vectors(v: &[Vector3<f64>]) -> Self {
        let mut t = LiftedTensor::zeros(1, v.len());
        for (k, vk) in v.iter().enumerate() {
            for a in 0..3 {
                t.comps[a][k] = vk[a];
            }
        }
        t
    }

    pub fn add_scaled(&mut self, other: &LiftedTensor, s: f64) {
        assert_eq!(self.rank, other.rank);
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }
}

/// `out_{…μ…} = Σ_λ t_{…λ…} m[(λ, μ)]` in slot `slot`.
fn apply_slot(t: &[f64], rank: usize, slot: usize, m: &Matrix3<f64>) -> Vec<f64> {
    let stride = pow3(rank - 1 - slot);
    let mut out = vec![0.0; t.len()];
    for (c, o) in out.iter_mut().enumerate() {
        let mu = (c / stride) % 3;
        let base = c - mu * stride;
        *o = (0..3).map(|l| t[base + l * stride] * m[(l, mu)]).sum();
    }
    out
}

fn projector(fields: &GeometryFields, k: usize) -> Matrix3<f64> {
    // P^λ_μ = δ − ν^λ ν_μ
    Matrix3::identity() - fields.nu[k] * fields.nu_flat[k].transpose()
}

/// Lift of a covector given by surface components `(β_θ, β_φ)`.
pub fn lift_covector(fields: &GeometryFields, beta: &[nalgebra::Vector2<f64>]) -> LiftedTensor {
    let v: Vec<Vector3<f64>> = beta
        .iter()
        .zip(&fields.dual)
        .map(|(b, d)| d[0] * b[0] + d[1] * b[1])
        .collect();
    LiftedTensor::from_vectors(&v)
}

/// Lift of a covariant 2-tensor given by surface components.
pub fn lift_2tensor(fields: &GeometryFields, s: &[Matrix2<f64>]) -> LiftedTensor {
    let m: Vec<Matrix3<f64>> = s
        .iter()
        .zip(&fields.dual)
        .map(|(s, d)| {
            let mut out = Matrix3::zeros();
            for i in 0..2 {
                for j in 0..2 {
                    out += d[i] * d[j].transpose() * s[(i, j)];
                }
            }
            out
        })
        .collect();
    LiftedTensor::from_matrices(&m)
}

/// Surface components `S_ij = Ŝ(e_i, e_j)` of a lifted 2-tensor.
pub fn restrict_2tensor(fields: &GeometryFields, t: &LiftedTensor) -> Vec<Matrix2<f64>> {
    (0..fields.len())
        .map(|k| {
            let m = t.matrix_at(k);
            let e = [fields.e_theta[k], fields.e_phi[k]];
            Matrix2::from_fn(|i, j| e[i].dot(&(m * e[j])))
        })
        .collect()
}

/// Surface components `β_i = β̂(e_i)` of a lifted covector.
pub fn restrict_covector(fields: &GeometryFields, t: &LiftedTensor) -> Vec<nalgebra::Vector2<f64>> {
    (0..fields.len())
        .map(|k| {
            let v = t.vector_at(k);
            nalgebra::Vector2::new(fields.e_theta[k].dot(&v), fields.e_phi[k].dot(&v))
        })
        .collect()
}

/// Surface covariant derivative `∇T`, derivative slot first.
pub fn covariant_derivative(fields: &GeometryFields, grid: &SphericalGrid, t: &LiftedTensor) -> LiftedTensor {
    let n = fields.len();
    let r = t.rank;
    let mut dt = Vec::with_capacity(t.comps.len());
    let mut dp = Vec::with_capacity(t.comps.len());
    for c in &t.comps {
        let coeffs = grid.analyze_full(c);
        let (_, a, b) = grid.synthesize_first(&coeffs);
        dt.push(a);
        dp.push(b);
    }
    let mut out = LiftedTensor::zeros(r + 1, n);
    let width = pow3(r);
    for k in 0..n {
        let tk = t.node(k);
        let proj = projector(fields, k);
        let frame = [fields.e_theta[k], fields.e_phi[k]];
        let mut res = vec![0.0; width * 3];
        for i in 0..2 {
            let mut d: Vec<f64> = if i == 0 {
                dt.iter().map(|c| c[k]).collect()
            } else {
                dp.iter().map(|c| c[k]).collect()
            };
            if r > 0 {
                // M^λ_μ = Γ^λ_{κμ} e_i^κ
                let gam = &fields.christoffel[k];
                let m = Matrix3::from_fn(|l, mu| (0..3).map(|kap| gam.get(l, kap, mu) * frame[i][kap]).sum());
                for s in 0..r {
                    let corr = apply_slot(&tk, r, s, &m);
                    for (x, y) in d.iter_mut().zip(&corr) {
                        *x -= y;
                    }
                }
                for s in 0..r {
                    d = apply_slot(&d, r, s, &proj);
                }
            }
            let e = fields.dual[k][i];
            for nu in 0..3 {
                for c in 0..width {
                    res[nu * width + c] += e[nu] * d[c];
                }
            }
        }
        out.set_node(k, &res);
    }
    out
}

/// Contraction of the first two slots with `g⁻¹`.
pub fn trace12(fields: &GeometryFields, t: &LiftedTensor) -> LiftedTensor {
    assert!(t.rank >= 2);
    let width = pow3(t.rank - 2);
    let n = fields.len();
    let mut out = LiftedTensor::zeros(t.rank - 2, n);
    for k in 0..n {
        let gi = &fields.metric_inv[k];
        for c in 0..width {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += gi[(a, b)] * t.comps[(3 * a + b) * width + c][k];
                }
            }
            out.comps[c][k] = s;
        }
    }
    out
}

/// Pointwise squared norm, every slot contracted with `g⁻¹`.
pub fn pointwise_norm2(fields: &GeometryFields, t: &LiftedTensor) -> Vec<f64> {
    (0..fields.len())
        .map(|k| {
            let tk = t.node(k);
            let mut raised = tk.clone();
            for s in 0..t.rank {
                raised = apply_slot(&raised, t.rank, s, &fields.metric_inv[k]);
            }
            tk.iter().zip(&raised).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// `(∫ |T|² dμ)^{1/2}`
pub fn l2_norm(fields: &GeometryFields, t: &LiftedTensor) -> f64 {
    fields.integrate(&pointwise_norm2(fields, t)).max(0.0).sqrt()
}

/// Lifted surface gradient `∇f`.
pub fn surface_gradient(fields: &GeometryFields, grid: &SphericalGrid, f: &[f64]) -> LiftedTensor {
    covariant_derivative(fields, grid, &LiftedTensor::scalar(f))
}

/// `div T = γ^{ij} ∇_i T_{j…}`
pub fn covariant_divergence(fields: &GeometryFields, grid: &SphericalGrid, t: &LiftedTensor) -> LiftedTensor {
    trace12(fields, &covariant_derivative(fields, grid, t))
}

/// Laplace–Beltrami operator of a scalar field.
pub fn laplace_beltrami(fields: &GeometryFields, grid: &SphericalGrid, f: &[f64]) -> Vec<f64> {
    let g = surface_gradient(fields, grid, f);
    covariant_divergence(fields, grid, &g).comps.remove(0)
}

/// Lift of the induced metric, `g − ν♭ ⊗ ν♭`.
pub fn induced_metric_lift(fields: &GeometryFields) -> LiftedTensor {
    let m: Vec<Matrix3<f64>> = (0..fields.len())
        .map(|k| fields.metric[k] - fields.nu_flat[k] * fields.nu_flat[k].transpose())
        .collect();
    LiftedTensor::from_matrices(&m)
}

/// `⟨∇f, ∇h⟩_γ` per node.
pub fn gradient_inner(fields: &GeometryFields, a: &LiftedTensor, b: &LiftedTensor) -> Vec<f64> {
    (0..fields.len())
        .map(|k| a.vector_at(k).dot(&(fields.metric_inv[k] * b.vector_at(k))))
        .collect()
}
