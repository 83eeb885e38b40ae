//! Multivariate polynomials in three variables, used as conformal factors.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// One monomial `coefficient * y1^e1 * y2^e2 * y3^e3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub exponents: [u32; 3],
    pub coefficient: f64,
}

/// Sparse polynomial in `(y1, y2, y3)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        let mut p = Polynomial { terms };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs.
    pub fn from_terms(terms: &[([u32; 3], f64)]) -> Self {
        Self::new(
            terms
                .iter()
                .map(|&(exponents, coefficient)| Monomial {
                    exponents,
                    coefficient,
                })
                .collect(),
        )
    }

    /// Merges repeated monomials and drops zero coefficients. Terms are kept
    /// in lexicographic exponent order so evaluation order is fixed.
    fn normalize(&mut self) {
        self.terms.sort_by_key(|m| m.exponents);
        let mut merged: Vec<Monomial> = Vec::with_capacity(self.terms.len());
        for m in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.exponents == m.exponents => last.coefficient += m.coefficient,
                _ => merged.push(m),
            }
        }
        merged.retain(|m| m.coefficient != 0.0);
        self.terms = merged;
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|m| m.exponents.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, y: &Vector3<f64>) -> f64 {
        self.terms
            .iter()
            .map(|m| {
                m.coefficient
                    * y.x.powi(m.exponents[0] as i32)
                    * y.y.powi(m.exponents[1] as i32)
                    * y.z.powi(m.exponents[2] as i32)
            })
            .sum()
    }

    /// Partial derivative with respect to `y[axis]`.
    pub fn derivative(&self, axis: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|m| m.exponents[axis] > 0)
            .map(|m| {
                let mut e = m.exponents;
                let k = e[axis];
                e[axis] -= 1;
                Monomial {
                    exponents: e,
                    coefficient: m.coefficient * k as f64,
                }
            })
            .collect();
        Polynomial::new(terms)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Polynomial::new(terms)
    }

    pub fn laplacian(&self) -> Polynomial {
        (0..3)
            .map(|a| self.derivative(a).derivative(a))
            .fold(Polynomial::zero(), |acc, p| acc.add(&p))
    }
}

/// A polynomial together with its precomputed partial derivatives up to
/// order three, and the first two derivatives of its flat Laplacian.
#[derive(Debug, Clone)]
pub struct PolynomialJet {
    pub value: Polynomial,
    grad: [Polynomial; 3],
    hess: [[Polynomial; 3]; 3],
    third: [[[Polynomial; 3]; 3]; 3],
    lap: Polynomial,
    lap_grad: [Polynomial; 3],
    lap_hess: [[Polynomial; 3]; 3],
}

/// Values of a [`PolynomialJet`] at one point.
#[derive(Debug, Clone, Copy)]
pub struct JetValues {
    pub value: f64,
    pub grad: Vector3<f64>,
    pub hess: Matrix3<f64>,
    /// `third[a][b][c] = ∂_a ∂_b ∂_c`
    pub third: [[[f64; 3]; 3]; 3],
    pub lap: f64,
    pub lap_grad: Vector3<f64>,
    pub lap_hess: Matrix3<f64>,
}

impl PolynomialJet {
    pub fn new(value: Polynomial) -> Self {
        let grad = [0, 1, 2].map(|a| value.derivative(a));
        let hess = [0, 1, 2].map(|a| [0, 1, 2].map(|b| grad[a].derivative(b)));
        let third = [0, 1, 2].map(|a| [0, 1, 2].map(|b| [0, 1, 2].map(|c| hess[a][b].derivative(c))));
        let lap = value.laplacian();
        let lap_grad = [0, 1, 2].map(|a| lap.derivative(a));
        let lap_hess = [0, 1, 2].map(|a| [0, 1, 2].map(|b| lap_grad[a].derivative(b)));
        PolynomialJet {
            value,
            grad,
            hess,
            third,
            lap,
            lap_grad,
            lap_hess,
        }
    }

    pub fn eval(&self, y: &Vector3<f64>) -> JetValues {
        let mut third = [[[0.0; 3]; 3]; 3];
        for (a, ta) in third.iter_mut().enumerate() {
            for (b, tab) in ta.iter_mut().enumerate() {
                for (c, t) in tab.iter_mut().enumerate() {
                    *t = self.third[a][b][c].eval(y);
                }
            }
        }
        JetValues {
            value: self.value.eval(y),
            grad: Vector3::from_fn(|a, _| self.grad[a].eval(y)),
            hess: Matrix3::from_fn(|a, b| self.hess[a][b].eval(y)),
            third,
            lap: self.lap.eval(y),
            lap_grad: Vector3::from_fn(|a, _| self.lap_grad[a].eval(y)),
            lap_hess: Matrix3::from_fn(|a, b| self.lap_hess[a][b].eval(y)),
        }
    }

    /// Gradient and Hessian only; the hot path for Christoffel symbols.
    pub fn eval_low(&self, y: &Vector3<f64>) -> (f64, Vector3<f64>, Matrix3<f64>) {
        (
            self.value.eval(y),
            Vector3::from_fn(|a, _| self.grad[a].eval(y)),
            Matrix3::from_fn(|a, b| self.hess[a][b].eval(y)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_differentiates() {
        let p = Polynomial::from_terms(&[([2, 0, 0], 1.0), ([2, 0, 0], 2.0), ([0, 1, 1], -1.0), ([0, 0, 0], 0.0)]);
        assert_eq!(p.terms.len(), 2);
        assert_eq!(p.degree(), 2);
        let y = Vector3::new(0.5, -2.0, 3.0);
        assert!((p.eval(&y) - (3.0 * 0.25 + 6.0)).abs() < 1e-15);
        let dx = p.derivative(0);
        assert!((dx.eval(&y) - 3.0).abs() < 1e-15);
        assert!((p.laplacian().eval(&y) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = Polynomial::from_terms(&[
            ([4, 0, 0], 0.3),
            ([1, 2, 1], -0.7),
            ([0, 0, 3], 0.2),
            ([1, 0, 0], -0.1),
        ]);
        let jet = PolynomialJet::new(p.clone());
        let y = Vector3::new(0.3, -0.2, 0.4);
        let v = jet.eval(&y);
        let h = 1e-5;
        for a in 0..3 {
            let e = Vector3::from_fn(|i, _| if i == a { h } else { 0.0 });
            let fd = (p.eval(&(y + e)) - p.eval(&(y - e))) / (2.0 * h);
            assert!((fd - v.grad[a]).abs() < 1e-9);
            let fd_lap = (jet.lap.eval(&(y + e)) - jet.lap.eval(&(y - e))) / (2.0 * h);
            assert!((fd_lap - v.lap_grad[a]).abs() < 1e-8);
        }
        assert!((v.hess.trace() - v.lap).abs() < 1e-13);
    }
}
