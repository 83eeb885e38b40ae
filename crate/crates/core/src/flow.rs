//! Area-constrained Willmore surfaces by descent and Newton polishing.
//!
//! With `E = ΔH + H|Å|² + H Ric(ν,ν) + λ*H`, moving the surface with normal
//! speed `f = E` decreases `W` at fixed area (`dW = −½∫E² dμ` once `λ*`
//! makes `E ⊥ H`). The descent phase follows that flow with Armijo steps.
//! It is cheap but stalls on the stiff fourth-order spectrum and on the
//! translation mode, which is softer than the shape modes by a factor of
//! about `R⁴`. The polish phase therefore solves the Galerkin equations
//! `∫ E αY_k dμ = 0` by Newton. Shape coefficients with `l ≠ 1` and `λ` are
//! solved at a fixed center, and an outer Newton iteration on the center
//! zeroes the `l = 1` equations.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::ambient::{exp_map, orthonormal_frame, GeodesicSolverParams, MetricChart};
use crate::error::{Error, Result};
use crate::functionals::{lambda_from, willmore_gradient};
use crate::surface::{coeff_count, coeff_index, geometry, GeometryFields, SphericalGrid, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowParams {
    /// Prescribed area; `None` keeps the area of the initial surface.
    pub target_area: Option<f64>,
    /// Descent step in units of `R⁴`.
    pub initial_step: f64,
    /// Descent steps before the Newton polish.
    pub max_steps: usize,
    /// Stop when `‖E‖_{L²(dμ)} · R³ ≤ el_tol`.
    pub el_tol: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub grow: f64,
    pub area_newton_tol: f64,
    /// Zero coefficients above `⌊2L/3⌋` every this many descent steps (0 disables).
    pub filter_every: usize,
    /// Newton iterations of the polish phase (outer center iterations).
    pub newton_iters: usize,
    /// Relative step of the finite-difference Jacobian in shape coefficients.
    pub jacobian_step: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            target_area: None,
            initial_step: 1e-3,
            max_steps: 200,
            el_tol: 1e-10,
            armijo_c: 1e-4,
            shrink: 0.5,
            grow: 1.5,
            area_newton_tol: 1e-13,
            filter_every: 50,
            newton_iters: 20,
            jacobian_step: 1e-6,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.initial_step, self.el_tol, self.armijo_c, self.shrink, self.grow, self.area_newton_tol, self.jacobian_step];
        if pos.iter().any(|v| !(*v > 0.0)) || self.armijo_c >= 1.0 || self.shrink >= 1.0 || self.grow < 1.0 {
            return Err(Error::Config(format!("invalid flow parameters: {self:?}")));
        }
        if let Some(a) = self.target_area {
            if !(a > 0.0) {
                return Err(Error::Config(format!("target_area must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowPhase {
    Init,
    Descent,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    MaxSteps,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub step: usize,
    pub phase: FlowPhase,
    #[serde(rename = "W")]
    pub willmore: f64,
    pub area: f64,
    pub lambda: f64,
    pub scaled_residual: f64,
    pub step_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub records: Vec<FlowRecord>,
    pub status: FlowStatus,
}

impl FlowTrace {
    pub fn last(&self) -> Option<&FlowRecord> {
        self.records.last()
    }

    /// True when `W` never increases along accepted descent steps (relative slack `tol`).
    pub fn descent_is_monotone(&self, tol: f64) -> bool {
        let d: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.phase == FlowPhase::Descent)
            .map(|r| r.willmore)
            .collect();
        d.windows(2).all(|w| w[1] <= w[0] + tol * w[0].abs())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Geodesic sphere of radius `r` about `p0`: nodes `exp_{p0}(r F ω)` with `F`
/// the orthonormal frame at `p0`, refitted as a star-shaped surface about
/// `p0`. Returns the surface and the maximal refit error over the nodes.
pub fn geodesic_sphere(
    chart: &MetricChart,
    p0: &Vector3<f64>,
    r: f64,
    grid: &SphericalGrid,
    params: &GeodesicSolverParams,
) -> Result<(Surface, f64)> {
    if !(r > 0.0 && r < 0.25 * chart.valid_radius()) {
        return Err(Error::Config(format!(
            "geodesic sphere radius {r} must lie in (0, valid_radius/4 = {})",
            0.25 * chart.valid_radius()
        )));
    }
    let frame = orthonormal_frame(&chart.metric(p0)?);
    let points = (0..grid.len())
        .map(|k| exp_map(chart, p0, &(frame * Vector3::from(grid.direction(k)) * r), params))
        .collect::<Result<Vec<_>>>()?;
    let surface = Surface::refit(grid, &points, *p0, grid, grid.max_degree())?;
    let err = points
        .iter()
        .map(|x| (surface.radius_at(&(x - p0)) - (x - p0).norm()).abs())
        .fold(0.0, f64::max);
    Ok((surface, err))
}

struct State {
    surface: Surface,
    fields: GeometryFields,
    g: Vec<f64>,
    lambda: f64,
    willmore: f64,
    area: f64,
}

impl State {
    fn new(chart: &MetricChart, grid: &SphericalGrid, surface: Surface) -> Result<Self> {
        let fields = geometry(chart, &surface, grid)?;
        let g = willmore_gradient(&fields, grid);
        let lambda = lambda_from(&fields, &g)?;
        let hh: Vec<f64> = fields.h.iter().map(|h| h * h).collect();
        let willmore = 0.25 * fields.integrate(&hh);
        let area = fields.area();
        Ok(State {
            surface,
            fields,
            g,
            lambda,
            willmore,
            area,
        })
    }

    fn residual(&self, lambda: f64) -> Vec<f64> {
        self.g.iter().zip(&self.fields.h).map(|(g, h)| g + lambda * h).collect()
    }

    fn scaled_residual(&self) -> f64 {
        let r = (self.area / (4.0 * PI)).sqrt();
        self.fields.l2_norm(&self.residual(self.lambda)) * r.powi(3)
    }

    fn record(&self, step: usize, phase: FlowPhase, step_size: f64) -> FlowRecord {
        FlowRecord {
            step,
            phase,
            willmore: self.willmore,
            area: self.area,
            lambda: self.lambda,
            scaled_residual: self.scaled_residual(),
            step_size,
        }
    }

    /// Galerkin projections `∫ (G + λH) α Y_k dμ`, all `k` up to degree `L`.
    fn projections(&self, grid: &SphericalGrid, lambda: f64) -> Vec<f64> {
        let f = &self.fields;
        let v: Vec<f64> = (0..f.len())
            .map(|k| (self.g[k] + lambda * f.h[k]) * f.alpha[k] * f.dmu[k])
            .collect();
        grid.analyze(&v, self.surface.degree)
    }

    /// `∫ H α Y_k dμ`: derivative of the area along `δρ = Y_k`.
    fn area_gradient(&self, grid: &SphericalGrid) -> Vec<f64> {
        let f = &self.fields;
        let v: Vec<f64> = (0..f.len()).map(|k| f.h[k] * f.alpha[k] * f.dmu[k]).collect();
        grid.analyze(&v, self.surface.degree)
    }
}

/// Rescales the radial function so that the area equals `target`.
fn restore_area(chart: &MetricChart, grid: &SphericalGrid, surface: Surface, target: f64, tol: f64) -> Result<State> {
    let mut st = State::new(chart, grid, surface)?;
    for _ in 0..50 {
        let rel = (st.area - target) / target;
        if rel.abs() <= tol {
            return Ok(st);
        }
        let f = &st.fields;
        let d: f64 = (0..f.len()).map(|k| f.quad[k] * f.h[k] * f.alpha[k] * f.radius[k]).sum();
        let eps = (target - st.area) / d;
        st = State::new(chart, grid, st.surface.scaled(1.0 + eps))?;
    }
    let rel = (st.area - target) / target;
    if rel.abs() <= tol.max(1e-14) * 10.0 {
        return Ok(st);
    }
    Err(Error::NoConvergence {
        solver: "area restoration",
        iterations: 50,
        residual: rel.abs(),
    })
}

fn filter(surface: &mut Surface) {
    let cut = 2 * surface.degree / 3;
    for c in surface.coeffs.iter_mut().skip(coeff_count(cut)) {
        *c = 0.0;
    }
}

/// Least-squares solve through the SVD with relative cutoff.
fn svd_solve(a: DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let n = a.ncols();
    let scale: Vec<f64> = (0..n).map(|j| a.column(j).norm().max(1e-300)).collect();
    let mut a = a;
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(b, rcond * smax)
        .unwrap_or_else(|_| DVector::zeros(n));
    DVector::from_iterator(n, x.iter().zip(&scale).map(|(v, s)| v / s))
}

struct Solver<'a> {
    chart: &'a MetricChart,
    grid: &'a SphericalGrid,
    params: FlowParams,
    target: f64,
    shape: Vec<usize>,
    dipole: [usize; 3],
    jacobian: Option<DMatrix<f64>>,
    evaluations: usize,
}

impl<'a> Solver<'a> {
    fn radius(&self) -> f64 {
        (self.target / (4.0 * PI)).sqrt()
    }

    fn state(&mut self, surface: Surface) -> Result<State> {
        self.evaluations += 1;
        State::new(self.chart, self.grid, surface)
    }

    /// Residual of the inner system: shape projections and the area defect.
    fn inner_residual(&self, st: &State, lambda: f64) -> DVector<f64> {
        let p = st.projections(self.grid, lambda);
        let mut v: Vec<f64> = self.shape.iter().map(|&k| p[k]).collect();
        v.push(st.area - self.target);
        DVector::from_vec(v)
    }

    fn inner_norm(&self, r: &DVector<f64>) -> f64 {
        let n = r.len() - 1;
        let rr = self.radius();
        let shape = r.rows(0, n).norm() * rr * rr;
        let area = r[n].abs() / self.target;
        shape.max(area)
    }

    fn build_jacobian(&mut self, st: &State, lambda: f64) -> Result<DMatrix<f64>> {
        let n = self.shape.len();
        let mut j = DMatrix::zeros(n + 1, n + 1);
        let base = st.projections(self.grid, lambda);
        let b = st.area_gradient(self.grid);
        let h = self.params.jacobian_step * self.radius();
        let shape = self.shape.clone();
        for (col, &k) in shape.iter().enumerate() {
            let mut s = st.surface.clone();
            s.coeffs[k] += h;
            let pert = self.state(s)?;
            let p = pert.projections(self.grid, lambda);
            for (row, &kk) in shape.iter().enumerate() {
                j[(row, col)] = (p[kk] - base[kk]) / h;
            }
            j[(n, col)] = b[k];
        }
        for (row, &kk) in self.shape.iter().enumerate() {
            j[(row, n)] = b[kk];
        }
        Ok(j)
    }

    /// Newton on shape coefficients with `l ≠ 1` and `λ` at a fixed center.
    fn solve_inner(&mut self, mut st: State, mut lambda: f64, tol: f64) -> Result<(State, f64)> {
        let mut r = self.inner_residual(&st, lambda);
        let mut norm = self.inner_norm(&r);
        let mut fresh = false;
        for _ in 0..40 {
            if norm <= tol {
                break;
            }
            if self.jacobian.is_none() {
                self.jacobian = Some(self.build_jacobian(&st, lambda)?);
                fresh = true;
            }
            let j = self.jacobian.clone().expect("jacobian present");
            let dx = svd_solve(j, &(-&r), 1e-14);
            let n = self.shape.len();
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..8 {
                let mut s = st.surface.clone();
                for (i, &k) in self.shape.iter().enumerate() {
                    s.coeffs[k] += t * dx[i];
                }
                let lam = lambda + t * dx[n];
                if let Ok(trial) = self.state(s) {
                    let rt = self.inner_residual(&trial, lam);
                    let nt = self.inner_norm(&rt);
                    if nt < norm {
                        accepted = Some((trial, lam, rt, nt));
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, lam, rt, nt)) => {
                    let ratio = nt / norm;
                    st = trial;
                    lambda = lam;
                    r = rt;
                    norm = nt;
                    if ratio > 0.25 && !fresh {
                        self.jacobian = None;
                    }
                    fresh = false;
                }
                None => {
                    if fresh || norm <= 1e2 * tol {
                        break;
                    }
                    self.jacobian = None;
                }
            }
        }
        let st = restore_area(self.chart, self.grid, st.surface, self.target, self.params.area_newton_tol)?;
        self.evaluations += 1;
        Ok((st, lambda))
    }

    fn dipole_residual(&self, st: &State, lambda: f64) -> Vector3<f64> {
        let p = st.projections(self.grid, lambda);
        Vector3::new(p[self.dipole[0]], p[self.dipole[1]], p[self.dipole[2]])
    }
}

/// Drives `init` to an area-constrained Willmore surface.
pub fn minimize(
    chart: &MetricChart,
    init: &Surface,
    params: &FlowParams,
    grid: &SphericalGrid,
) -> Result<(Surface, FlowTrace)> {
    params.validate()?;
    if init.degree != grid.max_degree() {
        return Err(Error::Config(format!(
            "surface degree {} does not match grid degree {}",
            init.degree,
            grid.max_degree()
        )));
    }
    init.validate(grid, chart)?;
    let start = State::new(chart, grid, init.clone())?;
    let target = params.target_area.unwrap_or(start.area);
    let mut trace = FlowTrace {
        records: Vec::new(),
        status: FlowStatus::MaxSteps,
    };
    let mut st = restore_area(chart, grid, init.clone(), target, params.area_newton_tol)?;
    trace.records.push(st.record(0, FlowPhase::Init, 0.0));
    let radius = (target / (4.0 * PI)).sqrt();
    if st.scaled_residual() <= params.el_tol {
        trace.status = FlowStatus::Converged;
        return Ok((st.surface, trace));
    }

    // Descent phase.
    let mut tau = params.initial_step * radius.powi(4);
    let mut step = 0;
    let mut stalled = 0;
    while step < params.max_steps {
        let e = st.residual(st.lambda);
        let f = &st.fields;
        let speed: Vec<f64> = (0..f.len()).map(|k| e[k] / f.alpha[k]).collect();
        let dir = grid.analyze(&speed, st.surface.degree);
        let decrease = 0.5 * f.integrate(&e.iter().map(|v| v * v).collect::<Vec<_>>());
        let mut accepted = None;
        for _ in 0..30 {
            let mut s = st.surface.clone();
            for (c, d) in s.coeffs.iter_mut().zip(&dir) {
                *c += tau * d;
            }
            match restore_area(chart, grid, s, target, params.area_newton_tol) {
                Ok(trial) if trial.willmore <= st.willmore - params.armijo_c * tau * decrease => {
                    accepted = Some(trial);
                    break;
                }
                _ => tau *= params.shrink,
            }
        }
        step += 1;
        let Some(mut next) = accepted else {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
            continue;
        };
        if params.filter_every > 0 && step % params.filter_every == 0 {
            filter(&mut next.surface);
            next = restore_area(chart, grid, next.surface, target, params.area_newton_tol)?;
        }
        let gain = (st.willmore - next.willmore) / st.willmore;
        st = next;
        trace.records.push(st.record(step, FlowPhase::Descent, tau));
        tau *= params.grow;
        if st.scaled_residual() <= params.el_tol {
            trace.status = FlowStatus::Converged;
            return Ok((st.surface, trace));
        }
        if gain < 1e-15 {
            break;
        }
    }

    // Newton polish.
    let l = st.surface.degree;
    let mut solver = Solver {
        chart,
        grid,
        params: *params,
        target,
        shape: (0..coeff_count(l)).filter(|&k| k == 0 || k >= coeff_count(1)).collect(),
        dipole: [coeff_index(1, 1), coeff_index(1, -1), coeff_index(1, 0)],
        jacobian: None,
        evaluations: 0,
    };
    let inner_tol = 1e-3 * params.el_tol;
    let hc = 3e-3 * radius;
    let mut lambda = st.lambda;
    let mut best = (st.scaled_residual(), st.surface.clone());
    let mut jc: Option<Matrix3<f64>> = None;
    let mut last_move: Option<(Vector3<f64>, Vector3<f64>)> = None;
    for outer in 0..params.newton_iters {
        let (next, lam) = match solver.solve_inner(st, lambda, inner_tol) {
            Ok(v) => v,
            Err(Error::Degenerate { .. }) | Err(Error::OutsideChart { .. }) => {
                trace.status = FlowStatus::Degenerate;
                return Ok((best.1, trace));
            }
            Err(e) => return Err(e),
        };
        st = next;
        lambda = lam;
        let sr = st.scaled_residual();
        trace.records.push(st.record(step + outer + 1, FlowPhase::Newton, 1.0));
        if sr < best.0 {
            best = (sr, st.surface.clone());
        }
        if sr <= params.el_tol {
            trace.status = FlowStatus::Converged;
            return Ok((st.surface, trace));
        }
        // Center update from the dipole equations; FD Jacobian, then Broyden.
        let f0 = solver.dipole_residual(&st, lambda);
        if let Some((fp, dp)) = last_move {
            let jm: Matrix3<f64> = jc.expect("broyden needs a jacobian");
            if f0.norm() < 0.5 * fp.norm() {
                jc = Some(jm + (f0 - fp - jm * dp) * dp.transpose() / dp.norm_squared());
            } else {
                jc = None;
            }
        }
        if jc.is_none() {
            let mut m = Matrix3::zeros();
            for axis in 0..3 {
                let mut e = Vector3::zeros();
                e[axis] = hc;
                let moved = solver.state(st.surface.translated(&e))?;
                let (moved, lam_m) = solver.solve_inner(moved, lambda, inner_tol)?;
                m.set_column(axis, &((solver.dipole_residual(&moved, lam_m) - f0) / hc));
            }
            jc = Some(m);
        }
        let svd = jc.expect("jacobian present").svd(true, true);
        let smax = svd.singular_values.max();
        let dc = if smax > 0.0 {
            svd.solve(&(-f0), 1e-8 * smax).unwrap_or_else(|_| Vector3::zeros())
        } else {
            Vector3::zeros()
        };
        let dc = if dc.norm() > radius { dc * (radius / dc.norm()) } else { dc };
        if !dc.iter().all(|v| v.is_finite()) || dc.norm() == 0.0 {
            jc = None;
            last_move = None;
            continue;
        }
        last_move = Some((f0, dc));
        match solver.state(st.surface.translated(&dc)) {
            Ok(moved) => st = moved,
            Err(_) => {
                trace.status = FlowStatus::Degenerate;
                return Ok((best.1, trace));
            }
        }
    }
    let fin = State::new(chart, grid, best.1.clone())?;
    trace.records.push(fin.record(step + params.newton_iters + 1, FlowPhase::Newton, 0.0));
    trace.status = if fin.scaled_residual() <= params.el_tol {
        FlowStatus::Converged
    } else {
        FlowStatus::MaxSteps
    };
    Ok((best.1, trace))
}
