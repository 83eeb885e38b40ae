//! Estimate ladder: converged surfaces over a dyadic sequence of areas, the
//! small-area estimates evaluated on each, and log–log rate fits.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{GeodesicSolverParams, MetricChart};
use crate::barycenter::{center_and_recenter, moment_suite, CenterParams};
use crate::error::{Error, Result};
use crate::flow::{geodesic_sphere, minimize, FlowParams, FlowStatus};
use crate::functionals::report_from_fields;
use crate::surface::calculus::{covariant_derivative, l2_norm, lift_2tensor, lift_covector, trace12};
use crate::surface::{coeff_count, geometry, make_grid, norm2_2, simons_residual, surface_gradient, SphericalGrid, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(rename = "L")]
    pub degree: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<SphericalGrid> {
        make_grid(self.n_theta, self.n_phi, self.degree)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_theta: 32,
            n_phi: 64,
            degree: 16,
        }
    }
}

/// Ladder of target areas; `areas` overrides the dyadic rule
/// `a_k = 4π (r0 2^{−k/2})²`, `k < levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSpec {
    pub areas: Option<Vec<f64>>,
    pub r0: f64,
    pub levels: usize,
    /// The last `fine_levels` levels use `fine_grid`.
    pub fine_levels: usize,
    pub fine_grid: GridSpec,
    /// Initial center; `None` uses the critical point of `Sc` when one exists.
    pub center_seed: Option<[f64; 3]>,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec {
            areas: None,
            r0: 0.08,
            levels: 8,
            fine_levels: 2,
            fine_grid: GridSpec {
                n_theta: 48,
                n_phi: 96,
                degree: 24,
            },
            center_seed: None,
        }
    }
}

impl LadderSpec {
    pub fn areas(&self) -> Vec<f64> {
        match &self.areas {
            Some(a) => a.clone(),
            None => (0..self.levels)
                .map(|k| 4.0 * PI * (self.r0 * 2f64.powf(-(k as f64) / 2.0)).powi(2))
                .collect(),
        }
    }

    pub fn validate(&self, chart: &MetricChart) -> Result<()> {
        let a = self.areas();
        if a.is_empty() || a.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("ladder areas must be positive and non-empty".into()));
        }
        if a.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("ladder areas must be strictly decreasing".into()));
        }
        let rmax = (a[0] / (4.0 * PI)).sqrt();
        if rmax > chart.valid_radius() / 8.0 {
            return Err(Error::Config(format!(
                "largest area radius {rmax} exceeds valid_radius/8 = {}",
                chart.valid_radius() / 8.0
            )));
        }
        if self.fine_levels > a.len() {
            return Err(Error::Config("fine_levels exceeds the number of levels".into()));
        }
        Ok(())
    }
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub level: usize,
    pub status: String,
    #[serde(rename = "R")]
    pub area_radius: f64,
    pub area: f64,
    pub n_theta: usize,
    #[serde(rename = "L")]
    pub degree: usize,
    #[serde(rename = "W")]
    pub willmore: f64,
    pub lambda: f64,
    pub scaled_residual: f64,
    pub gb_residual: f64,
    /// `sup |H − 2/R|`
    pub h_dev: f64,
    /// `sup |½H² − 8π/|Σ| − ⅔Ric(ν,ν) + 5/9 Sc(p0)|`
    pub h2_dev: f64,
    /// `‖∇H − ⅔ω‖_{L²}`
    pub grad_h_dev: f64,
    pub acirc_l2: f64,
    pub acirc_linf: f64,
    /// `‖Å + 4/3 H⁻¹ T̊‖_{L²}`
    pub acirc_corr: f64,
    /// `‖ΔS − ½H² S‖_{L²}` with `S = Å + 4/3 H⁻¹ T̊`
    pub s_eq: f64,
    /// `|λ + ⅓ Sc(p0)|`
    pub lambda_dev: f64,
    /// `|∇Sc(p0)|_g`
    pub grad_sc: f64,
    pub sc_p0: f64,
    /// `|∫Ric(ν,ν) dμ − |Σ| Sc(p0)/3| / (4π R³)`
    pub ric_consistency: f64,
    /// `max |dist(p0, ·) − R|`
    pub dist_band: f64,
    pub diam_ratio: f64,
    pub simons: f64,
    /// `|∫ y dμ_g|` in normal coordinates about `p0`
    pub moment_g: f64,
    pub moment_e: f64,
    pub moment1: f64,
    pub moment3: f64,
    /// `moment3 / (R³ + R‖Å‖_{L²})`
    pub moment3_ratio: f64,
    pub center_grad: f64,
    pub hessian_positive: bool,
    pub p0_x: f64,
    pub p0_y: f64,
    pub p0_z: f64,
    pub enclosed: Option<bool>,
    pub margin: Option<f64>,
    /// `(Σ_{l > 2L/3} c_lm²)^{1/2} / |c_00|`
    pub spectral_tail: f64,
}

/// Critical point of `Sc` by Newton from the chart origin, requiring a
/// nonsingular Hessian.
pub fn find_critical_point(chart: &MetricChart) -> Result<Vector3<f64>> {
    let mut z = Vector3::zeros();
    for _ in 0..50 {
        let (_, grad, hess) = chart.scalar_curvature_jet(&z).map_err(|e| Error::NoCriticalPoint(e.to_string()))?;
        let scale = hess.abs().max();
        if !(scale > 1e-12) {
            return Err(Error::NoCriticalPoint("Hess Sc vanishes".into()));
        }
        let svd = hess.svd(true, true);
        if svd.singular_values.min() < 1e-10 * svd.singular_values.max() {
            return Err(Error::NoCriticalPoint("Hess Sc is singular".into()));
        }
        let step = svd.solve(&grad, 0.0).map_err(|e| Error::NoCriticalPoint(e.to_string()))?;
        z -= step;
        if !chart.contains(&z) {
            return Err(Error::NoCriticalPoint("Newton left the chart".into()));
        }
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    let (_, grad, _) = chart.scalar_curvature_jet(&z)?;
    if grad.norm() < 1e-10 {
        return Ok(z);
    }
    Err(Error::NoCriticalPoint(format!("Newton did not converge, |∇Sc| = {:.3e}", grad.norm())))
}

/// Whether `z` lies inside the star-shaped surface, with signed margin
/// `ρ(ω_z) − |z − c|` along the ray from the center.
pub fn contains_point(surface: &Surface, z: &Vector3<f64>) -> (bool, f64) {
    let d = z - surface.center();
    let dist = d.norm();
    let rho = if dist > 0.0 {
        surface.radius_at(&(d / dist))
    } else {
        surface.mean_radius()
    };
    (rho > dist, rho - dist)
}

/// Locates the critical point of `Sc` and tests whether `surface` encloses it.
pub fn enclosed_critical_point(chart: &MetricChart, surface: &Surface, _grid: &SphericalGrid) -> Result<(bool, f64)> {
    let z = find_critical_point(chart)?;
    Ok(contains_point(surface, &z))
}

fn spectral_tail(surface: &Surface) -> f64 {
    let cut = coeff_count(2 * surface.degree / 3);
    let tail: f64 = surface.coeffs.iter().skip(cut).map(|c| c * c).sum();
    tail.sqrt() / surface.coeffs[0].abs()
}

/// All record fields for one surface. Everything is invariant, so the fields
/// are evaluated in the original chart; `p0` enters through `Sc(p0)`,
/// `∇Sc(p0)` and the normal coordinates used for the moments.
#[allow(clippy::too_many_arguments)]
pub fn estimate_record(
    chart: &MetricChart,
    surface: &Surface,
    grid: &SphericalGrid,
    level: usize,
    status: &str,
    center: &CenterParams,
    gp: &GeodesicSolverParams,
    critical: Option<&Vector3<f64>>,
) -> Result<EstimateRecord> {
    let f = geometry(chart, surface, grid)?;
    let rep = report_from_fields(&f, grid)?;
    let r = rep.area_radius;
    let (cr, zs) = center_and_recenter(chart, surface, grid, center, gp)?;
    let p0 = cr.p0();
    let (sc0, dsc0, _) = chart.scalar_curvature_jet(&p0)?;
    let g0inv = chart.metric(&p0)?.try_inverse().expect("metric is SPD");
    let grad_sc = dsc0.dot(&(g0inv * dsc0)).max(0.0).sqrt();

    let n = f.len();
    let h_dev = f.h.iter().map(|h| (h - 2.0 / r).abs()).fold(0.0, f64::max);
    let h2_dev = (0..n)
        .map(|k| (0.5 * f.h[k] * f.h[k] - 8.0 * PI / rep.area - 2.0 / 3.0 * f.ric_nn[k] + 5.0 / 9.0 * sc0).abs())
        .fold(0.0, f64::max);
    let mut gh = surface_gradient(&f, grid, &f.h);
    gh.add_scaled(&lift_covector(&f, &f.omega), -2.0 / 3.0);
    let grad_h_dev = l2_norm(&f, &gh);
    let acirc_l2 = f.integrate(&f.a_circ_norm2).sqrt();
    let acirc_linf = f.a_circ_norm2.iter().map(|v| v.max(0.0).sqrt()).fold(0.0, f64::max);
    let s: Vec<Matrix2<f64>> = (0..n).map(|k| f.a_circ[k] + f.t_circ[k] * (4.0 / 3.0 / f.h[k])).collect();
    let s_norm2: Vec<f64> = (0..n).map(|k| norm2_2(&f.gamma_inv[k], &s[k])).collect();
    let acirc_corr = f.integrate(&s_norm2).max(0.0).sqrt();
    let sl = lift_2tensor(&f, &s);
    let mut eq = trace12(&f, &covariant_derivative(&f, grid, &covariant_derivative(&f, grid, &sl)));
    for (c, sc) in eq.comps.iter_mut().zip(&sl.comps) {
        for k in 0..n {
            c[k] -= 0.5 * f.h[k] * f.h[k] * sc[k];
        }
    }
    let s_eq = l2_norm(&f, &eq);

    let moments = moment_suite(chart, &zs, grid, 1)?;
    let moment3 = moments[1].max_abs;
    let (enclosed, margin) = match critical {
        Some(z) => {
            let (b, m) = contains_point(surface, z);
            (Some(b), Some(m))
        }
        None => (None, None),
    };
    Ok(EstimateRecord {
        level,
        status: status.to_string(),
        area_radius: r,
        area: rep.area,
        n_theta: grid.n_theta(),
        degree: grid.max_degree(),
        willmore: rep.willmore,
        lambda: rep.lambda_opt,
        scaled_residual: rep.scaled_residual(),
        gb_residual: rep.gauss_bonnet_residual,
        h_dev,
        h2_dev,
        grad_h_dev,
        acirc_l2,
        acirc_linf,
        acirc_corr,
        s_eq,
        lambda_dev: (rep.lambda_opt + sc0 / 3.0).abs(),
        grad_sc,
        sc_p0: sc0,
        ric_consistency: (f.integrate(&f.ric_nn) - rep.area * sc0 / 3.0).abs() / (4.0 * PI * r.powi(3)),
        dist_band: cr.dist_band,
        diam_ratio: cr.diameter / r,
        simons: simons_residual(chart, surface, grid)?,
        moment_g: Vector3::from(cr.moment_g).norm(),
        moment_e: Vector3::from(cr.moment_e).norm(),
        moment1: moments[0].max_abs,
        moment3,
        moment3_ratio: moment3 / (r.powi(3) + r * acirc_l2),
        center_grad: cr.grad_norm,
        hessian_positive: cr.hessian_positive,
        p0_x: p0.x,
        p0_y: p0.y,
        p0_z: p0.z,
        enclosed,
        margin,
        spectral_tail: spectral_tail(surface),
    })
}

/// Everything needed to run a ladder.
#[derive(Debug, Clone)]
pub struct LadderParams {
    pub ladder: LadderSpec,
    pub grid: GridSpec,
    pub flow: FlowParams,
    pub center: CenterParams,
    pub geodesic: GeodesicSolverParams,
}

#[derive(Debug, Clone)]
pub struct LevelOutcome {
    pub record: EstimateRecord,
    pub surface: Option<Surface>,
    pub error: Option<String>,
}

fn failed_record(level: usize, r: f64, grid: &GridSpec, msg: &str) -> EstimateRecord {
    let nan = f64::NAN;
    EstimateRecord {
        level,
        status: format!("error: {msg}"),
        area_radius: r,
        area: 4.0 * PI * r * r,
        n_theta: grid.n_theta,
        degree: grid.degree,
        willmore: nan,
        lambda: nan,
        scaled_residual: nan,
        gb_residual: nan,
        h_dev: nan,
        h2_dev: nan,
        grad_h_dev: nan,
        acirc_l2: nan,
        acirc_linf: nan,
        acirc_corr: nan,
        s_eq: nan,
        lambda_dev: nan,
        grad_sc: nan,
        sc_p0: nan,
        ric_consistency: nan,
        dist_band: nan,
        diam_ratio: nan,
        simons: nan,
        moment_g: nan,
        moment_e: nan,
        moment1: nan,
        moment3: nan,
        moment3_ratio: nan,
        center_grad: nan,
        hessian_positive: false,
        p0_x: nan,
        p0_y: nan,
        p0_z: nan,
        enclosed: None,
        margin: None,
        spectral_tail: nan,
    }
}

fn status_label(s: FlowStatus) -> &'static str {
    match s {
        FlowStatus::Converged => "converged",
        FlowStatus::MaxSteps => "max_steps",
        FlowStatus::Degenerate => "degenerate",
    }
}

fn run_level(
    chart: &MetricChart,
    seed: &Vector3<f64>,
    level: usize,
    area: f64,
    grid_spec: &GridSpec,
    params: &LadderParams,
    critical: Option<&Vector3<f64>>,
) -> Result<(EstimateRecord, Surface)> {
    let grid = grid_spec.build()?;
    let r = (area / (4.0 * PI)).sqrt();
    let (init, _) = geodesic_sphere(chart, seed, r, &grid, &params.geodesic)?;
    let flow = FlowParams {
        target_area: Some(area),
        ..params.flow
    };
    let (surface, trace) = minimize(chart, &init, &flow, &grid)?;
    let record = estimate_record(
        chart,
        &surface,
        &grid,
        level,
        status_label(trace.status),
        &params.center,
        &params.geodesic,
        critical,
    )?;
    Ok((record, surface))
}

/// Runs every level; failures are recorded and the ladder continues.
/// Levels run on the current rayon pool; results keep ladder order.
pub fn run_ladder(chart: &MetricChart, center_seed: Option<&Vector3<f64>>, params: &LadderParams) -> Result<Vec<LevelOutcome>> {
    params.ladder.validate(chart)?;
    params.flow.validate()?;
    let areas = params.ladder.areas();
    let critical = find_critical_point(chart).ok();
    let seed = center_seed
        .copied()
        .or(params.ladder.center_seed.map(Vector3::from))
        .or(critical)
        .unwrap_or_else(Vector3::zeros);
    let n = areas.len();
    let fine_from = n - params.ladder.fine_levels;
    let out = areas
        .par_iter()
        .enumerate()
        .map(|(k, &a)| {
            let gs = if k >= fine_from { params.ladder.fine_grid } else { params.grid };
            match run_level(chart, &seed, k, a, &gs, params, critical.as_ref()) {
                Ok((record, surface)) => LevelOutcome {
                    record,
                    surface: Some(surface),
                    error: None,
                },
                Err(e) => LevelOutcome {
                    record: failed_record(k, (a / (4.0 * PI)).sqrt(), &gs, &e.to_string()),
                    surface: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(out)
}

/// Estimates with their predicted exponents.
pub const RATE_TABLE: [(&str, f64); 9] = [
    ("h_dev", 1.0),
    ("acirc_linf", 1.0),
    ("acirc_l2", 2.0),
    ("h2_dev", 1.0),
    ("grad_h_dev", 2.0),
    ("acirc_corr", 3.0),
    ("lambda_dev", 1.0),
    ("grad_sc", 2.0),
    ("dist_band", 3.0),
];

/// Slack allowed below the predicted exponent.
pub const RATE_SLACK: f64 = 0.3;

/// A level is at the numerical floor when `value ≤ FLOOR_REL · R^exponent`.
pub const FLOOR_REL: f64 = 1e-6;

/// Records with a converged flow take part in fits.
pub const MIN_FIT_LEVELS: usize = 3;

impl EstimateRecord {
    pub fn field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "h_dev" => self.h_dev,
            "h2_dev" => self.h2_dev,
            "grad_h_dev" => self.grad_h_dev,
            "acirc_l2" => self.acirc_l2,
            "acirc_linf" => self.acirc_linf,
            "acirc_corr" => self.acirc_corr,
            "s_eq" => self.s_eq,
            "lambda_dev" => self.lambda_dev,
            "grad_sc" => self.grad_sc,
            "dist_band" => self.dist_band,
            "moment3_ratio" => self.moment3_ratio,
            "moment3" => self.moment3,
            "simons" => self.simons,
            "diam_ratio" => self.diam_ratio,
            "ric_consistency" => self.ric_consistency,
            _ => return None,
        })
    }

    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateVerdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    /// Every level is at the numerical floor; the bound holds with a negligible constant.
    #[serde(rename = "N/A")]
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub name: String,
    pub exponent: f64,
    pub slope: Option<f64>,
    /// `C` in `value ≈ C R^slope`.
    pub constant: Option<f64>,
    /// Per-level residuals of the log–log fit.
    pub residuals: Vec<f64>,
    pub levels: Vec<usize>,
    pub verdict: RateVerdict,
}

/// Least-squares `(slope, intercept, residuals)` of `log y` against `log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = lx.iter().zip(&ly).map(|(a, b)| b - (intercept + slope * a)).collect();
    (slope, intercept, res)
}

/// Fits `value ≈ C R^s` to `(level, R, value)` points.
pub fn fit_series(name: &str, exponent: f64, points: &[(usize, f64, f64)]) -> Result<RateFit> {
    let used: Vec<&(usize, f64, f64)> = points.iter().filter(|p| p.2.is_finite()).collect();
    if used.len() < MIN_FIT_LEVELS {
        return Err(Error::InsufficientLevels {
            have: used.len(),
            need: MIN_FIT_LEVELS,
        });
    }
    if used.iter().all(|p| p.2.abs() <= FLOOR_REL * p.1.powf(exponent)) {
        return Ok(RateFit {
            name: name.to_string(),
            exponent,
            slope: None,
            constant: None,
            residuals: Vec::new(),
            levels: used.iter().map(|p| p.0).collect(),
            verdict: RateVerdict::NotApplicable,
        });
    }
    let pos: Vec<&&(usize, f64, f64)> = used.iter().filter(|p| p.2 > 0.0).collect();
    if pos.len() < MIN_FIT_LEVELS {
        return Err(Error::InsufficientLevels {
            have: pos.len(),
            need: MIN_FIT_LEVELS,
        });
    }
    let x: Vec<f64> = pos.iter().map(|p| p.1).collect();
    let y: Vec<f64> = pos.iter().map(|p| p.2).collect();
    let (slope, intercept, residuals) = loglog_fit(&x, &y);
    Ok(RateFit {
        name: name.to_string(),
        exponent,
        slope: Some(slope),
        constant: Some(intercept.exp()),
        residuals,
        levels: pos.iter().map(|p| p.0).collect(),
        verdict: if slope >= exponent - RATE_SLACK {
            RateVerdict::Pass
        } else {
            RateVerdict::Fail
        },
    })
}

/// Fits one named estimate over the converged records.
pub fn fit_one(records: &[EstimateRecord], name: &str, exponent: f64) -> Result<RateFit> {
    let points: Vec<(usize, f64, f64)> = records
        .iter()
        .filter(|r| r.converged())
        .filter_map(|r| r.field(name).map(|v| (r.level, r.area_radius, v)))
        .collect();
    fit_series(name, exponent, &points)
}

/// Fits every [`RATE_TABLE`] column present in a CSV with an `R` column.
/// Rows with a `status` other than `converged` are skipped; `level`
/// defaults to the row index.
pub fn fit_rates_csv(path: &Path) -> Result<Vec<RateFit>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |n: &str| headers.iter().position(|h| h == n);
    let r_col = col("R").ok_or_else(|| Error::Config(format!("{}: no `R` column", path.display())))?;
    let status_col = col("status");
    let level_col = col("level");
    let wanted: Vec<(&str, f64, usize)> = RATE_TABLE
        .iter()
        .filter_map(|(n, e)| col(n).map(|c| (*n, *e, c)))
        .collect();
    if wanted.is_empty() {
        return Err(Error::Config(format!("{}: no estimate columns", path.display())));
    }
    let parse = |s: &str, what: &str| -> Result<f64> {
        if s.is_empty() {
            return Ok(f64::NAN);
        }
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("{}: bad {what} value `{s}`: {e}", path.display())))
    };
    let mut series: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); wanted.len()];
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        if let Some(c) = status_col {
            if &row[c] != "converged" {
                continue;
            }
        }
        let level = match level_col {
            Some(c) => row[c]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("{}: bad level: {e}", path.display())))?,
            None => i,
        };
        let r = parse(&row[r_col], "R")?;
        for (k, (name, _, c)) in wanted.iter().enumerate() {
            series[k].push((level, r, parse(&row[*c], name)?));
        }
    }
    wanted
        .iter()
        .zip(&series)
        .map(|((n, e, _), pts)| fit_series(n, *e, pts))
        .collect()
}

/// Fits every entry of [`RATE_TABLE`].
pub fn fit_rates(records: &[EstimateRecord]) -> Result<Vec<RateFit>> {
    RATE_TABLE.iter().map(|(n, e)| fit_one(records, n, *e)).collect()
}

pub fn write_records_csv(path: &Path, records: &[EstimateRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<EstimateRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// `rates.json` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesReport {
    pub version: String,
    pub config: Option<serde_json::Value>,
    pub fits: Vec<RateFit>,
}

/// Writes `records.csv`, `rates.json`, `error_budget.csv`, `surfaces/*.json`
/// and one `<estimate>.dat` per fitted field into `dir`.
pub fn write_outputs(
    dir: &Path,
    outcomes: &[LevelOutcome],
    fits: &[RateFit],
    config: Option<serde_json::Value>,
) -> Result<()> {
    fs::create_dir_all(dir.join("surfaces"))?;
    let records: Vec<EstimateRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    write_records_csv(&dir.join("records.csv"), &records)?;
    for o in outcomes {
        if let Some(s) = &o.surface {
            s.save(&dir.join("surfaces").join(format!("level_{}.json", o.record.level)))?;
        }
    }
    let rates = RatesReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        fits: fits.to_vec(),
    };
    fs::write(
        dir.join("rates.json"),
        serde_json::to_string_pretty(&rates).expect("rates serialize"),
    )?;
    let mut budget = String::from("level,R,n_theta,L,spectral_tail,scaled_residual,gb_residual,simons\n");
    for r in &records {
        budget.push_str(&format!(
            "{},{:e},{},{},{:e},{:e},{:e},{:e}\n",
            r.level, r.area_radius, r.n_theta, r.degree, r.spectral_tail, r.scaled_residual, r.gb_residual, r.simons
        ));
    }
    fs::write(dir.join("error_budget.csv"), budget)?;
    let mut names: Vec<&str> = RATE_TABLE.iter().map(|(n, _)| *n).collect();
    names.extend(["s_eq", "moment3", "simons"]);
    for name in names {
        let mut dat = format!("# R {name}\n");
        for r in records.iter().filter(|r| r.converged()) {
            dat.push_str(&format!("{:.17e} {:.17e}\n", r.area_radius, r.field(name).expect("known field")));
        }
        fs::write(dir.join(format!("{name}.dat")), dat)?;
    }
    Ok(())
}
