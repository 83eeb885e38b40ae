//! TOML run configuration shared by every subcommand.
//!
//! ```toml
//! output_dir = "out"
//! seed = 7
//!
//! [metric]
//! kind = "conformal"
//! valid_radius = 1.0
//! phi = [{ exponents = [2, 0, 0], coefficient = 0.15 }]
//!
//! [grid]
//! n_theta = 32
//! n_phi = 64
//! L = 16
//!
//! [flow]
//! max_steps = 200
//!
//! [ladder]
//! r0 = 0.08
//! levels = 8
//!
//! [init]
//! radius = 0.05
//! ```
//!
//! Every block is optional; missing keys take the defaults of the owning
//! type and unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::{GeodesicSolverParams, MetricChart, MetricSpec};
use crate::barycenter::CenterParams;
use crate::error::{Error, Result};
use crate::flow::{geodesic_sphere, FlowParams};
use crate::suite::{find_critical_point, GridSpec, LadderParams, LadderSpec};
use crate::surface::{coeff_index, SphericalGrid, Surface};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// `None` uses a step of `valid_radius / 2000`.
    pub geodesic: Option<GeodesicSolverParams>,
    pub center: CenterParams,
}

/// Initial surface for `minimize`: a geodesic sphere, optionally perturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSpec {
    /// `None` uses the critical point of `Sc`, or the origin when there is none.
    pub center: Option<[f64; 3]>,
    pub radius: f64,
    /// Added `Y_20` coefficient, in units of `radius`.
    pub y20: f64,
    /// Amplitude, in units of `radius`, of seeded random coefficients for `2 ≤ l ≤ 4`.
    pub random_amplitude: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            center: None,
            radius: 0.05,
            y20: 0.0,
            random_amplitude: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub metric: MetricSpec,
    pub grid: GridSpec,
    pub flow: FlowParams,
    pub ladder: LadderSpec,
    pub solver: SolverConfig,
    pub init: InitSpec,
    pub output_dir: PathBuf,
    /// Seed for the random perturbation of the initial surface.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: MetricSpec::morse_default(),
            grid: GridSpec::default(),
            flow: FlowParams::default(),
            ladder: LadderSpec::default(),
            solver: SolverConfig::default(),
            init: InitSpec::default(),
            output_dir: PathBuf::from("out"),
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.grid.build()?;
        self.ladder.fine_grid.build()?;
        if let Some(g) = &self.solver.geodesic {
            g.validate()?;
        }
        let c = &self.solver.center;
        if !(c.tol > 0.0 && c.hessian_step > 0.0 && c.max_iters > 0) {
            return Err(Error::Config(format!("invalid center parameters: {c:?}")));
        }
        if !(self.init.radius > 0.0) {
            return Err(Error::Config("init.radius must be positive".into()));
        }
        if self.init.random_amplitude != 0.0 && self.seed.is_none() {
            return Err(Error::Config("init.random_amplitude requires a seed".into()));
        }
        Ok(())
    }

    pub fn chart(&self) -> Result<MetricChart> {
        self.metric.build()
    }

    pub fn grid(&self) -> Result<SphericalGrid> {
        self.grid.build()
    }

    pub fn geodesic(&self, chart: &MetricChart) -> GeodesicSolverParams {
        self.solver.geodesic.unwrap_or_else(|| GeodesicSolverParams::for_chart(chart))
    }

    pub fn ladder_params(&self, chart: &MetricChart) -> LadderParams {
        LadderParams {
            ladder: self.ladder.clone(),
            grid: self.grid,
            flow: self.flow,
            center: self.solver.center,
            geodesic: self.geodesic(chart),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Config as a JSON value, for report headers.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes to JSON")
    }

    /// The initial surface described by `[init]`.
    pub fn initial_surface(&self, chart: &MetricChart, grid: &SphericalGrid) -> Result<Surface> {
        let center = match self.init.center {
            Some(c) => Vector3::from(c),
            None => find_critical_point(chart).unwrap_or_else(|_| Vector3::zeros()),
        };
        let r = self.init.radius;
        let (mut s, _) = geodesic_sphere(chart, &center, r, grid, &self.geodesic(chart))?;
        s.coeffs[coeff_index(2, 0)] += self.init.y20 * r;
        if self.init.random_amplitude != 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed.expect("validated"));
            for l in 2..=4.min(s.degree) {
                for m in -(l as i64)..=(l as i64) {
                    s.coeffs[coeff_index(l, m)] += self.init.random_amplitude * r * rng.gen_range(-1.0..1.0);
                }
            }
        }
        Ok(s)
    }
}
