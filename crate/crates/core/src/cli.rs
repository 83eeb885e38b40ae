//! Command line driver: `geometry`, `minimize`, `center`, `suite`, `rates`.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration or I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::barycenter::{center_and_recenter, moment_suite};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flow::{minimize, FlowStatus};
use crate::functionals::report_from_fields;
use crate::suite::{fit_rates, fit_rates_csv, run_ladder, write_outputs, RateFit, RateVerdict};
use crate::surface::{geometry, Surface};

#[derive(Debug, Parser)]
#[command(name = "willmore", version, about = "Area-constrained Willmore surfaces in analytic Riemannian 3-manifolds")]
pub struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for ladder levels (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override the config file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n_theta: Option<usize>,
    #[arg(long, global = true)]
    pub n_phi: Option<usize>,
    /// Spectral degree `L`.
    #[arg(long = "degree", global = true)]
    pub degree: Option<usize>,
    #[arg(long, global = true)]
    pub el_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of ladder levels.
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Initial geodesic radius for `minimize`.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the functionals of a surface file.
    Geometry {
        surface: PathBuf,
        /// Print JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Flow the configured initial surface to an area-constrained Willmore surface.
    Minimize,
    /// Geometric center of a surface file.
    Center { surface: PathBuf },
    /// Run the estimate ladder and write all artifacts.
    Suite,
    /// Fit rates to a records CSV.
    Rates {
        records: PathBuf,
        /// Output path (default: rates.json next to the records).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.n_theta {
            cfg.grid.n_theta = v;
        }
        if let Some(v) = self.n_phi {
            cfg.grid.n_phi = v;
        }
        if let Some(v) = self.degree {
            cfg.grid.degree = v;
        }
        if let Some(v) = self.el_tol {
            cfg.flow.el_tol = v;
        }
        if let Some(v) = self.max_steps {
            cfg.flow.max_steps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = self.levels {
            cfg.ladder.levels = v;
            cfg.ladder.fine_levels = cfg.ladder.fine_levels.min(v);
        }
        if let Some(v) = self.radius {
            cfg.init.radius = v;
        }
    }
}

fn header(cfg: &RunConfig) -> String {
    format!(
        "# willmore {}\n# config {}\n",
        env!("CARGO_PKG_VERSION"),
        serde_json::to_string(&cfg.to_json_value()).expect("config serializes")
    )
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn cmd_geometry(cfg: &RunConfig, path: &Path, as_json: bool, out: &mut dyn Write) -> Result<()> {
    let surface = Surface::load(path)?;
    let chart = cfg.chart()?;
    let grid = crate::surface::make_grid(
        cfg.grid.n_theta.max(surface.degree + 1),
        cfg.grid.n_phi.max(2 * surface.degree + 2),
        surface.degree,
    )?;
    surface.validate(&grid, &chart)?;
    let f = geometry(&chart, &surface, &grid)?;
    let rep = report_from_fields(&f, &grid)?;
    let h_min = f.h.iter().cloned().fold(f64::INFINITY, f64::min);
    let h_max = f.h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let acirc_max = f.a_circ_norm2.iter().map(|v| v.max(0.0).sqrt()).fold(0.0, f64::max);
    let rho_min = f.radius.iter().cloned().fold(f64::INFINITY, f64::min);
    let rho_max = f.radius.iter().cloned().fold(0.0, f64::max);
    if as_json {
        let v = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg.to_json_value(),
            "report": rep,
            "fields": {
                "nodes": f.len(), "H_min": h_min, "H_max": h_max,
                "acirc_linf": acirc_max, "rho_min": rho_min, "rho_max": rho_max,
            },
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    } else {
        write!(out, "{}", header(cfg))?;
        writeln!(
            out,
            "# fields nodes={} H=[{h_min:.12e}, {h_max:.12e}] |Å|_inf={acirc_max:.3e} rho=[{rho_min:.12e}, {rho_max:.12e}]",
            f.len()
        )?;
        write!(out, "{}", rep.to_csv()?)?;
    }
    Ok(())
}

fn cmd_minimize(cfg: &RunConfig, out: &mut dyn Write) -> Result<FlowStatus> {
    let chart = cfg.chart()?;
    let grid = cfg.grid()?;
    let init = cfg.initial_surface(&chart, &grid)?;
    let (surface, trace) = minimize(&chart, &init, &cfg.flow, &grid)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    surface.save(&dir.join("surface.json"))?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    fs::write(dir.join("trace.csv"), buf)?;
    write_file(&dir.join("config.toml"), &cfg.to_toml())?;
    let f = geometry(&chart, &surface, &grid)?;
    let rep = report_from_fields(&f, &grid)?;
    write!(out, "{}", header(cfg))?;
    writeln!(out, "# status {:?}, {} trace records", trace.status, trace.records.len())?;
    write!(out, "{}", rep.to_csv()?)?;
    Ok(trace.status)
}

fn cmd_center(cfg: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<()> {
    let surface = Surface::load(path)?;
    let chart = cfg.chart()?;
    let grid = crate::surface::make_grid(
        cfg.grid.n_theta.max(surface.degree + 1),
        cfg.grid.n_phi.max(2 * surface.degree + 2),
        surface.degree,
    )?;
    surface.validate(&grid, &chart)?;
    let gp = cfg.geodesic(&chart);
    let (rep, zs) = center_and_recenter(&chart, &surface, &grid, &cfg.solver.center, &gp)?;
    let moments = moment_suite(&chart, &zs, &grid, 1)?;
    let v = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_json_value(),
        "center": rep,
        "odd_moments": moments,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    zs.save(&dir.join("recentered_surface.json"))?;
    Ok(())
}

fn print_fits(fits: &[RateFit], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{:<12} {:>8} {:>10} {:>6}", "estimate", "exponent", "slope", "verdict")?;
    for f in fits {
        let slope = f.slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
        let verdict = match f.verdict {
            RateVerdict::Pass => "PASS",
            RateVerdict::Fail => "FAIL",
            RateVerdict::NotApplicable => "N/A",
        };
        writeln!(out, "{:<12} {:>8.1} {:>10} {:>6}", f.name, f.exponent, slope, verdict)?;
    }
    Ok(())
}

fn cmd_suite(cfg: &RunConfig, jobs: Option<usize>, out: &mut dyn Write) -> Result<bool> {
    let chart = cfg.chart()?;
    let params = cfg.ladder_params(&chart);
    let threads = jobs
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} workers: {e}")))?;
    let outcomes = pool.install(|| run_ladder(&chart, None, &params))?;
    let records: Vec<_> = outcomes.iter().map(|o| o.record.clone()).collect();
    let fits = match fit_rates(&records) {
        Ok(f) => f,
        Err(Error::InsufficientLevels { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    write_outputs(&cfg.output_dir, &outcomes, &fits, Some(cfg.to_json_value()))?;
    write_file(&cfg.output_dir.join("config.toml"), &cfg.to_toml())?;
    write!(out, "{}", header(cfg))?;
    for o in &outcomes {
        writeln!(
            out,
            "# level {} R={:.6e} {}",
            o.record.level, o.record.area_radius, o.record.status
        )?;
    }
    print_fits(&fits, out)?;
    Ok(outcomes.iter().all(|o| o.error.is_none()))
}

fn cmd_rates(path: &Path, dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let fits = fit_rates_csv(path)?;
    let dest = dest
        .map(Path::to_path_buf)
        .unwrap_or_else(|| path.with_file_name("rates.json"));
    let v = json!({ "version": env!("CARGO_PKG_VERSION"), "records": path.display().to_string(), "fits": fits });
    write_file(&dest, &serde_json::to_string_pretty(&v).expect("json"))?;
    print_fits(&fits, out)?;
    Ok(())
}

/// Parses `args`, runs the subcommand writing reports to `out`, and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = (|| -> Result<i32> {
        if let Command::Rates { records, out: dest } = &cli.command {
            cmd_rates(records, dest.as_deref(), out)?;
            return Ok(0);
        }
        let cfg = load_config(&cli)?;
        match &cli.command {
            Command::Geometry { surface, json } => cmd_geometry(&cfg, surface, *json, out).map(|_| 0),
            Command::Minimize => cmd_minimize(&cfg, out).map(|s| if s == FlowStatus::Converged { 0 } else { 1 }),
            Command::Center { surface } => cmd_center(&cfg, surface, out).map(|_| 0),
            Command::Suite => cmd_suite(&cfg, cli.jobs, out).map(|ok| if ok { 0 } else { 1 }),
            Command::Rates { .. } => unreachable!("handled above"),
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
