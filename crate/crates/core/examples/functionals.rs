//! Willmore energy, Gauss–Bonnet bookkeeping and the optimal multiplier for a
//! few surfaces in flat space, the unit sphere and the default metric.
//!
//! cargo run --release --example functionals

use nalgebra::Vector3;
use willmore::ambient::{GeodesicSolverParams, MetricChart, MetricSpec};
use willmore::flow::geodesic_sphere;
use willmore::functionals::{el_residual, evaluate, FunctionalReport};
use willmore::surface::{make_grid, Surface};

fn show(label: &str, r: &FunctionalReport) {
    println!(
        "{label:<28} R={:.4e} W={:.10} U={:.3e} V={:+.3e} gb={:.1e} lambda={:+.6} |E|R^3={:.2e}",
        r.area_radius,
        r.willmore,
        r.u,
        r.v,
        r.gauss_bonnet_residual,
        r.lambda_opt,
        r.scaled_residual()
    );
}

fn main() -> willmore::Result<()> {
    let grid = make_grid(32, 64, 16)?;

    let flat = MetricChart::flat(1.0)?;
    show("flat round sphere", &evaluate(&flat, &Surface::round(Vector3::zeros(), 0.1, 16), &grid)?);
    let ell = Surface::ellipsoid(&grid, Vector3::zeros(), [0.1, 0.1, 0.13], 16);
    show("flat ellipsoid", &evaluate(&flat, &ell, &grid)?);

    let s3 = MetricChart::space_form(1.0, 1.0)?;
    let (gs, _) = geodesic_sphere(&s3, &Vector3::zeros(), 0.2, &grid, &GeodesicSolverParams::for_chart(&s3))?;
    let rep = evaluate(&s3, &gs, &grid)?;
    show("unit sphere, r = 0.2", &rep);
    println!("  4π cos²(0.2) = {:.10}", 4.0 * std::f64::consts::PI * 0.2f64.cos().powi(2));
    let (_, norm) = el_residual(&s3, &gs, &grid, -2.0)?;
    println!("  ‖E‖ at λ = −2: {norm:.2e}");

    let morse = MetricSpec::morse_default().build()?;
    let s = Surface::round(Vector3::new(1.0 / 3.0, 0.0, 0.0), 0.05, 16);
    show("default metric, coord sphere", &evaluate(&morse, &s, &grid)?);
    Ok(())
}
