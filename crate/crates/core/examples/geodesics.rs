//! Exponential and logarithm maps, distances and geodesic spheres.
//!
//! cargo run --release --example geodesics

use nalgebra::Vector3;
use willmore::ambient::{distance, exp_map, log_map, GeodesicSolverParams, MetricChart, MetricSpec};
use willmore::flow::geodesic_sphere;
use willmore::surface::{geometry, make_grid};

fn main() -> willmore::Result<()> {
    let morse = MetricSpec::morse_default().build()?;
    let gp = GeodesicSolverParams::for_chart(&morse);
    let p = Vector3::new(0.3, 0.0, 0.0);
    let v = Vector3::new(0.05, 0.02, -0.03);
    let q = exp_map(&morse, &p, &v, &gp)?;
    let back = log_map(&morse, &p, &q, &gp)?;
    println!("exp_p v = {:.12?}", q.as_slice());
    println!("log_p q − v = {:.3e}", (back - v).norm());
    println!("d(p, q) = {:.12}, d(q, p) = {:.12}", distance(&morse, &p, &q, &gp)?, distance(&morse, &q, &p, &gp)?);

    let s3 = MetricChart::space_form(1.0, 1.0)?;
    let gs = GeodesicSolverParams::for_chart(&s3);
    let x = Vector3::new(0.3, 0.1, 0.0);
    println!("unit sphere: d(0, x) = {:.12}, |x| = {:.12}", distance(&s3, &Vector3::zeros(), &x, &gs)?, x.norm());

    let grid = make_grid(24, 48, 12)?;
    for r in [0.08, 0.04, 0.02] {
        let (s, fit) = geodesic_sphere(&morse, &p, r, &grid, &gp)?;
        let a = geometry(&morse, &s, &grid)?.area();
        println!(
            "geodesic sphere r={r}: area/(4πr²) − 1 = {:+.6e}, refit error {fit:.1e}",
            a / (4.0 * std::f64::consts::PI * r * r) - 1.0
        );
    }
    Ok(())
}
