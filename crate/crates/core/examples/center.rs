//! Geometric center of a surface and its odd moments in normal coordinates.
//!
//! cargo run --release --example center

use nalgebra::Vector3;
use willmore::ambient::{GeodesicSolverParams, MetricSpec};
use willmore::barycenter::{center_and_recenter, moment_suite, CenterParams};
use willmore::surface::{make_grid, Surface};

fn main() -> willmore::Result<()> {
    let chart = MetricSpec::morse_default().build()?;
    let gp = GeodesicSolverParams::for_chart(&chart);
    let grid = make_grid(24, 48, 12)?;
    let mut s = Surface::ellipsoid(&grid, Vector3::new(0.25, 0.05, 0.0), [0.03, 0.035, 0.04], 12);
    *s.coeff_mut(3, 0) += 0.002;

    let (rep, zs) = center_and_recenter(&chart, &s, &grid, &CenterParams::default(), &gp)?;
    println!("p0 = {:.12?}", rep.p0().as_slice());
    println!("iterations {}, |grad| = {:.2e}, Hessian min {:.4e}", rep.iterations, rep.grad_norm, rep.hessian_min);
    println!("moment_g = [{:.2e}, {:.2e}, {:.2e}]", rep.moment_g[0], rep.moment_g[1], rep.moment_g[2]);
    println!("dist band {:.4e}, diameter {:.6e}", rep.dist_band, rep.diameter);
    for m in moment_suite(&chart, &zs, &grid, 2)? {
        println!("degree {} ({} products): max |∫| = {:.4e}", m.degree, m.count, m.max_abs);
    }
    Ok(())
}
