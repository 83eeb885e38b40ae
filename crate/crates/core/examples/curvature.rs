//! Ambient curvature of the builtin metrics, and the critical point of the
//! scalar curvature that small Willmore spheres concentrate at.
//!
//! cargo run --release --example curvature

use nalgebra::Vector3;
use willmore::ambient::{christoffel_expansion_check, recenter_chart, GeodesicSolverParams, MetricChart, MetricSpec};
use willmore::suite::find_critical_point;

fn main() -> willmore::Result<()> {
    let morse = MetricSpec::morse_default().build()?;
    println!("{}", morse.describe());
    for p in [Vector3::zeros(), Vector3::new(0.2, -0.1, 0.05)] {
        let c = morse.curvature_at(&p)?;
        println!("at {:?}: Sc = {:.8}, |∇Sc| = {:.6e}", c.point, c.sc, c.grad_sc_norm());
        println!("  Ric diagonal {:.6?}", c.ric.diagonal().as_slice());
    }

    let z = find_critical_point(&morse)?;
    let c = morse.curvature_at(&z)?;
    let eig = c.hess_sc.symmetric_eigenvalues();
    println!("critical point {:.12?}: Sc = {:.10}, Hess eigenvalues {:.4?}", z.as_slice(), c.sc, eig.as_slice());
    println!("multiplier limit −Sc/3 = {:.10}", -c.sc / 3.0);

    let s3 = MetricChart::space_form(1.0, 1.0)?;
    let c = s3.curvature_at(&Vector3::zeros())?;
    println!("unit sphere at origin: Sc = {}, Ric diagonal {:?}", c.sc, c.ric.diagonal().as_slice());

    // normal coordinates about z: Γ(y) is linear in y up to O(|y|²)
    let gp = GeodesicSolverParams::for_chart(&morse);
    let rc = recenter_chart(&morse, &z, &gp)?;
    let rep = christoffel_expansion_check(&rc, 0.08, 4)?;
    println!(
        "normal form defect {:.2e}, Γ expansion slope {:?}, divergence slope {:?}",
        rep.normal_form_defect, rep.christoffel_slope, rep.divergence_slope
    );
    Ok(())
}
