//! Flows a perturbed sphere in the default metric to an area-constrained
//! Willmore surface and prints the trace.
//!
//! cargo run --release --example minimize

use nalgebra::Vector3;
use willmore::ambient::MetricSpec;
use willmore::flow::{minimize, FlowParams, FlowPhase};
use willmore::functionals::evaluate;
use willmore::surface::{make_grid, Surface};

fn main() -> willmore::Result<()> {
    let chart = MetricSpec::morse_default().build()?;
    let grid = make_grid(24, 48, 12)?;
    let mut init = Surface::round(Vector3::new(0.36, 0.02, 0.0), 0.05, 12);
    *init.coeff_mut(2, 0) += 0.004;
    *init.coeff_mut(3, 1) -= 0.002;

    let (s, trace) = minimize(&chart, &init, &FlowParams::default(), &grid)?;
    for r in trace.records.iter().filter(|r| r.phase != FlowPhase::Descent || r.step % 25 == 0) {
        println!(
            "{:>4} {:<8} W={:.12} area={:.6e} λ={:+.8} |E|R³={:.2e}",
            r.step,
            format!("{:?}", r.phase),
            r.willmore,
            r.area,
            r.lambda,
            r.scaled_residual
        );
    }
    println!("status {:?}", trace.status);
    let rep = evaluate(&chart, &s, &grid)?;
    println!("final center {:.8?}, W = {:.12}, λ = {:.8}", s.center().as_slice(), rep.willmore, rep.lambda_opt);
    Ok(())
}
