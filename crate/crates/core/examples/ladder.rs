//! A short area ladder in the default metric with rate fits.
//!
//! cargo run --release --example ladder

use willmore::ambient::{GeodesicSolverParams, MetricSpec};
use willmore::barycenter::CenterParams;
use willmore::flow::FlowParams;
use willmore::suite::{fit_rates, run_ladder, GridSpec, LadderParams, LadderSpec};

fn main() -> willmore::Result<()> {
    let chart = MetricSpec::morse_default().build()?;
    let grid = GridSpec { n_theta: 24, n_phi: 48, degree: 12 };
    let params = LadderParams {
        ladder: LadderSpec { r0: 0.08, levels: 5, fine_levels: 0, ..LadderSpec::default() },
        grid,
        flow: FlowParams::default(),
        center: CenterParams::default(),
        geodesic: GeodesicSolverParams::for_chart(&chart),
    };
    let out = run_ladder(&chart, None, &params)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}", "level", "R", "h_dev", "acirc_l2", "lambda_dev", "dist_band");
    for o in &out {
        let r = &o.record;
        println!(
            "{:>5} {:>10.4e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}  {}",
            r.level, r.area_radius, r.h_dev, r.acirc_l2, r.lambda_dev, r.dist_band, r.status
        );
    }
    let records: Vec<_> = out.into_iter().map(|o| o.record).collect();
    for f in fit_rates(&records)? {
        let slope = f.slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
        println!("{:<12} expected {:.0}, slope {slope:>6}, {:?}", f.name, f.exponent, f.verdict);
    }
    Ok(())
}
