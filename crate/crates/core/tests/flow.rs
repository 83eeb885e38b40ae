use std::f64::consts::PI;

use nalgebra::Vector3;
use willmore::ambient::*;
use willmore::flow::*;
use willmore::functionals::*;
use willmore::surface::*;

fn acirc_l2(chart: &MetricChart, s: &Surface, grid: &SphericalGrid) -> f64 {
    let f = geometry(chart, s, grid).unwrap();
    let n: Vec<f64> = (0..f.len()).map(|k| norm2_2(&f.gamma_inv[k], &f.a_circ[k])).collect();
    f.integrate(&n).sqrt()
}

#[test]
fn flat_ellipsoid_flows_to_a_round_sphere() {
    let grid = make_grid(24, 48, 12).unwrap();
    let chart = MetricChart::flat(1.0).unwrap();
    let init = Surface::ellipsoid(&grid, Vector3::zeros(), [0.1, 0.1, 0.12], 12);
    let (s, trace) = minimize(&chart, &init, &FlowParams::default(), &grid).unwrap();
    assert_eq!(trace.status, FlowStatus::Converged);
    let rep = evaluate(&chart, &s, &grid).unwrap();
    assert!((rep.willmore - 4.0 * PI).abs() <= 1e-6, "{}", rep.willmore);
    assert!(acirc_l2(&chart, &s, &grid) <= 1e-6);
    assert!(rep.lambda_opt.abs() <= 1e-6);
    assert!(trace.descent_is_monotone(1e-12));
}

#[test]
fn area_is_held_along_the_trace() {
    let grid = make_grid(24, 48, 12).unwrap();
    let chart = MetricSpec::morse_default().build().unwrap();
    let init = Surface::ellipsoid(&grid, Vector3::new(1.0 / 3.0, 0.0, 0.0), [0.05, 0.055, 0.06], 12);
    let a0 = geometry(&chart, &init, &grid).unwrap().area();
    let params = FlowParams::default();
    let (s, trace) = minimize(&chart, &init, &params, &grid).unwrap();
    assert_eq!(trace.status, FlowStatus::Converged);
    for r in &trace.records {
        assert!((r.area - a0).abs() <= 1e-10 * a0, "step {} area {}", r.step, r.area);
    }
    assert!(trace.descent_is_monotone(1e-12));
    let last = trace.last().unwrap();
    assert!(last.scaled_residual <= params.el_tol);
    let lam = optimal_lambda(&chart, &s, &grid).unwrap();
    assert!((lam - last.lambda).abs() <= 1e-8 * lam.abs().max(1.0));
}

#[test]
fn prescribed_area_is_reached() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::flat(1.0).unwrap();
    let init = Surface::round(Vector3::zeros(), 0.1, 8);
    let target = 4.0 * PI * 0.08f64.powi(2);
    let params = FlowParams { target_area: Some(target), ..FlowParams::default() };
    let (s, _) = minimize(&chart, &init, &params, &grid).unwrap();
    assert!((geometry(&chart, &s, &grid).unwrap().area() - target).abs() <= 1e-12);
}

#[test]
fn perturbed_space_form_sphere_has_the_expected_multiplier() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::space_form(1.0, 1.0).unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let r = 0.1;
    let (mut init, _) = geodesic_sphere(&chart, &Vector3::zeros(), r, &grid, &gp).unwrap();
    *init.coeff_mut(2, 0) += 0.05 * r;
    let (s, trace) = minimize(&chart, &init, &FlowParams::default(), &grid).unwrap();
    assert_eq!(trace.status, FlowStatus::Converged);
    let lam = optimal_lambda(&chart, &s, &grid).unwrap();
    assert!((lam + 2.0).abs() <= 1e-5, "{lam}");
}

#[test]
fn morse_flow_drifts_toward_the_critical_point() {
    let grid = make_grid(24, 48, 12).unwrap();
    let chart = MetricSpec::morse_default().build().unwrap();
    let zstar = Vector3::new(1.0 / 3.0, 0.0, 0.0);
    let start = zstar + Vector3::new(0.0, 0.1, 0.0);
    let init = Surface::round(start, 0.05, 12);
    let (s, trace) = minimize(&chart, &init, &FlowParams::default(), &grid).unwrap();
    assert_eq!(trace.status, FlowStatus::Converged);
    let d = (s.center() - zstar).norm();
    assert!(d < 0.1, "center {:?}", s.center());
}

#[test]
fn flat_flow_commutes_with_translation() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::flat(1.0).unwrap();
    let init = Surface::ellipsoid(&grid, Vector3::zeros(), [0.1, 0.1, 0.12], 8);
    let t = Vector3::new(0.2, -0.1, 0.05);
    let params = FlowParams { max_steps: 20, newton_iters: 0, ..FlowParams::default() };
    let (a, _) = minimize(&chart, &init, &params, &grid).unwrap();
    let (b, _) = minimize(&chart, &init.translated(&t), &params, &grid).unwrap();
    assert!((b.center() - a.center() - t).norm() <= 1e-8);
    for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
        assert!((x - y).abs() <= 1e-8);
    }
}

#[test]
fn degree_mismatch_is_rejected() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::flat(1.0).unwrap();
    let init = Surface::round(Vector3::zeros(), 0.1, 6);
    assert!(minimize(&chart, &init, &FlowParams::default(), &grid).is_err());
}

#[test]
fn trace_csv_has_one_row_per_record() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::flat(1.0).unwrap();
    let init = Surface::ellipsoid(&grid, Vector3::zeros(), [0.1, 0.1, 0.11], 8);
    let params = FlowParams { max_steps: 5, newton_iters: 0, ..FlowParams::default() };
    let (_, trace) = minimize(&chart, &init, &params, &grid).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,phase,W,area,lambda,scaled_residual,step_size");
    assert_eq!(text.lines().count(), trace.records.len() + 1);
}

#[test]
fn flat_geodesic_sphere_is_exact() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::flat(1.0).unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let p = Vector3::new(0.1, 0.2, -0.1);
    let (s, err) = geodesic_sphere(&chart, &p, 0.15, &grid, &gp).unwrap();
    assert!(err <= 1e-12);
    assert!((s.center() - p).norm() <= 1e-14);
    assert!((s.mean_radius() - 0.15).abs() <= 1e-12);
    assert!(s.coeffs[1..].iter().all(|c| c.abs() <= 1e-12));
}

#[test]
fn space_form_geodesic_sphere_area() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricChart::space_form(1.0, 1.0).unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let (s, _) = geodesic_sphere(&chart, &Vector3::zeros(), 0.2, &grid, &gp).unwrap();
    let a = geometry(&chart, &s, &grid).unwrap().area();
    assert!((a - 4.0 * PI * 0.2f64.sin().powi(2)).abs() <= 1e-7);
}

#[test]
fn morse_geodesic_sphere_area_deviation_is_second_order() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricSpec::morse_default().build().unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let p = Vector3::new(0.2, 0.1, 0.0);
    let rs = [0.04, 0.02, 0.01];
    let dev: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let (s, _) = geodesic_sphere(&chart, &p, r, &grid, &gp).unwrap();
            (geometry(&chart, &s, &grid).unwrap().area() / (4.0 * PI * r * r) - 1.0).abs()
        })
        .collect();
    for w in dev.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((slope - 2.0).abs() <= 0.1, "{dev:?}");
    }
}
