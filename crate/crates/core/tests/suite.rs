use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use willmore::ambient::*;
use willmore::barycenter::CenterParams;
use willmore::flow::FlowParams;
use willmore::suite::*;
use willmore::surface::*;
use willmore::Error;

fn small_params(chart: &MetricChart, areas: Vec<f64>) -> LadderParams {
    let grid = GridSpec { n_theta: 16, n_phi: 32, degree: 8 };
    LadderParams {
        ladder: LadderSpec {
            areas: Some(areas),
            fine_levels: 0,
            fine_grid: grid,
            ..LadderSpec::default()
        },
        grid,
        flow: FlowParams::default(),
        center: CenterParams::default(),
        geodesic: GeodesicSolverParams::for_chart(chart),
    }
}

fn areas_for(radii: &[f64]) -> Vec<f64> {
    radii.iter().map(|r| 4.0 * PI * r * r).collect()
}

#[test]
fn exact_power_law_fit() {
    let pts: Vec<(usize, f64, f64)> = (0..6)
        .map(|k| {
            let r = 0.1 * 2f64.powf(-(k as f64) / 2.0);
            (k, r, 7.0 * r * r)
        })
        .collect();
    let fit = fit_series("x", 2.0, &pts).unwrap();
    assert!((fit.slope.unwrap() - 2.0).abs() <= 1e-12);
    assert!((fit.constant.unwrap() - 7.0).abs() <= 1e-10);
    assert!(fit.residuals.iter().all(|r| r.abs() <= 1e-12));
    assert_eq!(fit.verdict, RateVerdict::Pass);
}

#[test]
fn higher_order_term_barely_moves_the_slope() {
    let pts: Vec<(usize, f64, f64)> = (0..9)
        .map(|k| {
            let r = 1e-2 * 10f64.powf(k as f64 / 8.0);
            (k, r, r + r.powi(3))
        })
        .collect();
    let s = fit_series("x", 1.0, &pts).unwrap().slope.unwrap();
    assert!(s > 0.98 && s < 1.02, "{s}");
}

#[test]
fn slow_decay_fails_and_floor_is_not_applicable() {
    let rs = [0.08f64, 0.04, 0.02, 0.01];
    let slow: Vec<_> = rs.iter().enumerate().map(|(k, r)| (k, *r, r.sqrt())).collect();
    assert_eq!(fit_series("x", 1.0, &slow).unwrap().verdict, RateVerdict::Fail);
    let floor: Vec<_> = rs.iter().enumerate().map(|(k, r)| (k, *r, 1e-3 * FLOOR_REL * r * r)).collect();
    let fit = fit_series("x", 2.0, &floor).unwrap();
    assert_eq!(fit.verdict, RateVerdict::NotApplicable);
    assert!(fit.slope.is_none());
}

#[test]
fn too_few_levels_is_an_error() {
    let pts = [(0, 0.1, 0.1), (1, 0.05, 0.05), (2, 0.025, f64::NAN)];
    assert!(matches!(
        fit_series("x", 1.0, &pts),
        Err(Error::InsufficientLevels { have: 2, need: 3 })
    ));
}

#[test]
fn rates_from_a_generic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let mut text = String::from("R,h_dev,acirc_l2,other\n");
    for k in 0..5 {
        let r = 0.08 * 0.5f64.powi(k);
        text.push_str(&format!("{r},{},{},1\n", 3.0 * r, 0.5 * r * r));
    }
    std::fs::write(&path, text).unwrap();
    let fits = fit_rates_csv(&path).unwrap();
    assert_eq!(fits.len(), 2);
    for f in &fits {
        assert!((f.slope.unwrap() - f.exponent).abs() <= 1e-12, "{f:?}");
        assert_eq!(f.levels, vec![0, 1, 2, 3, 4]);
    }
    std::fs::write(&path, "h_dev\n1\n").unwrap();
    assert!(fit_rates_csv(&path).is_err());
}

#[test]
fn critical_point_of_the_default_metric() {
    let chart = MetricSpec::morse_default().build().unwrap();
    let z = find_critical_point(&chart).unwrap();
    assert!((z - Vector3::new(1.0 / 3.0, 0.0, 0.0)).norm() <= 1e-12, "{z:?}");
    assert!(matches!(find_critical_point(&MetricChart::flat(1.0).unwrap()), Err(Error::NoCriticalPoint(_))));
    assert!(matches!(find_critical_point(&MetricChart::space_form(1.0, 1.0).unwrap()), Err(Error::NoCriticalPoint(_))));
}

proptest! {
    #[test]
    fn containment_of_a_round_sphere(x in -0.2f64..0.2, y in -0.2f64..0.2, z in -0.2f64..0.2) {
        let s = Surface::round(Vector3::new(0.01, 0.0, 0.0), 0.1, 4);
        let p = Vector3::new(x, y, z);
        let d = (p - s.center()).norm();
        let (inside, margin) = contains_point(&s, &p);
        prop_assert!((margin - (0.1 - d)).abs() <= 1e-12);
        prop_assert_eq!(inside, d < 0.1);
    }
}

#[test]
fn off_center_surface_does_not_enclose() {
    let chart = MetricSpec::morse_default().build().unwrap();
    let grid = make_grid(8, 16, 4).unwrap();
    let s = Surface::round(Vector3::new(1.0 / 3.0 + 0.15, 0.0, 0.0), 0.05, 4);
    let (inside, margin) = enclosed_critical_point(&chart, &s, &grid).unwrap();
    assert!(!inside);
    assert!((margin + 0.1).abs() <= 1e-12);
    assert!(enclosed_critical_point(&MetricChart::flat(1.0).unwrap(), &s, &grid).is_err());
}

#[test]
fn flat_ladder_sits_at_the_floor() {
    let chart = MetricChart::flat(1.0).unwrap();
    let params = small_params(&chart, areas_for(&[0.08, 0.04, 0.02]));
    let out = run_ladder(&chart, None, &params).unwrap();
    let records: Vec<EstimateRecord> = out.iter().map(|o| o.record.clone()).collect();
    for r in &records {
        assert!(r.converged(), "{}", r.status);
        assert!((r.willmore - 4.0 * PI).abs() <= 1e-8);
        assert_eq!(r.enclosed, None);
        assert_eq!(r.sc_p0, 0.0);
    }
    for f in fit_rates(&records).unwrap() {
        assert_eq!(f.verdict, RateVerdict::NotApplicable, "{f:?}");
    }
}

#[test]
fn space_form_ladder_matches_closed_forms() {
    let chart = MetricChart::space_form(1.0, 1.0).unwrap();
    let radii = [0.1f64, 0.07, 0.05];
    let areas = areas_for(&radii);
    let params = small_params(&chart, areas);
    let out = run_ladder(&chart, None, &params).unwrap();
    for (o, big_r) in out.iter().zip(radii) {
        let r = &o.record;
        assert!(r.converged(), "{}", r.status);
        assert!((r.area_radius - big_r).abs() <= 1e-12);
        // geodesic radius ρ with sin ρ = R
        let rho = big_r.asin();
        let expected = (2.0 / rho.tan() - 2.0 / big_r).abs();
        assert!((r.h_dev - expected).abs() <= 1e-6, "{} vs {expected}", r.h_dev);
        assert!(r.lambda_dev <= 1e-6);
        assert!((r.sc_p0 - 6.0).abs() <= 1e-10);
        assert!(r.grad_sc <= 1e-8);
        assert!(r.acirc_linf <= 1e-6);
        assert!((r.dist_band - (rho - big_r)).abs() <= 1e-7);
    }
}

#[test]
fn records_are_reproducible_from_saved_surfaces() {
    let chart = MetricSpec::morse_default().build().unwrap();
    let params = small_params(&chart, areas_for(&[0.06, 0.045, 0.03]));
    let out = run_ladder(&chart, None, &params).unwrap();
    let fits = fit_rates(&out.iter().map(|o| o.record.clone()).collect::<Vec<_>>()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &out, &fits, None).unwrap();
    let back = read_records_csv(&dir.path().join("records.csv")).unwrap();
    let grid = params.grid.build().unwrap();
    let z = find_critical_point(&chart).unwrap();
    for r in &back {
        let s = Surface::load(&dir.path().join(format!("surfaces/level_{}.json", r.level))).unwrap();
        let again = estimate_record(&chart, &s, &grid, r.level, &r.status, &params.center, &params.geodesic, Some(&z)).unwrap();
        for name in ["h_dev", "h2_dev", "grad_h_dev", "acirc_l2", "acirc_linf", "acirc_corr", "lambda_dev", "dist_band"] {
            let (a, b) = (r.field(name).unwrap(), again.field(name).unwrap());
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{name}: {a} vs {b}");
        }
        assert!((r.willmore - again.willmore).abs() <= 1e-12);
        assert_eq!(r.enclosed, Some(true));
        assert!(r.diam_ratio >= 1.8 && r.diam_ratio <= 2.2, "{}", r.diam_ratio);
    }
    for name in ["rates.json", "error_budget.csv", "h_dev.dat", "s_eq.dat", "moment3.dat", "simons.dat"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let rates: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rates.json")).unwrap()).unwrap();
    assert_eq!(rates["fits"].as_array().unwrap().len(), RATE_TABLE.len());
}

#[test]
fn oversized_ladders_are_rejected() {
    let chart = MetricSpec::morse_default().build().unwrap();
    let params = small_params(&chart, areas_for(&[0.2, 0.1, 0.05]));
    assert!(run_ladder(&chart, None, &params).is_err());
    let params = small_params(&chart, areas_for(&[0.05, 0.06, 0.04]));
    assert!(run_ladder(&chart, None, &params).is_err());
}
