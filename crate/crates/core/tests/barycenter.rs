use nalgebra::{Rotation3, Vector3};
use willmore::ambient::*;
use willmore::barycenter::*;
use willmore::surface::*;

fn flat() -> (MetricChart, GeodesicSolverParams) {
    let c = MetricChart::flat(1.0).unwrap();
    let gp = GeodesicSolverParams::for_chart(&c);
    (c, gp)
}

fn centroid(chart: &MetricChart, s: &Surface, grid: &SphericalGrid) -> Vector3<f64> {
    let f = geometry(chart, s, grid).unwrap();
    let mut m = Vector3::zeros();
    for k in 0..f.len() {
        m += f.quad[k] * f.position[k];
    }
    m / f.area()
}

#[test]
fn flat_round_sphere_is_centered_at_its_center() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, gp) = flat();
    let c = Vector3::new(0.05, -0.02, 0.1);
    let s = Surface::round(c, 0.03, 8);
    let rep = geometric_center(&chart, &s, &grid, &CenterParams::default(), &gp).unwrap();
    assert!((rep.p0() - c).norm() <= 1e-10);
    assert!(rep.moment_g.iter().all(|m| m.abs() <= 1e-12));
    assert!(rep.hessian_positive);
    assert!((rep.diameter / 0.06 - 1.0).abs() <= 1e-3);
}

#[test]
fn flat_ellipsoid_center_is_the_area_centroid() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, gp) = flat();
    let base = Surface::ellipsoid(&grid, Vector3::new(0.02, 0.01, -0.03), [0.03, 0.035, 0.045], 8);
    let mut s = base.clone();
    *s.coeff_mut(3, 1) += 0.004;
    *s.coeff_mut(2, -1) += 0.003;
    let rep = geometric_center(&chart, &s, &grid, &CenterParams::default(), &gp).unwrap();
    assert!((rep.p0() - centroid(&chart, &s, &grid)).norm() <= 1e-10);
}

#[test]
fn flat_center_is_equivariant() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, gp) = flat();
    let mut s = Surface::ellipsoid(&grid, Vector3::zeros(), [0.03, 0.035, 0.045], 8);
    *s.coeff_mut(3, 2) += 0.004;
    let p = CenterParams::default();
    let c0 = geometric_center(&chart, &s, &grid, &p, &gp).unwrap().p0();
    let q = Rotation3::from_euler_angles(0.3, -0.2, 0.7);
    let t = Vector3::new(0.1, -0.05, 0.02);
    let moved = s.rotated(&q, &grid).translated(&t);
    let c1 = geometric_center(&chart, &moved, &grid, &p, &gp).unwrap().p0();
    assert!((c1 - (q * c0 + t)).norm() <= 1e-8);
}

#[test]
fn space_form_geodesic_sphere_is_centered_at_its_pole() {
    let grid = make_grid(12, 24, 6).unwrap();
    let chart = MetricChart::space_form(1.0, 1.0).unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let p = Vector3::new(0.08, -0.03, 0.02);
    let (s, _) = willmore::flow::geodesic_sphere(&chart, &p, 0.05, &grid, &gp).unwrap();
    let rep = geometric_center(&chart, &s, &grid, &CenterParams::default(), &gp).unwrap();
    assert!((rep.p0() - p).norm() <= 1e-8, "{:?}", rep.p0() - p);
    // geodesic distance r against area radius sin r
    let r: f64 = 0.05;
    assert!((rep.dist_band - (r - r.sin())).abs() <= 1e-8, "{}", rep.dist_band);
}

#[test]
fn center_moment_is_small() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricSpec::morse_default().build().unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let mut s = Surface::ellipsoid(&grid, Vector3::new(0.2, 0.1, 0.0), [0.03, 0.035, 0.04], 8);
    *s.coeff_mut(3, 0) += 0.003;
    let params = CenterParams::default();
    let rep = geometric_center(&chart, &s, &grid, &params, &gp).unwrap();
    let m = Vector3::from(rep.moment_g).norm();
    assert!(m <= 10.0 * params.tol * rep.area, "{m}");
    assert!(rep.hessian_positive);
}

#[test]
fn recentering_agrees_with_the_center_refit() {
    let grid = make_grid(16, 32, 8).unwrap();
    let chart = MetricSpec::morse_default().build().unwrap();
    let gp = GeodesicSolverParams::for_chart(&chart);
    let s = Surface::ellipsoid(&grid, Vector3::new(0.2, 0.1, 0.0), [0.03, 0.035, 0.04], 8);
    let params = CenterParams::default();
    let (rep, zs) = center_and_recenter(&chart, &s, &grid, &params, &gp).unwrap();
    let rc = recenter_surface(&chart, &s, &rep.p0(), &grid, &gp).unwrap();
    for (a, b) in zs.coeffs.iter().zip(&rc.surface.coeffs) {
        assert!((a - b).abs() <= 1e-10);
    }
    let g0 = rc.chart.metric(&Vector3::zeros()).unwrap();
    assert!((g0 - nalgebra::Matrix3::identity()).norm() <= 1e-8);
    let f = geometry(&MetricChart::flat(1.0).unwrap(), &zs, &grid).unwrap();
    assert!((f.area() / rep.area - 1.0).abs() <= 1e-2);
}

#[test]
fn off_center_sphere_first_moments() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, _) = flat();
    let d = Vector3::new(0.0, 0.0, 0.01);
    let r = 0.05;
    let s = Surface::round(d, r, 8);
    let m = moment_suite(&chart, &s, &grid, 0).unwrap();
    let area = 4.0 * std::f64::consts::PI * r * r;
    assert_eq!(m[0].count, 6);
    assert!((m[0].max_abs - area * d.z / r).abs() <= 1e-8 * area);
}

#[test]
fn centered_sphere_has_no_odd_moments() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, _) = flat();
    let m = moment_suite(&chart, &Surface::round(Vector3::zeros(), 0.05, 8), &grid, 2).unwrap();
    for (k, e) in m.iter().enumerate() {
        assert_eq!(e.degree, 2 * k + 1);
        assert_eq!(e.count, moment_count(k));
        assert!(e.max_abs <= 1e-10, "{e:?}");
    }
}

#[test]
fn moment_counts() {
    assert_eq!(moment_count(0), 6);
    assert_eq!(moment_count(1), 56);
    assert_eq!(moment_count(2), 252);
}

#[test]
fn large_surfaces_are_rejected() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, gp) = flat();
    let s = Surface::round(Vector3::zeros(), 0.2, 8);
    assert!(geometric_center(&chart, &s, &grid, &CenterParams::default(), &gp).is_err());
}

#[test]
fn report_serializes() {
    let grid = make_grid(16, 32, 8).unwrap();
    let (chart, gp) = flat();
    let rep = geometric_center(&chart, &Surface::round(Vector3::zeros(), 0.05, 8), &grid, &CenterParams::default(), &gp).unwrap();
    let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert!(v.get("moment_g").is_some());
}
