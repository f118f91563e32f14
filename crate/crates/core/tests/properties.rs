use holozeros::bounds::{Budget, BudgetForm, CountCertificate};
use holozeros::geometry::*;
use holozeros::holofunc::{ExponentialSum, HolomorphicModel, Polynomial, PolynomialModel};
use holozeros::measure::*;
use holozeros::zerocount::{count_in_region, winding_count, Contour};
use holozeros::Point;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn point(lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    (lo..hi, lo..hi).prop_map(|(a, b)| Point::new(a, b))
}

fn weighted_pentagon() -> (PlanarDomain, BoundaryWeight) {
    let dom = PlanarDomain::polygon(vec![Point::new(0.0, 0.0), Point::new(3.0, 0.2), Point::new(3.2, 2.0), Point::new(1.0, 3.0), Point::new(-0.8, 1.4)]).unwrap();
    let per = dom.perimeter();
    let samples = (0..32).map(|k| (per * k as f64 / 32.0, 0.4 + 0.15 * (4.0 * PI * k as f64 / 32.0).sin())).collect();
    (dom.clone(), BoundaryWeight::new(&dom, samples).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extension_is_half_lipschitz(x in point(-3.0, 6.0), y in point(-3.0, 6.0)) {
        let (dom, w) = weighted_pentagon();
        let e = ExtendedWeight::new(&w, &dom).unwrap();
        prop_assert!((e.eval(x) - e.eval(y)).abs() <= 0.5 * (x - y).norm() + 1e-12);
        prop_assert!(e.eval(x) >= 0.5 * dom.distance(x) - 1e-12);
    }

    #[test]
    fn extension_is_comparable_on_its_disks(x in point(-3.0, 6.0), t in 0.0..1.0f64, a in 0.0..6.3f64) {
        let (dom, w) = weighted_pentagon();
        let e = ExtendedWeight::new(&w, &dom).unwrap();
        let rx = e.eval(x);
        let ry = e.eval(x + Point::from_polar(t * rx, a));
        prop_assert!(ry >= 0.5 * rx && ry <= 1.5 * rx);
    }

    #[test]
    fn nets_satisfy_spacing(r in 0.05..0.6f64, n in 3usize..8, radius in 1.0..3.0f64) {
        let dom = PlanarDomain::disk(Point::new(0.0, 0.0), radius, 16 * n).unwrap();
        let net = distribute_boundary_points(&dom, &smooth_weight(&BoundaryWeight::constant(&dom, r).unwrap(), &dom).unwrap()).unwrap();
        prop_assert!(net.spacing_violation().is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mollified_distance_keeps_affine_parts(s in 1.0..7.0f64, depth in -0.02..0.02f64) {
        // away from corners of a large square the signed distance is affine
        let dom = PlanarDomain::rectangle(-4.0, 4.0, -4.0, 4.0).unwrap();
        let rw = smooth_weight(&BoundaryWeight::constant(&dom, 0.2).unwrap(), &dom).unwrap();
        let x = Point::new(-3.5 + s, -4.0 + depth);
        let g = mollify_distance(&dom, &rw, 0.1, x).unwrap();
        prop_assert!((g - dom.signed_distance(x)).abs() < 1e-6 * rw.eval(x));
    }
}

fn random_sum() -> impl Strategy<Value = ExponentialSum> {
    prop::collection::vec(prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..4), 2..5).prop_map(|phases| {
        ExponentialSum::new(phases.into_iter().map(|c| Polynomial::new(c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phi_sandwich_and_upper_bound(s in random_sum(), z in point(-2.0, 2.0), h in 0.01..0.5f64) {
        let phi = s.phi(z, h);
        let psi = s.psi_max(z).0;
        prop_assert!(psi <= phi + 1e-12);
        prop_assert!(phi <= psi + h * (s.len() as f64).ln() + 1e-12);
        prop_assert!(s.log_abs(z, h).unwrap() <= phi + 1e-12);
        prop_assert!(s.laplacian_phi(z, h).value >= -1e-14);
    }

    #[test]
    fn log_derivative_matches_differences(s in random_sum(), z in point(-1.5, 1.5)) {
        let h = 0.3;
        let d = 1e-5;
        let u = |w: Point| s.value(w, h).unwrap().to_complex();
        let (u0, fd) = (u(z), (u(z + Point::new(d, 0.0)) - u(z - Point::new(d, 0.0))) / (2.0 * d));
        prop_assume!(u0.norm() > 1e-3);
        let ld = s.log_derivative(z, h).unwrap();
        prop_assert!((ld - fd / u0).norm() <= 1e-5 * (1.0 + ld.norm()) * (1.0 + 1.0 / u0.norm()));
    }
}

/// Roots away from the lines `re = 0.5`, `im = 0.5` and the unit-square edges.
fn roots(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(point(-0.6, 1.6), 1..=max).prop_filter("roots near a cut", |v| {
        v.iter().all(|z| {
            [z.re, z.im].iter().all(|c| (c - 0.5).abs() > 1e-3 && c.abs() > 1e-3 && (c - 1.0).abs() > 1e-3)
        })
    })
}

fn inside_unit(z: &Point) -> bool {
    z.re > 0.0 && z.re < 1.0 && z.im > 0.0 && z.im < 1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_match_sampled_roots(rs in roots(12)) {
        let u = PolynomialModel::new(Polynomial::from_roots(&rs));
        let unit = PlanarDomain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        prop_assert_eq!(count_in_region(&u, &unit, 1.0).unwrap().count, rs.iter().filter(|z| inside_unit(z)).count() as i64);
    }

    #[test]
    fn counts_are_additive(rs in roots(10), vertical in any::<bool>()) {
        let u = PolynomialModel::new(Polynomial::from_roots(&rs));
        let whole = Contour::from_domain(&PlanarDomain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap());
        let (a, b) = whole.split(vertical, 0.5);
        let total = winding_count(&u, &whole, 1.0).unwrap().count;
        prop_assert_eq!(total, winding_count(&u, &a, 1.0).unwrap().count + winding_count(&u, &b, 1.0).unwrap().count);
    }

    #[test]
    fn counts_are_homotopy_invariant(rs in prop::collection::vec(point(-0.5, 0.5), 1..8), far in prop::collection::vec(point(3.0, 5.0), 0..4)) {
        // zeros in [-0.5, 0.5]^2 or far away: the square [-1,1]^2 and its circumscribed circle agree
        let all: Vec<Point> = rs.iter().chain(&far).copied().collect();
        let u = PolynomialModel::new(Polynomial::from_roots(&all));
        let square = Contour::from_domain(&PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap());
        let circle = Contour::circle(Point::new(0.0, 0.0), 2f64.sqrt() + 1e-3, 128);
        let a = winding_count(&u, &square, 1.0).unwrap().count;
        prop_assert_eq!(a, winding_count(&u, &circle, 1.0).unwrap().count);
        prop_assert_eq!(a, rs.len() as i64);
    }

    #[test]
    fn conjugate_regions_agree(rs in prop::collection::vec(point(-1.5, 1.5), 1..6)) {
        // real coefficients: roots come in conjugate pairs
        let all: Vec<Point> = rs.iter().flat_map(|z| [*z, z.conj()]).collect();
        prop_assume!(all.iter().all(|z| (z.im.abs() - 0.5).abs() > 1e-3 && z.im.abs() > 1e-3 && (z.re.abs() - 1.0).abs() > 1e-3 && (z.im.abs() - 1.0).abs() > 1e-3));
        let u = PolynomialModel::new(Polynomial::from_roots(&all));
        let upper = PlanarDomain::rectangle(-1.0, 1.0, 0.5, 1.0).unwrap();
        let lower = PlanarDomain::rectangle(-1.0, 1.0, -1.0, -0.5).unwrap();
        prop_assert_eq!(count_in_region(&u, &upper, 1.0).unwrap().count, count_in_region(&u, &lower, 1.0).unwrap().count);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_is_additive(cut in 0.2..0.8f64, a in 0.5..2.0f64, b in -1.0..1.0f64) {
        let d = RieszMeasure::from_density(Density::Custom(Arc::new(move |z: Point| a + b * z.re * z.im + (z.re - z.im).cos())))
            .with_atom(Point::new(0.3, 0.4), 0.7);
        let whole = mass_over_region(&d, &PlanarDomain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap()).unwrap();
        let left = mass_over_region(&d, &PlanarDomain::rectangle(0.0, cut, 0.0, 1.0).unwrap()).unwrap();
        let right = mass_over_region(&d, &PlanarDomain::rectangle(cut, 1.0, 0.0, 1.0).unwrap()).unwrap();
        prop_assume!((cut - 0.3).abs() > 1e-6);
        prop_assert!((left + right - whole).abs() <= 1e-8 * whole.abs());
    }

    #[test]
    fn green_formula_matches_laplacian(x0 in -1.0..0.0f64, y0 in -1.0..0.0f64, w in 0.5..2.0f64, hgt in 0.5..2.0f64) {
        let dom = PlanarDomain::rectangle(x0, x0 + w, y0, y0 + hgt).unwrap();
        // |z|^2 has Laplacian 4; Re z^4 is harmonic
        let quad = |z: Point| (z.norm_sqr(), Complex64::new(2.0 * z.re, 2.0 * z.im));
        prop_assert!((mass_via_green_formula(&quad, &dom) - 4.0 * w * hgt).abs() <= 1e-6 * 4.0 * w * hgt);
        let harmonic = |z: Point| ((z * z * z * z).re, (Complex64::new(4.0, 0.0) * z * z * z).conj());
        prop_assert!(mass_via_green_formula(&harmonic, &dom).abs() <= 1e-6);
    }

    #[test]
    fn log_kernel_is_nonnegative_and_dominated(c in point(-1.0, 1.0), t_frac in 0.01..0.49f64, rtil in 0.05..1.0f64) {
        let m = RieszMeasure::from_density(Density::Constant { value: 1.0 });
        let v = log_kernel_integral(&m, c, rtil, rtil).unwrap();
        prop_assert!(v >= 0.0);
        let p = GrowthProfile::sample(&m, c, 1e-3, 1.0, 31, 2.0).unwrap();
        prop_assert!(growth_profile_bound(&p, t_frac * rtil, rtil).unwrap() >= v);
    }

    #[test]
    fn certificates_are_sound(actual in 0i64..200, pred in 0.0..200.0f64, band in 0.0..5.0f64, eps in 0.0..5.0f64, logs in 0.0..5.0f64, c2 in 0.0..3.0f64, h in 0.01..0.5f64) {
        let total = c2 / h * (band + eps + logs);
        let b = Budget { band_mass: band, epsilon_sum: eps, log_sum: logs, log_terms: vec![], c2, h, total, divergent: false };
        let cert = CountCertificate::new(actual, pred, b, BudgetForm::LogIntegral, 0.0);
        prop_assert!(cert.is_consistent());
        prop_assert_eq!(cert.satisfied, (actual as f64 - pred).abs() <= total);
        prop_assert!(cert.with_c2(cert.minimal_c2() * (1.0 + 1e-12)).satisfied);
    }
}
