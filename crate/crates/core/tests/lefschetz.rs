use proptest::prelude::*;
use sphere_census::census::fixed_points;
use sphere_census::gallery::local_model;
use sphere_census::lefschetz::{
    lefschetz_index, locate_fixed_point, planar_index, rectangle_certificate, AffineMap,
    Certificate, ChartMap, Rect,
};
use sphere_census::winding::SampledCurve;
use sphere_census::{parse_map, Chart, Complex64};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn index_examples() {
    let unit = SampledCurve::circle(c(0.0, 0.0), 1.0, 64, Chart::North);
    let doubling = |z: Complex64| 2.0 * z;
    assert_eq!(planar_index(&doubling, &unit).unwrap(), 1);
    let shift = |z: Complex64| z + 5.0;
    assert_eq!(planar_index(&shift, &unit).unwrap(), 0);
    let big = SampledCurve::circle(c(0.0, 0.0), 2.0, 64, Chart::North);
    let square = parse_map("power:d=2").unwrap();
    // oracle: indices of the enclosed fixed points 0 and 1 from small circles
    let small: i64 = [c(0.0, 0.0), c(1.0, 0.0)]
        .iter()
        .map(|&p| {
            lefschetz_index(&square, &SampledCurve::circle(p, 0.1, 64, Chart::North)).unwrap()
        })
        .sum();
    assert_eq!(small, 2);
    assert_eq!(lefschetz_index(&square, &big).unwrap(), small);
}

#[test]
fn canonical_certificates() {
    let unit = Rect::new(-1.0, 1.0, -1.0, 1.0);
    for (a, b, expected) in [
        (2.0, 2.0, Certificate::ExpandingCase),
        (0.5, 0.5, Certificate::ContractingCase),
        (0.5, 2.0, Certificate::SaddleCaseH),
        (2.0, 0.5, Certificate::SaddleCaseV),
    ] {
        assert_eq!(
            rectangle_certificate(&AffineMap::diagonal(a, b), &unit, 64).unwrap(),
            expected
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_index_is_det_sign(a in -3.0f64..3.0, b in -3.0f64..3.0, ox in -0.5f64..0.5, oy in -0.5f64..0.5) {
        prop_assume!((a - 1.0).abs() > 0.1 && (b - 1.0).abs() > 0.1);
        let f = AffineMap { matrix: [[a, 0.0], [0.0, b]], offset: [ox, oy] };
        // the unique fixed point is offset / (1 − diag)
        let fixed = c(ox / (1.0 - a), oy / (1.0 - b));
        prop_assume!(fixed.re.abs() < 0.9 && fixed.im.abs() < 0.9);
        let curve = Rect::new(-1.0, 1.0, -1.0, 1.0).boundary(64, Chart::North);
        let sign = ((a - 1.0) * (b - 1.0)).signum() as i64;
        prop_assert_eq!(planar_index(&f, &curve).unwrap(), sign);
    }

    #[test]
    fn certified_rectangles_hold_fixed_points(
        px in -1.0f64..1.0, py in -1.0f64..1.0,
        expand in prop::bool::ANY, scale in 0.0f64..1.0,
        mu_r in 0.0f64..0.3, mu_a in 0.0f64..std::f64::consts::TAU,
        half in 0.05f64..0.2, sx in -0.3f64..0.3, sy in -0.3f64..0.3,
    ) {
        let p = c(px, py);
        let lambda = if expand { 1.5 + 1.5 * scale } else { 0.1 + 0.5 * scale };
        let f = local_model(p, lambda, Complex64::from_polar(mu_r, mu_a));
        let rect = Rect::square(p + c(sx, sy) * half, half);
        let chart_map = ChartMap::new(f.clone(), Chart::North);
        let cert = rectangle_certificate(&chart_map, &rect, 32).unwrap();
        prop_assume!(cert != Certificate::NoCertificate);
        let set = fixed_points(&f, 1).unwrap();
        prop_assert!(set.points.iter().filter_map(|q| q.coordinate(Chart::North)).any(|z| rect.contains(z)));
        let located = locate_fixed_point(&chart_map, &rect).expect("a fixed point is located");
        prop_assert!(rect.contains(located.point) && located.residual < 1e-10);
        // shrinking or growing by 10% keeps the certificate
        for factor in [0.9, 1.1] {
            let other = rectangle_certificate(&chart_map, &rect.scaled(factor), 32).unwrap();
            prop_assert_eq!(other.index(), cert.index());
        }
    }
}
