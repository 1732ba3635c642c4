use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_census::{evaluate, parse_map, Chart, Complex64, MapSpec, SpherePoint};

fn rel_close(a: SpherePoint, b: SpherePoint, tol: f64) -> bool {
    match (a.is_pole(), b.is_pole()) {
        (Some(x), Some(y)) => x == y,
        (None, None) => {
            let (za, zb) = (
                a.to_chart(Chart::North).unwrap().value(),
                b.to_chart(Chart::North).unwrap().value(),
            );
            (za - zb).norm() <= tol * za.norm().max(1.0) || a.chordal_distance(&b) <= tol
        }
        _ => a.chordal_distance(&b) <= tol,
    }
}

#[test]
fn evaluation_examples() {
    let sq = parse_map("power:d=2").unwrap();
    assert_eq!(
        evaluate(&sq, SpherePoint::north(Complex64::new(2.0, 0.0))).z(),
        Complex64::new(4.0, 0.0)
    );
    assert_eq!(
        evaluate(&sq, SpherePoint::N).is_pole(),
        SpherePoint::N.is_pole()
    );
    let q = parse_map("quad:c=0.1+0i").unwrap();
    assert_eq!(
        evaluate(&q, SpherePoint::north(Complex64::new(0.0, 0.0))).z(),
        Complex64::new(0.1, 0.0)
    );
}

#[test]
fn chart_switch_examples() {
    let p = SpherePoint::north(Complex64::new(2.0, 0.0))
        .to_chart(Chart::South)
        .unwrap();
    assert_eq!(p.value(), Complex64::new(0.5, 0.0));
    let one = SpherePoint::north(Complex64::new(1.0, 0.0))
        .to_chart(Chart::South)
        .unwrap();
    assert_eq!(one.value(), Complex64::new(1.0, 0.0));
    assert!(SpherePoint::S.to_chart(Chart::South).is_err());
}

fn spec_strategy() -> impl Strategy<Value = MapSpec> {
    prop_oneof![
        (-3i32..=3)
            .prop_filter("nonzero", |d| *d != 0)
            .prop_map(MapSpec::power),
        (-0.5f64..0.5, -0.5f64..0.5).prop_map(|(a, b)| MapSpec::quadratic(Complex64::new(a, b))),
        Just(parse_map("rational:P=1,0,1;Q=0,2").unwrap()),
        Just(parse_map("product:q=affine(1.5,0.2);d=2;h=affine(0.1,0.3)").unwrap()),
        Just(parse_map("product:q=pwl(-3:-4,-2:-3,-1:inf,1:-inf,2:3,3:4);d=-2").unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chart_round_trip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        prop_assume!(Complex64::new(re, im).norm() > 1e-3);
        let p = SpherePoint::north(Complex64::new(re, im));
        let back = p.to_chart(Chart::South).unwrap().to_chart(Chart::North).unwrap();
        prop_assert!((back.value() - p.value()).norm() <= 1e-12 * p.value().norm());
    }

    #[test]
    fn spec_display_round_trips(f in spec_strategy()) {
        prop_assert_eq!(parse_map(&f.to_string()).unwrap(), f);
    }
}

#[test]
fn iterate_matches_repeated_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let maps = [
        "quad:c=0.1+0.1i",
        "power:d=-2",
        "product:q=affine(1.5,0.2);d=2;h=affine(0.1,0.3)",
    ];
    for spec in maps {
        let base = parse_map(spec).unwrap();
        let iter = MapSpec::iterate(base.clone(), 3).unwrap();
        for pole in [SpherePoint::N, SpherePoint::S] {
            let mut p = pole;
            for _ in 0..3 {
                p = evaluate(&base, p);
            }
            assert_eq!(evaluate(&iter, pole).is_pole(), p.is_pole(), "{spec}");
        }
        for _ in 0..1000 {
            let x = SpherePoint::from_log_polar(
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..TAU),
            );
            let mut p = x;
            for _ in 0..3 {
                p = evaluate(&base, p);
            }
            assert!(rel_close(evaluate(&iter, x), p, 1e-9), "{spec} at {x:?}");
        }
    }
}
