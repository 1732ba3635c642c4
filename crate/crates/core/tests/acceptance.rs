//! End-to-end acceptance criteria. Each criterion prints one line; the test
//! fails at the end if any line is FAIL.

use std::f64::consts::{LN_2, TAU};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use sphere_census::annuli::{check_hypothesis_h, decompose, theorem3_bound, HypothesisCheck};
use sphere_census::census::{fixed_points, growth_report};
use sphere_census::degree::{cactus_check, global_degree_sampled};
use sphere_census::gallery::{check_properties, CACTUS_MAP, COUNTEREXAMPLE};
use sphere_census::lefschetz::{planar_index, rectangle_certificate, AffineMap, Certificate, Rect};
use sphere_census::strip_lift::{lift, verify_index};
use sphere_census::winding::winding_number;
use sphere_census::{parse_map, Chart, Complex64, MapSpec, SpherePoint};

const SEED: u64 = 0;
const RATE_TOLERANCE: f64 = 0.05;
const PROJECTION_RESIDUAL: f64 = 1e-10;
/// Two roots closer than this are one root for the eigenvalue oracle.
const ORACLE_DEDUP: f64 = 1e-6;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn map(spec: &str) -> MapSpec {
    parse_map(spec).unwrap()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    check(elapsed < budget, || {
        format!("{detail}; took {elapsed:?} > {budget:?}")
    })?;
    Ok(format!(
        "{detail} [{:.3}s < {budget:?}]",
        elapsed.as_secs_f64()
    ))
}

/// Distinct roots of a monic polynomial via eigenvalues of its companion
/// matrix.
fn companion_distinct_roots(coeffs_low_to_high: &[f64]) -> Vec<Complex64> {
    let n = coeffs_low_to_high.len() - 1;
    let lead = coeffs_low_to_high[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs_low_to_high[i] / lead;
    }
    let mut roots: Vec<Complex64> = Vec::new();
    for ev in m.complex_eigenvalues().iter() {
        let z = Complex64::new(ev.re, ev.im);
        if roots.iter().all(|r| (r - z).norm() > ORACLE_DEDUP) {
            roots.push(z);
        }
    }
    roots
}

fn criterion_1() -> Outcome {
    within(Duration::from_secs(1), || {
        let f = map(COUNTEREXAMPLE);
        let report = growth_report(&f, 8, SEED).map_err(|e| e.to_string())?;
        for row in &report.rows {
            check(row.count == Some(2), || {
                format!("n={} count {:?}", row.n, row.count)
            })?;
        }
        // oracle: sⁿ ↦ s + n ln 2 has no finite fixed latitude, so the only
        // periodic points are the two poles
        let set = fixed_points(&f, 8).map_err(|e| e.to_string())?;
        check(set.points.iter().all(|p| p.is_pole().is_some()), || {
            "non-pole point".into()
        })?;
        check(!report.has_rate_numerically, || "has_rate true".into())?;
        Ok("count 2 for n=1..8, has_rate false".into())
    })
}

fn criterion_2() -> Outcome {
    within(Duration::from_secs(5), || {
        let report = growth_report(&map("power:d=2"), 8, SEED).map_err(|e| e.to_string())?;
        for row in &report.rows {
            // oracle: zᴺ − z with N = 2ⁿ, plus the fixed point at ∞
            let big_n = 1usize << row.n;
            let mut poly = vec![0.0; big_n + 1];
            poly[1] = -1.0;
            poly[big_n] = 1.0;
            let oracle = companion_distinct_roots(&poly).len() + 1;
            check(row.count == Some(oracle), || {
                format!("n={}: census {:?} vs oracle {oracle}", row.n, row.count)
            })?;
            check(oracle == big_n + 1, || {
                format!("n={}: oracle {oracle}", row.n)
            })?;
        }
        let rate = report
            .rows
            .last()
            .and_then(|r| r.rate)
            .ok_or("no final rate")?;
        check(rate >= LN_2 - RATE_TOLERANCE, || {
            format!("final rate {rate}")
        })?;
        check(report.has_rate_numerically, || "has_rate false".into())?;
        Ok(format!(
            "counts 2ⁿ+1 for n=1..8 match companion oracle, final rate {rate:.9}"
        ))
    })
}

fn criterion_3() -> Outcome {
    within(Duration::from_secs(2), || {
        let mut parts = Vec::new();
        for d in [2i64, 3, -1, -2] {
            let f = map(&format!("product:q=affine(2,0);d={d}"));
            let components = decompose(&f, SEED).map_err(|e| e.to_string())?;
            check(components.len() == 1, || {
                format!("d={d}: {} components", components.len())
            })?;
            let c = &components[0];
            check(c.repelling == Some(true), || {
                format!("d={d}: not repelling")
            })?;
            let bound = theorem3_bound(c).map_err(|e| e.to_string())? as usize;
            let set = fixed_points(&f, 1).map_err(|e| e.to_string())?;
            let inside: Vec<Complex64> = set
                .points
                .iter()
                .filter(|p| p.log_modulus().abs() <= 1.0)
                .map(|p| p.z())
                .collect();
            let k = (d - 1).unsigned_abs() as usize;
            check(bound == k, || format!("d={d}: bound {bound}"))?;
            check(inside.len() == k, || {
                format!("d={d}: {} inside", inside.len())
            })?;
            // oracle: the roots of unity of order |d − 1|
            for j in 0..k {
                let w = Complex64::from_polar(1.0, TAU * j as f64 / k as f64);
                check(inside.iter().any(|z| (z - w).norm() < 1e-9), || {
                    format!("d={d}: missing {w}")
                })?;
            }
            parts.push(format!("d={d}:{}≥{bound}", inside.len()));
        }
        Ok(parts.join(" "))
    })
}

fn criterion_4() -> Outcome {
    let unit = Rect::new(-1.0, 1.0, -1.0, 1.0);
    let cases = [
        (2.0, 2.0, Certificate::ExpandingCase, 1),
        (0.5, 0.5, Certificate::ContractingCase, 1),
        (0.5, 2.0, Certificate::SaddleCaseH, -1),
        (2.0, 0.5, Certificate::SaddleCaseV, -1),
    ];
    let mut parts = Vec::new();
    for (a, b, expected, index) in cases {
        let f = AffineMap::diagonal(a, b);
        let cert = rectangle_certificate(&f, &unit, 64).map_err(|e| e.to_string())?;
        let integrated =
            planar_index(&f, &unit.boundary(64, Chart::North)).map_err(|e| e.to_string())?;
        // oracle: sign of det(A − I)
        let sign = ((a - 1.0) * (b - 1.0)).signum() as i64;
        check(cert == expected, || format!("diag({a},{b}): {cert:?}"))?;
        check(cert.index() == Some(index), || {
            format!("diag({a},{b}): certified {:?}", cert.index())
        })?;
        check(integrated == index && sign == index, || {
            format!("diag({a},{b}): integrator {integrated}, det sign {sign}")
        })?;
        parts.push(format!("{expected:?}:{index:+}"));
    }
    Ok(parts.join(" "))
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    for (d, expected) in [(2, 1), (-1, -1), (0, -1)] {
        let f = map(&format!("product:q=affine(2,0);d={d}"));
        let c = decompose(&f, SEED).map_err(|e| e.to_string())?.remove(0);
        let strip = lift(&f, &c, 0).map_err(|e| e.to_string())?;
        let r = verify_index(&strip).map_err(|e| format!("d={d}: {e}"))?;
        check(r.index == expected, || format!("d={d}: index {}", r.index))?;
        let fp = r.fixed_point.ok_or(format!("d={d}: no fixed point"))?;
        // oracle: evaluate f directly at the projection
        let p = fp.projection;
        let residual = f.evaluate(p).chordal_distance(&p);
        check(residual < PROJECTION_RESIDUAL, || {
            format!("d={d}: residual {residual:e}")
        })?;
        parts.push(format!("d={d}:{:+} (res {residual:.1e})", r.index));
    }
    Ok(parts.join(" "))
}

fn criterion_6() -> Outcome {
    let f = map(CACTUS_MAP);
    let components = decompose(&f, SEED).map_err(|e| e.to_string())?;
    check(components.len() == 3, || {
        format!("{} components", components.len())
    })?;
    let report = cactus_check(&f, &components, SEED).map_err(|e| e.to_string())?;
    let declared = f.declared_degree();
    // oracle: the global degree from an independent regular value
    let global = global_degree_sampled(&f, 7)
        .map_err(|e| e.to_string())?
        .global;
    check(report.sum == declared && global == declared, || {
        format!("Σdᵢ {} declared {declared} global {global}", report.sum)
    })?;
    for row in &report.rows {
        check(row.delta.abs() == row.d_i.abs(), || format!("{row:?}"))?;
    }
    let pairs: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("({},{})", r.d_i, r.delta))
        .collect();
    Ok(format!("Σdᵢ = {declared}; (dᵢ,δᵢ) {}", pairs.join(" ")))
}

fn criterion_7() -> Outcome {
    for d in 2..=5 {
        let r = check_hypothesis_h(&map(&format!("power:d={d}"))).map_err(|e| e.to_string())?;
        check(r.passed(), || format!("power:d={d} fails"))?;
    }
    let mut windings = Vec::new();
    for c in ["0.1+0i", "0.2+0i", "0.1+0.1i"] {
        let f = map(&format!("quad:c={c}"));
        let HypothesisCheck::Fail(w) = check_hypothesis_h(&f).map_err(|e| e.to_string())? else {
            return Err(format!("quad:c={c} passes"));
        };
        // oracle: push the witness through f and wind it about S again
        let owned = f.clone();
        let image = w
            .curve
            .map(Chart::North, move |z| {
                owned.evaluate(SpherePoint::north(z)).z()
            })
            .map_err(|e| e.to_string())?;
        let again = winding_number(&image, f.frame_south()).map_err(|e| e.to_string())?;
        let around = winding_number(&w.curve, f.frame_south()).map_err(|e| e.to_string())?;
        check(w.image_winding != 0 && again == w.image_winding, || {
            format!("c={c}: reported {} recomputed {again}", w.image_winding)
        })?;
        check(around == 0, || format!("c={c}: witness loop essential"))?;
        windings.push(again);
    }
    Ok(format!(
        "powers 2..5 pass; quadratic witnesses wind {windings:?}"
    ))
}

fn criterion_8() -> Outcome {
    let c = check_properties(SEED);
    if c.pass {
        Ok(c.detail)
    } else {
        Err(c.detail)
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        (1, "counterexample reproduction", criterion_1),
        (2, "rate reproduction for z²", criterion_2),
        (3, "|d−1| lower bound", criterion_3),
        (4, "rectangle index certificates", criterion_4),
        (5, "strip-lift indices", criterion_5),
        (6, "cactus identities", criterion_6),
        (7, "hypothesis discrimination", criterion_7),
        (8, "property suites", criterion_8),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {id} PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {id} FAIL {name}: {detail}");
            }
        }
    }
    // informational: the literal affine(2,0) radial profile is s ↦ 2s, i.e.
    // (r, θ) ↦ (r², 2θ), which is z² and has the rate
    let literal = growth_report(&map("product:q=affine(2,0);d=2"), 8, SEED).unwrap();
    let counts: Vec<String> = literal
        .rows
        .iter()
        .map(|r| r.count.map_or("inf".into(), |c| c.to_string()))
        .collect();
    println!(
        "info: product:q=affine(2,0);d=2 counts {} has_rate {}",
        counts.join(","),
        literal.has_rate_numerically
    );
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
