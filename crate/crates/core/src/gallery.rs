//! Built-in maps and the end-to-end checks run over them by the `gallery`
//! command.

use std::f64::consts::{LN_2, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annuli::{check_hypothesis_h, decompose, theorem3_bound, HypothesisCheck};
use crate::census::{fixed_points, growth_report};
use crate::charts::{parse_map, Chart, MapSpec};
use crate::degree::{cactus_check, global_degree_sampled};
use crate::lefschetz::{rectangle_certificate, AffineMap, Certificate, ChartMap, Rect};
use crate::strip_lift::{lift, verify_index};
use crate::winding::{winding_number, SampledCurve};

/// `(s, θ) ↦ (s + ln 2, 2θ)`: exactly two periodic points.
pub const COUNTEREXAMPLE: &str = "product:q=dilation(2);d=2";
/// Product map whose radial profile crosses the pole levels three times.
pub const CACTUS_MAP: &str = "product:q=pwl(-3:-4,-2:-3,-1:inf,1:-inf,2:3,3:4);d=2";

/// Named built-in maps.
pub const GALLERY: &[(&str, &str)] = &[
    ("square", "power:d=2"),
    ("cube", "power:d=3"),
    ("inverse-square", "power:d=-2"),
    ("inversion", "rational:P=1;Q=0,1"),
    ("quadratic-0.1", "quad:c=0.1+0i"),
    ("quadratic-0.2", "quad:c=0.2+0i"),
    ("quadratic-0.1+0.1i", "quad:c=0.1+0.1i"),
    ("counterexample", COUNTEREXAMPLE),
    ("radial-doubling-2", "product:q=affine(2,0);d=2"),
    ("radial-doubling-3", "product:q=affine(2,0);d=3"),
    ("radial-doubling-neg1", "product:q=affine(2,0);d=-1"),
    ("radial-doubling-neg2", "product:q=affine(2,0);d=-2"),
    ("radial-doubling-0", "product:q=affine(2,0);d=0"),
    ("radial-halving", "product:q=affine(0.5,0);d=2"),
    ("twisted", "product:q=affine(2,0);d=2;h=affine(0.3,0.1)"),
    ("cactus", CACTUS_MAP),
    ("square-twice", "iter:n=2(power:d=2)"),
];

pub fn gallery_maps() -> Vec<(&'static str, MapSpec)> {
    GALLERY
        .iter()
        .map(|&(name, spec)| (name, parse_map(spec).expect("gallery specs parse")))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

fn timed<F>(id: u32, name: &'static str, budget: Option<Duration>, f: F) -> CheckResult
where
    F: FnOnce() -> Result<String, String>,
{
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(limit) = budget {
        if elapsed > limit {
            pass = false;
            detail = format!("{detail}; over time budget {limit:?}");
        }
    }
    CheckResult {
        id,
        name,
        pass,
        detail,
        seconds: elapsed.as_secs_f64(),
    }
}

fn map(spec: &str) -> Result<MapSpec, String> {
    parse_map(spec).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn check_counterexample(seed: u64) -> CheckResult {
    timed(
        1,
        "counterexample has two periodic points",
        Some(Duration::from_secs(1)),
        || {
            let f = map(COUNTEREXAMPLE)?;
            let report = growth_report(&f, 8, seed).map_err(|e| e.to_string())?;
            let counts: Vec<Option<usize>> = report.rows.iter().map(|r| r.count).collect();
            ensure(counts.iter().all(|&c| c == Some(2)), || {
                format!("counts {counts:?}")
            })?;
            ensure(!report.has_rate_numerically, || "rate reported".into())?;
            Ok("count 2 for n = 1..8, no rate".into())
        },
    )
}

pub fn check_power_rate(seed: u64) -> CheckResult {
    timed(2, "z² has the rate", Some(Duration::from_secs(5)), || {
        let report = growth_report(&map("power:d=2")?, 8, seed).map_err(|e| e.to_string())?;
        for row in &report.rows {
            let expected = (1usize << row.n) + 1;
            ensure(row.count == Some(expected), || {
                format!("n={}: count {:?}, expected {expected}", row.n, row.count)
            })?;
        }
        let last = report.rows.last().and_then(|r| r.rate).unwrap_or(f64::NAN);
        ensure(last >= LN_2 - 0.05, || format!("final rate {last}"))?;
        Ok(format!("counts 2ⁿ+1 for n = 1..8, final rate {last:.6}"))
    })
}

pub fn check_repelling_bound(seed: u64) -> CheckResult {
    timed(
        3,
        "repelling annuli carry |d−1| fixed points",
        Some(Duration::from_secs(2)),
        || {
            let mut parts = Vec::new();
            for d in [2i64, 3, -1, -2] {
                let f = map(&format!("product:q=affine(2,0);d={d}"))?;
                let components = decompose(&f, seed).map_err(|e| e.to_string())?;
                ensure(components.len() == 1, || {
                    format!("d={d}: {} components", components.len())
                })?;
                let c = &components[0];
                ensure((c.lower_s, c.upper_s) == (-1.0, 1.0), || {
                    format!("d={d}: window")
                })?;
                let bound = theorem3_bound(c).map_err(|e| format!("d={d}: {e}"))?;
                let set = fixed_points(&f, 1).map_err(|e| e.to_string())?;
                let inside = set.points.iter().filter(|&&p| c.window_contains(p)).count();
                let expected = (d - 1).unsigned_abs() as usize;
                ensure(bound as usize == expected, || {
                    format!("d={d}: bound {bound}")
                })?;
                ensure(inside == expected, || {
                    format!("d={d}: {inside} fixed points inside")
                })?;
                parts.push(format!("d={d}:{inside}"));
            }
            Ok(parts.join(" "))
        },
    )
}

pub fn check_rectangle_certificates() -> CheckResult {
    timed(4, "rectangle certificates", None, || {
        let unit = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let cases = [
            (AffineMap::diagonal(2.0, 2.0), Certificate::ExpandingCase),
            (AffineMap::diagonal(0.5, 0.5), Certificate::ContractingCase),
            (AffineMap::diagonal(0.5, 2.0), Certificate::SaddleCaseH),
            (AffineMap::diagonal(2.0, 0.5), Certificate::SaddleCaseV),
        ];
        for (f, expected) in cases {
            let got = rectangle_certificate(&f, &unit, 64).map_err(|e| e.to_string())?;
            ensure(got == expected, || format!("{f:?}: {got:?}"))?;
        }
        Ok("expanding +1, contracting +1, saddles −1".into())
    })
}

pub fn check_strip_indices(seed: u64) -> CheckResult {
    timed(5, "strip-lift indices", None, || {
        let mut parts = Vec::new();
        for (d, expected) in [(2, 1), (-1, -1), (0, -1)] {
            let f = map(&format!("product:q=affine(2,0);d={d}"))?;
            let component = decompose(&f, seed).map_err(|e| e.to_string())?.remove(0);
            let strip = lift(&f, &component, 0).map_err(|e| e.to_string())?;
            let r = verify_index(&strip).map_err(|e| format!("d={d}: {e}"))?;
            ensure(r.index == expected, || format!("d={d}: index {}", r.index))?;
            let fp = r.fixed_point.ok_or(format!("d={d}: no lift fixed point"))?;
            ensure(fp.residual < 1e-10, || {
                format!("d={d}: residual {:e}", fp.residual)
            })?;
            parts.push(format!("d={d}:{:+}", r.index));
        }
        Ok(parts.join(" "))
    })
}

pub fn check_cactus(seed: u64) -> CheckResult {
    timed(6, "cactus identities", None, || {
        let f = map(CACTUS_MAP)?;
        let components = decompose(&f, seed).map_err(|e| e.to_string())?;
        ensure(components.len() == 3, || {
            format!("{} components", components.len())
        })?;
        let report = cactus_check(&f, &components, seed).map_err(|e| e.to_string())?;
        ensure(report.pass, || format!("{report:?}"))?;
        let pairs: Vec<String> = report
            .rows
            .iter()
            .map(|r| format!("({},{})", r.d_i, r.delta))
            .collect();
        Ok(format!(
            "Σdᵢ = {} = deg; (dᵢ,δᵢ) = {}",
            report.sum,
            pairs.join(" ")
        ))
    })
}

pub fn check_hypothesis() -> CheckResult {
    timed(7, "hypothesis probe discriminates", None, || {
        for d in 2..=5 {
            let r =
                check_hypothesis_h(&map(&format!("power:d={d}"))?).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("power:d={d} failed"))?;
        }
        let mut windings = Vec::new();
        for c in ["0.1+0i", "0.2+0i", "0.1+0.1i"] {
            match check_hypothesis_h(&map(&format!("quad:c={c}"))?).map_err(|e| e.to_string())? {
                HypothesisCheck::Fail(w) => {
                    ensure(w.image_winding != 0 && w.loop_winding == 0, || {
                        format!("c={c}")
                    })?;
                    windings.push(w.image_winding);
                }
                HypothesisCheck::Pass => return Err(format!("quad:c={c} passed")),
            }
        }
        Ok(format!(
            "powers pass; quadratic witnesses wind {windings:?}"
        ))
    })
}

/// Random circle through a common basepoint, for additivity trials.
fn random_circle(rng: &mut ChaCha8Rng, base: Complex64) -> SampledCurve {
    let radius = rng.random_range(0.2..2.0);
    let phase = rng.random_range(0.0..TAU);
    let center = base - Complex64::from_polar(radius, phase);
    let turns = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    SampledCurve::from_path(48, Chart::North, move |t| {
        center + Complex64::from_polar(radius, phase + turns * TAU * t)
    })
    .expect("circle")
}

/// Distance from `p` to the closed polyline through `points`.
fn polyline_distance(points: &[Complex64], p: Complex64) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            let ab = b - a;
            let t = (((p - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
            (a + ab * t - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn winding_properties(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut additivity = 0;
    while additivity < 100 {
        let base = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (a, b) = (random_circle(&mut rng, base), random_circle(&mut rng, base));
        let p = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (Ok(wa), Ok(wb)) = (winding_number(&a, p), winding_number(&b, p)) else {
            continue;
        };
        let joined = a.concat(&b).map_err(|e| e.to_string())?;
        let w = winding_number(&joined, p).map_err(|e| e.to_string())?;
        ensure(w == wa + wb, || format!("additivity: {w} != {wa} + {wb}"))?;
        additivity += 1;
    }
    let mut perturbation = 0;
    while perturbation < 100 {
        let base = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        // a bare polyline, so that the curve is exactly what gets jittered
        let circle = random_circle(&mut rng, base);
        let curve = SampledCurve::from_points(circle.points().to_vec(), Chart::North)
            .map_err(|e| e.to_string())?;
        let p = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let distance = polyline_distance(curve.points(), p);
        if distance < 1e-6 {
            continue;
        }
        let w = winding_number(&curve, p).map_err(|e| e.to_string())?;
        let jittered: Vec<Complex64> = curve
            .points()
            .iter()
            .map(|z| {
                z + Complex64::from_polar(
                    0.0099 * distance * rng.random::<f64>(),
                    rng.random_range(0.0..TAU),
                )
            })
            .collect();
        let moved = SampledCurve::from_points(jittered, Chart::North).map_err(|e| e.to_string())?;
        let w2 = winding_number(&moved, p).map_err(|e| e.to_string())?;
        ensure(w == w2, || format!("perturbation: {w} -> {w2}"))?;
        perturbation += 1;
    }
    Ok("winding 100+100".into())
}

/// `p + λ(z − p) + μ(z − p)²` as a rational spec.
pub fn local_model(p: Complex64, lambda: f64, mu: Complex64) -> MapSpec {
    let one = Complex64::new(1.0, 0.0);
    let c0 = p - lambda * p + mu * p * p;
    let c1 = lambda - 2.0 * mu * p;
    MapSpec::rational(vec![c0, c1 * one, mu], vec![one]).expect("valid polynomial")
}

fn lefschetz_property(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1EF5);
    let mut certified = 0;
    let mut attempts = 0;
    while certified < 50 {
        attempts += 1;
        if attempts > 2000 {
            return Err(format!("only {certified} certified rectangles"));
        }
        let p = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let lambda = if rng.random_bool(0.5) {
            rng.random_range(1.5..3.0)
        } else {
            rng.random_range(0.1..0.6)
        };
        let mu = Complex64::from_polar(rng.random_range(0.0..0.3), rng.random_range(0.0..TAU));
        let half = rng.random_range(0.05..0.2);
        let shift = Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)) * half;
        let rect = Rect::square(p + shift, half);
        let f = local_model(p, lambda, mu);
        let chart_map = ChartMap::new(f.clone(), Chart::North);
        let case = rectangle_certificate(&chart_map, &rect, 32).map_err(|e| e.to_string())?;
        if case == Certificate::NoCertificate {
            continue;
        }
        certified += 1;
        let set = fixed_points(&f, 1).map_err(|e| e.to_string())?;
        let inside = set
            .points
            .iter()
            .filter_map(|q| q.coordinate(Chart::North))
            .any(|z| rect.contains(z));
        ensure(inside, || {
            format!("no fixed point in certified {rect} for {f}")
        })?;
    }
    Ok(format!("Lefschetz {certified}/{attempts}"))
}

fn degree_independence(seeds: (u64, u64)) -> Result<String, String> {
    for (name, f) in gallery_maps() {
        let a = global_degree_sampled(&f, seeds.0).map_err(|e| format!("{name}: {e}"))?;
        let b = global_degree_sampled(&f, seeds.1).map_err(|e| format!("{name}: {e}"))?;
        ensure(a.global == b.global, || {
            format!("{name}: {} vs {}", a.global, b.global)
        })?;
    }
    Ok(format!("degree {} maps", GALLERY.len()))
}

pub fn check_properties(seed: u64) -> CheckResult {
    timed(8, "property suites", None, || {
        let parts = [
            winding_properties(seed)?,
            lefschetz_property(seed)?,
            degree_independence((seed.wrapping_add(1), seed.wrapping_add(2)))?,
        ];
        Ok(parts.join("; "))
    })
}

/// Every check, in order.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check_counterexample(seed),
        check_power_rate(seed),
        check_repelling_bound(seed),
        check_rectangle_certificates(),
        check_strip_indices(seed),
        check_cactus(seed),
        check_hypothesis(),
        check_properties(seed),
    ]
}
