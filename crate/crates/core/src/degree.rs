//! Local degrees, global degree as a sum over preimages, annular degree of an
//! essential circle, and the cactus identities relating the two.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::annuli::AnnulusComponent;
use crate::charts::{Chart, MapSpec, SpherePoint};
use crate::product::ProductIterate;
use crate::roots::{polynomial_roots, RootError};
use crate::winding::{winding_number, SampledCurve, WindingError};

/// Preimages closer than this (chordal) are merged.
pub const PREIMAGE_DEDUP: f64 = 1e-7;
/// Largest local-degree circle radius, in chart coordinates.
pub const MAX_LOCAL_RADIUS: f64 = 0.05;
/// Candidate regular values tried before giving up.
pub const REGULAR_VALUE_ATTEMPTS: usize = 32;
/// Closest an annular image may come to a pole.
pub const POLE_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DegreeError {
    #[error("image of the local circle passes through the value (radius {radius})")]
    RadiusTooLarge { radius: f64 },
    #[error("point is not a preimage of the value (chordal miss {miss:e})")]
    NotAPreimage { miss: f64 },
    #[error("preimages are only {separation:e} apart")]
    PreimageClusterTooTight { separation: f64 },
    #[error("value has a non-isolated preimage set")]
    NonIsolatedPreimages,
    #[error("local degrees sum to {found}, declared degree is {declared}")]
    DegreeMismatch { declared: i64, found: i64 },
    #[error("no regular value found after {0} attempts")]
    NoRegularValue(usize),
    #[error("image of the core circle comes within {distance:e} of a pole")]
    ImageHitsPole { distance: f64 },
    #[error("core circle is not essential")]
    InessentialCore,
    #[error(transparent)]
    Winding(#[from] WindingError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// A preimage of the regular value with its local degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: SpherePoint,
    pub local_degree: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub global: i64,
    pub witnesses: Vec<Witness>,
    pub regular_value: SpherePoint,
}

/// The chart in which `p` has modulus at most one.
fn home_chart(p: SpherePoint) -> Chart {
    match p.coordinate(Chart::North) {
        Some(z) if z.norm() <= 1.0 => Chart::North,
        _ => Chart::South,
    }
}

/// Winding of the image of the radius-`radius` circle about `x` around `y`,
/// each read in the chart where it has modulus at most one.
pub fn local_degree(
    map: &MapSpec,
    x: SpherePoint,
    y: SpherePoint,
    radius: f64,
) -> Result<i64, DegreeError> {
    let miss = map.evaluate(x).chordal_distance(&y);
    if miss > 1e-9 {
        return Err(DegreeError::NotAPreimage { miss });
    }
    let (cx, cy) = (home_chart(x), home_chart(y));
    let center = x.coordinate(cx).expect("home chart is finite");
    let target = y.coordinate(cy).expect("home chart is finite");
    let circle = SampledCurve::circle(center, radius, 64, cx);
    let owned = map.clone();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let image = circle.map(cy, move |z| {
        owned
            .evaluate(SpherePoint::new(z, cx))
            .coordinate(cy)
            .unwrap_or(nan)
    })?;
    match winding_number(&image, target) {
        Ok(k) => Ok(k),
        Err(WindingError::PointOnCurve { .. }) | Err(WindingError::NonFiniteSample) => {
            Err(DegreeError::RadiusTooLarge { radius })
        }
        Err(e) => Err(e.into()),
    }
}

fn push_unique(points: &mut Vec<SpherePoint>, p: SpherePoint) {
    if points
        .iter()
        .all(|q| q.chordal_distance(&p) > PREIMAGE_DEDUP)
    {
        points.push(p.normalized());
    }
}

/// Solutions of `g(x) = y` for one step of a rational map.
fn rational_step_preimages(
    base: &MapSpec,
    y: SpherePoint,
) -> Result<Vec<SpherePoint>, DegreeError> {
    let (p, q) = base.rational_coefficients().expect("rational map");
    let (a, b) = y.homogeneous();
    let coefficients: Vec<Complex64> = p.iter().zip(&q).map(|(&pk, &qk)| b * pk - a * qk).collect();
    let roots = polynomial_roots(&coefficients)?;
    let mut out = Vec::new();
    for r in roots.finite {
        push_unique(&mut out, SpherePoint::north(r));
    }
    if roots.at_infinity > 0 {
        push_unique(&mut out, SpherePoint::N);
    }
    Ok(out)
}

fn product_preimages(p: &ProductIterate, y: SpherePoint) -> Result<Vec<SpherePoint>, DegreeError> {
    if y.is_pole().is_some() {
        if !p.pole_latitudes().is_empty() {
            return Err(DegreeError::NonIsolatedPreimages);
        }
        let mut out = Vec::new();
        for end in [SpherePoint::S, SpherePoint::N] {
            let s = if end == SpherePoint::S {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            let image = p.radial_image(s);
            if SpherePoint::from_log_polar(image, 0.0).is_pole() == y.is_pole() {
                out.push(end);
            }
        }
        return Ok(out);
    }
    let (sy, ty) = (y.log_modulus(), y.argument());
    let big_d = p.angular_degree();
    let mut out = Vec::new();
    for s in p.level_set(sy) {
        let base = ty - p.angle_offset(s);
        if big_d == 0.0 {
            let r = base.rem_euclid(TAU);
            if r.min(TAU - r) < 1e-9 {
                return Err(DegreeError::NonIsolatedPreimages);
            }
            continue;
        }
        let count = big_d.abs() as u64;
        for j in 0..count {
            let theta = (base + TAU * j as f64) / big_d;
            push_unique(&mut out, SpherePoint::from_log_polar(s, theta));
        }
    }
    Ok(out)
}

/// All preimages of `y`, deduplicated.
pub fn preimages(map: &MapSpec, y: SpherePoint) -> Result<Vec<SpherePoint>, DegreeError> {
    if let Some(p) = ProductIterate::from_map(map) {
        return product_preimages(&p, y);
    }
    let (base, n) = map.flatten();
    let mut targets = vec![y];
    for _ in 0..n {
        let mut next = Vec::new();
        for &t in &targets {
            for x in rational_step_preimages(base, t)? {
                push_unique(&mut next, x);
            }
        }
        targets = next;
    }
    Ok(targets)
}

fn min_separation(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(a.chordal_distance(b));
        }
    }
    best
}

/// Chordal distance from `points` to the preimages of the pole at infinity
/// of `y`'s home chart. A probe circle enclosing one of those would pick up
/// a pole of the chart expression of `f` and cancel the winding.
fn chart_pole_clearance(
    map: &MapSpec,
    y: SpherePoint,
    points: &[SpherePoint],
) -> Result<f64, DegreeError> {
    let far = match home_chart(y) {
        Chart::North => SpherePoint::N,
        Chart::South => SpherePoint::S,
    };
    let nearest = |q: &SpherePoint| {
        points
            .iter()
            .map(|p| p.chordal_distance(q))
            .fold(f64::INFINITY, f64::min)
    };
    match preimages(map, far) {
        Ok(poles) => Ok(poles.iter().map(nearest).fold(f64::INFINITY, f64::min)),
        Err(DegreeError::NonIsolatedPreimages) => {
            // whole latitude circles; the nearest point shares the angle
            let product = ProductIterate::from_map(map).expect("only products have pole circles");
            let mut best = f64::INFINITY;
            for p in points {
                for s in product.pole_latitudes() {
                    let q = SpherePoint::from_log_polar(s, p.argument());
                    best = best.min(p.chordal_distance(&q));
                }
            }
            Ok(best)
        }
        Err(e) => Err(e),
    }
}

/// Local-degree sum over the preimages of `y`, checked against the declared
/// degree.
pub fn global_degree(map: &MapSpec, y: SpherePoint) -> Result<DegreeReport, DegreeError> {
    let points = preimages(map, y)?;
    let separation = min_separation(&points);
    if separation < 1e-6 {
        return Err(DegreeError::PreimageClusterTooTight { separation });
    }
    // chordal ≤ 2 × chart distance, so a chart circle of radius below a
    // twentieth of a chordal gap cannot reach across it
    let clearance = chart_pole_clearance(map, y, &points)?;
    let radius = MAX_LOCAL_RADIUS
        .min(separation / 20.0)
        .min(clearance / 20.0);
    let mut witnesses = Vec::with_capacity(points.len());
    for point in points {
        let local = local_degree(map, point, y, radius)?;
        witnesses.push(Witness {
            point,
            local_degree: local,
        });
    }
    let global = witnesses.iter().map(|w| w.local_degree).sum();
    let declared = map.declared_degree();
    if global != declared {
        return Err(DegreeError::DegreeMismatch {
            declared,
            found: global,
        });
    }
    Ok(DegreeReport {
        global,
        witnesses,
        regular_value: y,
    })
}

/// Deterministic stream of candidate regular values `e^{s + iθ}` with
/// `s ∈ [−1, 1]`.
pub struct RegularValues {
    rng: ChaCha8Rng,
}

impl RegularValues {
    pub fn new(seed: u64) -> Self {
        RegularValues {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Iterator for RegularValues {
    type Item = SpherePoint;
    fn next(&mut self) -> Option<SpherePoint> {
        let s = self.rng.random_range(-1.0..1.0);
        let theta = self.rng.random_range(0.0..TAU);
        Some(SpherePoint::from_log_polar(s, theta))
    }
}

fn retryable(e: &DegreeError) -> bool {
    matches!(
        e,
        DegreeError::PreimageClusterTooTight { .. }
            | DegreeError::NonIsolatedPreimages
            | DegreeError::RadiusTooLarge { .. }
            | DegreeError::Winding(_)
    )
}

/// [`global_degree`] at the first usable value of the seeded stream.
pub fn global_degree_sampled(map: &MapSpec, seed: u64) -> Result<DegreeReport, DegreeError> {
    for y in RegularValues::new(seed).take(REGULAR_VALUE_ATTEMPTS) {
        match global_degree(map, y) {
            Err(e) if retryable(&e) => continue,
            other => return other,
        }
    }
    Err(DegreeError::NoRegularValue(REGULAR_VALUE_ATTEMPTS))
}

/// Winding of `f ∘ core` about the frame's `S` coordinate in the North chart.
pub fn annular_degree(map: &MapSpec, core: &SampledCurve) -> Result<i64, DegreeError> {
    let south = map.frame_south();
    let core = core.to_chart(Chart::North)?;
    if winding_number(&core, south)? == 0 {
        return Err(DegreeError::InessentialCore);
    }
    let s_point = SpherePoint::north(south);
    for &z in core.points() {
        let w = map.evaluate(SpherePoint::north(z));
        let distance = w
            .chordal_distance(&s_point)
            .min(w.chordal_distance(&SpherePoint::N));
        if distance < POLE_MARGIN {
            return Err(DegreeError::ImageHitsPole { distance });
        }
    }
    let owned = map.clone();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let image = core.map(Chart::North, move |z| {
        owned
            .evaluate(SpherePoint::north(z))
            .coordinate(Chart::North)
            .unwrap_or(nan)
    })?;
    match winding_number(&image, south) {
        Err(WindingError::PointOnCurve { distance }) => {
            Err(DegreeError::ImageHitsPole { distance })
        }
        Err(WindingError::NonFiniteSample) => Err(DegreeError::ImageHitsPole { distance: 0.0 }),
        other => Ok(other?),
    }
}

/// Which latitude band `(lower, upper)` of `bands` contains `p`.
fn band_of(p: SpherePoint, south: Complex64, bands: &[(f64, f64)]) -> Option<usize> {
    let s = match p.coordinate(Chart::North) {
        Some(z) => (z - south).norm().ln(),
        None => f64::INFINITY,
    };
    bands.iter().position(|&(lo, hi)| s > lo && s < hi)
}

/// Sphere-component degrees `dᵢ`: local-degree sums over the preimages of a
/// regular value that fall in each latitude band.
pub fn component_degrees(
    map: &MapSpec,
    bands: &[(f64, f64)],
    seed: u64,
) -> Result<Vec<i64>, DegreeError> {
    let report = global_degree_sampled(map, seed)?;
    let south = map.frame_south();
    let mut out = vec![0; bands.len()];
    for w in &report.witnesses {
        if let Some(i) = band_of(w.point, south, bands) {
            out[i] += w.local_degree;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CactusRow {
    pub d_i: i64,
    pub delta: i64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CactusReport {
    pub rows: Vec<CactusRow>,
    pub sum: i64,
    pub declared: i64,
    pub pass: bool,
}

/// Check `Σ dᵢ = deg f` and `|δᵢ| = |dᵢ|` over a decomposition, with `dᵢ`
/// recomputed from a fresh regular value.
pub fn cactus_check(
    map: &MapSpec,
    components: &[AnnulusComponent],
    seed: u64,
) -> Result<CactusReport, DegreeError> {
    let bands: Vec<(f64, f64)> = components.iter().map(|c| c.band).collect();
    let degrees = component_degrees(map, &bands, seed)?;
    let rows: Vec<CactusRow> = components
        .iter()
        .zip(degrees)
        .map(|(c, d_i)| CactusRow {
            d_i,
            delta: c.delta,
            matches: d_i.abs() == c.delta.abs(),
        })
        .collect();
    let sum = rows.iter().map(|r| r.d_i).sum();
    let declared = map.declared_degree();
    let pass = sum == declared && rows.iter().all(|r| r.matches);
    Ok(CactusReport {
        rows,
        sum,
        declared,
        pass,
    })
}
