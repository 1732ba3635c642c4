//! Fixed points of iterates, the growth of their number, and the
//! cross-check of the counting inequalities on maps satisfying the
//! hypotheses of the lower bound.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{rebalance, Dual, Mobius, Scalar, C64};
use crate::annuli::{check_hypothesis_h, decompose, theorem3_bound, AnnuliError, HypothesisCheck};
use crate::charts::{MapSpec, Pole, RadialProfile, SpherePoint};
use crate::format::format_sig;
use crate::product::{grid_roots, ProductIterate};
use crate::roots::{aberth, RootError};

/// Largest `dⁿ` solved algebraically.
pub const DEGREE_CAP: u64 = 4096;
/// Fixed points closer than this (chordal) are the same point.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Required chordal residual `d(fⁿ(p), p)` of every reported point.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Slack on the log scale when comparing the growth rate with `ln |d|`.
pub const RATE_TOLERANCE: f64 = 0.05;

const ROTATIONS: [(f64, f64); 4] = [(0.4, 0.3), (-0.35, 0.45), (0.6, -0.2), (-0.15, -0.55)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CensusError {
    #[error("degree {degree} exceeds the algebraic cap {DEGREE_CAP}")]
    DegreeCapExceeded { degree: u64 },
    #[error("iterate count must be positive")]
    ZeroIterate,
    #[error("fixed point {point:?} has residual {residual:e}")]
    ResidualTooLarge { point: SpherePoint, residual: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Distinct fixed points of `fⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<SpherePoint>,
    /// `fⁿ` fixes a whole curve; `points` then lists only isolated ones
    pub continuum: bool,
    pub max_residual: f64,
}

impl FixedPointSet {
    /// `None` for a continuum.
    pub fn count(&self) -> Option<usize> {
        (!self.continuum).then_some(self.points.len())
    }
}

fn residual(map: &MapSpec, n: u32, p: SpherePoint) -> f64 {
    let image = (0..n).fold(p, |q, _| map.evaluate(q));
    image.chordal_distance(&p)
}

fn dedup(points: Vec<SpherePoint>) -> Vec<SpherePoint> {
    let mut out: Vec<SpherePoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().all(|q| q.chordal_distance(&p) > DEDUP_RADIUS) {
            out.push(p.normalized());
        }
    }
    out.sort_by(|a, b| {
        let key = |p: &SpherePoint| match p.is_pole() {
            Some(Pole::North) => (1, 0.0, 0.0),
            _ => (0, p.z().re, p.z().im),
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
    });
    out
}

/// `x·B − y·A` for `(A, B) = gⁿ(x, y)` with `[x : y] = M[u : 1]`, as value
/// and derivative up to a common positive factor.
fn fixed_point_equation(base: &MapSpec, n: u32, m: &Mobius, u: C64) -> (C64, C64) {
    let (x, y) = m.apply(Dual::variable(u), Dual::constant(C64::new(1.0, 0.0)));
    let (mut a, mut b) = (x, y);
    for _ in 0..n {
        let (na, nb) = base.homogeneous_step(a, b);
        (a, b) = rebalance(na, nb);
    }
    let g = x * b - y * a;
    (g.v, g.d)
}

fn is_identically_zero(base: &MapSpec, n: u32) -> bool {
    let m = Mobius::identity();
    [
        C64::new(0.31, 0.17),
        C64::new(-0.62, 0.44),
        C64::new(0.05, -0.93),
    ]
    .iter()
    .all(|&u| {
        let (x, y) = (u, C64::new(1.0, 0.0));
        let (mut a, mut b) = (x, y);
        for _ in 0..n {
            let (na, nb) = base.homogeneous_step(a, b);
            (a, b) = rebalance(na, nb);
        }
        let scale = x.norm() * b.norm() + y.norm() * a.norm();
        fixed_point_equation(base, n, &m, u).0.norm() <= 1e-12 * scale
    })
}

/// Newton on the fixed-point equation in the chart where `p` is small.
fn polish_rational(base: &MapSpec, n: u32, map: &MapSpec, p: SpherePoint) -> SpherePoint {
    let (m, u0) = match p.coordinate(crate::charts::Chart::North) {
        Some(z) if z.norm() <= 1.0 => (Mobius::identity(), z),
        _ => (
            Mobius::swap(),
            p.coordinate(crate::charts::Chart::South).unwrap(),
        ),
    };
    let to_point = |u: C64| {
        let (x, y) = m.apply(u, C64::new(1.0, 0.0));
        SpherePoint::from_homogeneous(x, y)
    };
    let mut best = (p, residual(map, 1, p));
    let mut u = u0;
    for _ in 0..6 {
        let (g, dg) = fixed_point_equation(base, n, &m, u);
        if g == C64::new(0.0, 0.0) || dg == C64::new(0.0, 0.0) {
            break;
        }
        let next = u - g / dg;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        u = next;
        let q = to_point(u);
        let r = residual(map, 1, q);
        if r < best.1 {
            best = (q, r);
        } else {
            break;
        }
    }
    best.0
}

fn rational_fixed_points(map: &MapSpec, n: u32) -> Result<FixedPointSet, CensusError> {
    let (base, inner) = map.flatten();
    let total = inner * n;
    let degree = base.rational_degree().expect("rational map") as u64;
    let iterate_degree = degree
        .checked_pow(total)
        .filter(|&d| d <= DEGREE_CAP)
        .ok_or(CensusError::DegreeCapExceeded {
            degree: degree.saturating_pow(total),
        })?;
    let full = MapSpec::iterate(base.clone(), total).expect("positive count");
    if is_identically_zero(base, total) {
        return Ok(FixedPointSet {
            points: Vec::new(),
            continuum: true,
            max_residual: 0.0,
        });
    }
    let mut last_error: Option<CensusError> = None;
    for &(re, im) in &ROTATIONS {
        let m = Mobius::rotation(C64::new(re, im));
        let roots = match aberth(
            iterate_degree as usize + 1,
            |u| fixed_point_equation(base, total, &m, u),
            1.0,
        ) {
            Ok(r) => r,
            Err(e) => {
                last_error = Some(e.into());
                continue;
            }
        };
        let points: Vec<SpherePoint> = roots
            .into_iter()
            .map(|u| {
                let (x, y) = m.apply(u, C64::new(1.0, 0.0));
                let p = SpherePoint::from_homogeneous(x, y);
                polish_rational(base, total, &full, p)
            })
            .collect();
        let points = dedup(points);
        let (worst, max_residual) = points.iter().map(|&p| (p, residual(&full, 1, p))).fold(
            (SpherePoint::S, 0.0),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
        if max_residual > RESIDUAL_TOLERANCE {
            last_error = Some(CensusError::ResidualTooLarge {
                point: worst,
                residual: max_residual,
            });
            continue;
        }
        return Ok(FixedPointSet {
            points,
            continuum: false,
            max_residual,
        });
    }
    Err(last_error.expect("at least one rotation"))
}

/// Finite solutions of `qⁿ(s) = s`, or `None` when every `s` is one.
fn radial_fixed_points(p: &ProductIterate) -> Option<Vec<f64>> {
    if let RadialProfile::Affine { a, b } = p.radial {
        // qⁿ(s) = aⁿ s + b (1 + a + … + aⁿ⁻¹)
        let an = a.powi(p.n as i32);
        let bn = (0..p.n).fold(0.0, |acc, _| a * acc + b);
        if an == 1.0 {
            return if bn == 0.0 { None } else { Some(Vec::new()) };
        }
        return Some(vec![bn / (1.0 - an)]);
    }
    let candidates = grid_roots(|s| p.radial_image(s) - s);
    Some(
        candidates
            .into_iter()
            .filter(|&s| {
                let v = p.radial_image(s);
                v.is_finite() && (v - s).abs() <= 1e-8 * s.abs().max(1.0)
            })
            .collect(),
    )
}

fn product_fixed_points(map: &MapSpec, n: u32) -> FixedPointSet {
    let p = ProductIterate::with_extra_iterates(map, n).expect("product map");
    let full = MapSpec::iterate(map.clone(), n).expect("positive count");
    let mut points = Vec::new();
    if p.radial_image(f64::NEG_INFINITY) < 0.0 {
        points.push(SpherePoint::S);
    }
    if p.radial_image(f64::INFINITY) > 0.0 {
        points.push(SpherePoint::N);
    }
    let mut continuum = false;
    let big_d = p.angular_degree();
    match radial_fixed_points(&p) {
        None => continuum = true,
        Some(levels) => {
            for s in levels {
                let c = p.angle_offset(s);
                if big_d == 1.0 {
                    let r = c.rem_euclid(TAU);
                    if r.min(TAU - r) < 1e-12 {
                        continuum = true;
                    }
                    continue;
                }
                let k = big_d - 1.0;
                for j in 0..k.abs() as u64 {
                    let theta = (TAU * j as f64 - c) / k;
                    points.push(SpherePoint::from_log_polar(s, theta));
                }
            }
        }
    }
    let points = dedup(points);
    let max_residual = points
        .iter()
        .map(|&q| residual(&full, 1, q))
        .fold(0.0, f64::max);
    FixedPointSet {
        points,
        continuum,
        max_residual,
    }
}

/// All distinct solutions of `fⁿ(p) = p`.
pub fn fixed_points(map: &MapSpec, n: u32) -> Result<FixedPointSet, CensusError> {
    if n == 0 {
        return Err(CensusError::ZeroIterate);
    }
    if map.is_product() {
        return Ok(product_fixed_points(map, n));
    }
    rational_fixed_points(map, n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub n: u32,
    /// `None` for a continuum of fixed points
    pub count: Option<usize>,
    /// `ln(count) / n`, undefined for zero or infinite counts
    pub rate: Option<f64>,
    /// `|d|ⁿ`
    pub bound_dn: f64,
    /// `Σ |δᵢ − 1|` over repelling components of `fⁿ`, when decomposable
    pub theorem3_sum: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub map_id: String,
    pub degree: i64,
    pub rows: Vec<CensusRow>,
    pub has_rate_numerically: bool,
}

/// `Σ |δᵢ − 1|` over the repelling components of `fⁿ`.
pub fn theorem3_sum(map: &MapSpec, n: u32, seed: u64) -> Result<u64, AnnuliError> {
    let iterate = MapSpec::iterate(map.clone(), n).expect("positive count");
    let components = decompose(&iterate, seed)?;
    Ok(components
        .iter()
        .filter_map(|c| theorem3_bound(c).ok())
        .sum())
}

/// Census rows for `n = 1..=n_max`.
pub fn growth_report(map: &MapSpec, n_max: u32, seed: u64) -> Result<CensusReport, CensusError> {
    if n_max == 0 {
        return Err(CensusError::ZeroIterate);
    }
    let degree = map.declared_degree();
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let set = fixed_points(map, n)?;
            let count = set.count();
            let rate = count.filter(|&c| c > 0).map(|c| (c as f64).ln() / n as f64);
            Ok(CensusRow {
                n,
                count,
                rate,
                bound_dn: (degree.unsigned_abs() as f64).powi(n as i32),
                theorem3_sum: theorem3_sum(map, n, seed).ok(),
            })
        })
        .collect::<Result<Vec<_>, CensusError>>()?;
    // The limsup is read off the tail: the last row with a finite count.
    let tail = rows
        .iter()
        .rev()
        .find_map(|r| r.rate)
        .unwrap_or(f64::NEG_INFINITY);
    let target = (degree.unsigned_abs() as f64).ln() - RATE_TOLERANCE;
    Ok(CensusReport {
        map_id: map.to_string(),
        degree,
        has_rate_numerically: tail >= target,
        rows,
    })
}

impl CensusReport {
    /// `n,count,rate,bound_dn,theorem3_sum`, one row per `n`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["n", "count", "rate", "bound_dn", "theorem3_sum"])?;
        for row in &self.rows {
            out.write_record([
                row.n.to_string(),
                row.count.map_or("inf".into(), |c| c.to_string()),
                row.rate.map_or("na".into(), format_sig),
                format_sig(row.bound_dn),
                row.theorem3_sum.map_or("na".into(), |s| s.to_string()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Why a map does or does not meet the hypotheses of the lower bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Scope {
    InScope,
    /// an inessential loop around `center` has an essential image
    HypothesisFailed {
        center: SpherePoint,
        image_winding: i64,
    },
    /// the listed poles are not attracting fixed points
    AttractorHypothesisFails {
        poles: Vec<Pole>,
    },
    /// the probe could not be run
    Undetermined {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheckRow {
    pub n: u32,
    pub theorem3_sum: Option<u64>,
    pub count: Option<usize>,
    pub bound_dn: f64,
    /// `Σ |δᵢ − 1| ≤ #Fix(fⁿ)`
    pub sum_holds: Option<bool>,
    /// `|d|ⁿ ≤ #Fix(fⁿ)`
    pub bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub scope: Scope,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    /// Whether every row satisfies both inequalities.
    pub fn all_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.bound_holds && r.sum_holds != Some(false))
    }
}

/// Orbits of 20 seeded points near each frame pole; returns the poles that
/// fail to attract them.
pub fn non_attracting_poles(map: &MapSpec, seed: u64) -> Vec<Pole> {
    let south = map.frame_south();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failing = Vec::new();
    for pole in [Pole::South, Pole::North] {
        let target = match pole {
            Pole::South => SpherePoint::north(south),
            Pole::North => SpherePoint::N,
        };
        let attracts = (0..20).all(|_| {
            let r = 1e-2 * rng.random_range(0.5..1.0);
            let theta = rng.random_range(0.0..TAU);
            let offset = Complex64::from_polar(r, theta);
            let mut p = match pole {
                Pole::South => SpherePoint::north(south + offset),
                Pole::North => SpherePoint::south(offset),
            };
            for _ in 0..200 {
                p = map.evaluate(p);
            }
            p.chordal_distance(&target) < 1e-6
        });
        if !attracts {
            failing.push(pole);
        }
    }
    failing
}

/// Scope of the lower-bound hypotheses for `map`, and for each `n` the
/// inequalities `Σ|δᵢ − 1| ≤ #Fix(fⁿ)` and `|d|ⁿ ≤ #Fix(fⁿ)`.
pub fn theorem_a_crosscheck(
    map: &MapSpec,
    n_max: u32,
    seed: u64,
) -> Result<CrossCheckReport, CensusError> {
    let scope = match check_hypothesis_h(map) {
        Ok(HypothesisCheck::Fail(w)) => Scope::HypothesisFailed {
            center: w.center,
            image_winding: w.image_winding,
        },
        Ok(HypothesisCheck::Pass) => {
            let poles = non_attracting_poles(map, seed);
            if poles.is_empty() {
                Scope::InScope
            } else {
                Scope::AttractorHypothesisFails { poles }
            }
        }
        Err(e) => Scope::Undetermined {
            reason: e.to_string(),
        },
    };
    let report = growth_report(map, n_max, seed)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let count = r.count.map_or(f64::INFINITY, |c| c as f64);
            CrossCheckRow {
                n: r.n,
                theorem3_sum: r.theorem3_sum,
                count: r.count,
                bound_dn: r.bound_dn,
                sum_holds: r.theorem3_sum.map(|s| s as f64 <= count),
                bound_holds: r.bound_dn <= count,
            }
        })
        .collect();
    Ok(CrossCheckReport { scope, rows })
}
