//! Structure of `f⁻¹({N, S})`: pole preimages and their types, the
//! decomposition of `f⁻¹(A)` into annuli, repelling windows, the `|δ − 1|`
//! fixed-point bound, and a probe for the hypothesis that trivial loops of
//! `f⁻¹(A)` have trivial images.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{Chart, MapSpec, Pole, SpherePoint};
use crate::degree::{annular_degree, component_degrees, preimages, DegreeError};
use crate::product::ProductIterate;
use crate::winding::{winding_number, SampledCurve, WindingError};

/// Strictness margin of the repelling test, in log-latitude.
pub const REPELLING_MARGIN: f64 = 1e-9;
/// Distance by which windows stay clear of a circle of pole preimages.
pub const WINDOW_INSET: f64 = 1e-3;
/// Largest probe-loop radius.
pub const MAX_PROBE_RADIUS: f64 = 0.05;
/// Samples per boundary circle in the repelling test.
pub const BOUNDARY_SAMPLES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnuliError {
    #[error(
        "map is not in straightened form: {count} inessential pole preimage(s), e.g. {example:?}"
    )]
    NotStraightened { count: usize, example: SpherePoint },
    #[error("component is not repelling")]
    NotRepelling,
    #[error("boundary image at latitude {s} is within the margin of the boundary")]
    BoundaryTouchesImage { s: f64 },
    #[error("unsupported map: {0}")]
    UnsupportedSpec(String),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Winding(#[from] WindingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PreimageType {
    /// the pole itself
    TypeI,
    /// an essential circle of `A`
    TypeII,
    /// an inessential piece of `A` (here an isolated point)
    TypeIII,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PreimageLocation {
    Point(SpherePoint),
    /// `|z − S| = e^s`
    Latitude(f64),
}

/// A component of the preimage of one pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolePreimage {
    pub image: Pole,
    pub kind: PreimageType,
    pub location: PreimageLocation,
}

/// One end of a component of `f⁻¹(A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Boundary {
    Pole(Pole),
    /// circle of pole preimages at this latitude
    Circle(f64),
}

/// A component `Uᵢ` of `f⁻¹(A)` and the window `[lower_s, upper_s]` used to
/// test it for repulsion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusComponent {
    pub lower: Boundary,
    pub upper: Boundary,
    /// latitude extent of the component, open at both ends
    pub band: (f64, f64),
    pub lower_s: f64,
    pub upper_s: f64,
    pub core_s: f64,
    /// annular degree `δᵢ`
    pub delta: i64,
    /// sphere-component degree `dᵢ`
    pub d_i: i64,
    /// `None` when the boundary test was inconclusive
    pub repelling: Option<bool>,
    /// North-chart coordinate of `S` for this map
    pub south: Complex64,
}

impl AnnulusComponent {
    /// Counterclockwise circle `|z − S| = e^s`.
    pub fn circle(&self, s: f64, samples: usize) -> SampledCurve {
        SampledCurve::circle(self.south, s.exp(), samples, Chart::North)
    }

    /// Core circle sampled finely enough that a degree-`degree` image cannot
    /// alias: at least eight samples per turn of the image.
    pub fn core(&self, degree: i64) -> SampledCurve {
        let samples = BOUNDARY_SAMPLES.max(8 * degree.unsigned_abs() as usize + 8);
        self.circle(self.core_s, samples)
    }

    pub fn contains_latitude(&self, s: f64) -> bool {
        s > self.lower_s && s < self.upper_s
    }

    /// Whether `p` lies strictly inside the window.
    pub fn window_contains(&self, p: SpherePoint) -> bool {
        latitude(p, self.south).is_some_and(|s| self.contains_latitude(s))
    }
}

/// `ln |z − S|` in the North chart; `None` at `N`.
pub fn latitude(p: SpherePoint, south: Complex64) -> Option<f64> {
    p.coordinate(Chart::North).map(|z| (z - south).norm().ln())
}

fn pole_point(pole: Pole, south: Complex64) -> SpherePoint {
    match pole {
        Pole::South => SpherePoint::north(south),
        Pole::North => SpherePoint::N,
    }
}

/// Components of `f⁻¹(S)` and `f⁻¹(N)` with their types.
pub fn pole_preimages(map: &MapSpec) -> Result<Vec<PolePreimage>, AnnuliError> {
    if let Some(p) = ProductIterate::from_map(map) {
        let mut out = Vec::new();
        for (end, s) in [
            (Pole::South, f64::NEG_INFINITY),
            (Pole::North, f64::INFINITY),
        ] {
            let image = if p.radial_image(s) > 0.0 {
                Pole::North
            } else {
                Pole::South
            };
            out.push(PolePreimage {
                image,
                kind: PreimageType::TypeI,
                location: PreimageLocation::Point(SpherePoint::pole(end)),
            });
        }
        for s in p.pole_latitudes() {
            let image = if p.radial_image(s) > 0.0 {
                Pole::North
            } else {
                Pole::South
            };
            out.push(PolePreimage {
                image,
                kind: PreimageType::TypeII,
                location: PreimageLocation::Latitude(s),
            });
        }
        return Ok(out);
    }
    if !map.is_rational() {
        return Err(AnnuliError::UnsupportedSpec(map.to_string()));
    }
    let south = map.frame_south();
    let s_point = pole_point(Pole::South, south);
    let mut out = Vec::new();
    for image in [Pole::South, Pole::North] {
        for x in preimages(map, pole_point(image, south))? {
            let is_pole =
                x.chordal_distance(&s_point) < 1e-9 || x.chordal_distance(&SpherePoint::N) < 1e-9;
            out.push(PolePreimage {
                image,
                kind: if is_pole {
                    PreimageType::TypeI
                } else {
                    PreimageType::TypeIII
                },
                location: PreimageLocation::Point(x),
            });
        }
    }
    Ok(out)
}

/// Repelling test window for the band `(lo, hi)`.
fn window(lo: f64, hi: f64) -> (f64, f64) {
    let lo_w = lo.is_finite().then_some(lo + WINDOW_INSET);
    let hi_w = hi.is_finite().then_some(hi - WINDOW_INSET);
    match (lo_w, hi_w) {
        (None, None) => (-1.0, 1.0),
        (None, Some(h)) => ((-1.0f64).min(h - 1.0), h),
        (Some(l), None) => (l, 1.0f64.max(l + 1.0)),
        (Some(l), Some(h)) => (l, h),
    }
}

/// Components of `f⁻¹(A)` ordered from `S` to `N`, each with its degrees and
/// repelling flag. `seed` selects the regular value used for `dᵢ`.
pub fn decompose(map: &MapSpec, seed: u64) -> Result<Vec<AnnulusComponent>, AnnuliError> {
    let pieces = pole_preimages(map)?;
    let inessential: Vec<SpherePoint> = pieces
        .iter()
        .filter(|p| p.kind == PreimageType::TypeIII)
        .filter_map(|p| match p.location {
            PreimageLocation::Point(x) => Some(x),
            PreimageLocation::Latitude(_) => None,
        })
        .collect();
    if let Some(&example) = inessential.first() {
        return Err(AnnuliError::NotStraightened {
            count: inessential.len(),
            example,
        });
    }
    let mut circles: Vec<f64> = pieces
        .iter()
        .filter_map(|p| match p.location {
            PreimageLocation::Latitude(s) => Some(s),
            PreimageLocation::Point(_) => None,
        })
        .collect();
    circles.sort_by(f64::total_cmp);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&circles);
    edges.push(f64::INFINITY);
    let bands: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let d_values = component_degrees(map, &bands, seed)?;
    let south = map.frame_south();
    let mut out = Vec::with_capacity(bands.len());
    for (&(lo, hi), d_i) in bands.iter().zip(d_values) {
        let (lower_s, upper_s) = window(lo, hi);
        let boundary = |s: f64, pole| {
            if s.is_finite() {
                Boundary::Circle(s)
            } else {
                Boundary::Pole(pole)
            }
        };
        let mut component = AnnulusComponent {
            lower: boundary(lo, Pole::South),
            upper: boundary(hi, Pole::North),
            band: (lo, hi),
            lower_s,
            upper_s,
            core_s: 0.5 * (lower_s + upper_s),
            delta: 0,
            d_i,
            repelling: None,
            south,
        };
        component.delta = annular_degree(map, &component.core(map.declared_degree()))?;
        component.repelling = match is_repelling(map, &component) {
            Ok(r) => Some(r),
            Err(AnnuliError::BoundaryTouchesImage { .. }) => None,
            Err(e) => return Err(e),
        };
        out.push(component);
    }
    Ok(out)
}

/// Whether the window's upper circle maps strictly above it and its lower
/// circle strictly below it. Samples within [`REPELLING_MARGIN`] of their
/// own circle make the test inconclusive.
pub fn is_repelling(map: &MapSpec, component: &AnnulusComponent) -> Result<bool, AnnuliError> {
    let south = component.south;
    let mut touching = None;
    for (s, upward) in [(component.upper_s, true), (component.lower_s, false)] {
        for k in 0..BOUNDARY_SAMPLES {
            let theta = TAU * k as f64 / BOUNDARY_SAMPLES as f64;
            let z = south + Complex64::from_polar(s.exp(), theta);
            let image = map.evaluate(SpherePoint::north(z));
            let t = latitude(image, south).unwrap_or(f64::INFINITY);
            let gap = if upward { t - s } else { s - t };
            if gap < -REPELLING_MARGIN {
                return Ok(false);
            }
            if gap <= REPELLING_MARGIN {
                touching = Some(s);
            }
        }
    }
    match touching {
        Some(s) => Err(AnnuliError::BoundaryTouchesImage { s }),
        None => Ok(true),
    }
}

/// The guaranteed number `|δ − 1|` of fixed points in a repelling component.
pub fn theorem3_bound(component: &AnnulusComponent) -> Result<u64, AnnuliError> {
    if component.repelling != Some(true) {
        return Err(AnnuliError::NotRepelling);
    }
    Ok((component.delta - 1).unsigned_abs())
}

/// Outcome of the probe-based hypothesis check.
#[derive(Clone, Debug)]
pub enum HypothesisCheck {
    Pass,
    Fail(HypothesisWitness),
}

impl HypothesisCheck {
    pub fn passed(&self) -> bool {
        matches!(self, HypothesisCheck::Pass)
    }
}

/// An inessential loop of `f⁻¹(A)` whose image winds around `S`.
#[derive(Clone, Debug)]
pub struct HypothesisWitness {
    pub center: SpherePoint,
    pub radius: f64,
    pub loop_winding: i64,
    pub image_winding: i64,
    pub curve: SampledCurve,
}

/// Probe each isolated non-pole preimage of a pole with a small circle and
/// test whether its image is essential. Sound for the closed-form maps, not
/// a decision procedure in general.
pub fn check_hypothesis_h(map: &MapSpec) -> Result<HypothesisCheck, AnnuliError> {
    let pieces = pole_preimages(map)?;
    let south = map.frame_south();
    let mut points: Vec<SpherePoint> = pieces
        .iter()
        .filter_map(|p| match p.location {
            PreimageLocation::Point(x) => Some(x),
            PreimageLocation::Latitude(_) => None,
        })
        .collect();
    points.push(SpherePoint::north(south));
    for piece in pieces.iter().filter(|p| p.kind == PreimageType::TypeIII) {
        let PreimageLocation::Point(x) = piece.location else {
            continue;
        };
        let Some(center) = x.coordinate(Chart::North) else {
            continue;
        };
        let nearest = points
            .iter()
            .filter_map(|q| q.coordinate(Chart::North))
            .map(|w| (w - center).norm())
            .filter(|&d| d > 1e-9)
            .fold(f64::INFINITY, f64::min);
        let radius = MAX_PROBE_RADIUS.min(0.5 * nearest);
        let curve = SampledCurve::circle(center, radius, 128, Chart::North);
        let loop_winding = winding_number(&curve, south)?;
        let owned = map.clone();
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let image = curve.map(Chart::North, move |z| {
            owned
                .evaluate(SpherePoint::north(z))
                .coordinate(Chart::North)
                .unwrap_or(nan)
        })?;
        let image_winding = winding_number(&image, south)?;
        if loop_winding == 0 && image_winding != 0 {
            return Ok(HypothesisCheck::Fail(HypothesisWitness {
                center: x,
                radius,
                loop_winding,
                image_winding,
                curve,
            }));
        }
    }
    Ok(HypothesisCheck::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::parse_map;

    #[test]
    fn pole_preimage_types() {
        let sq = pole_preimages(&parse_map("power:d=2").unwrap()).unwrap();
        assert!(sq.iter().all(|p| p.kind == PreimageType::TypeI));
        let quad = pole_preimages(&parse_map("quad:c=0.1+0i").unwrap()).unwrap();
        let third: Vec<_> = quad
            .iter()
            .filter(|p| p.kind == PreimageType::TypeIII)
            .collect();
        assert_eq!(third.len(), 1);
        assert_eq!(third[0].image, Pole::South);
        // S' = -p where p is the attracting fixed point
        let p = parse_map("quad:c=0.1+0i").unwrap().frame_south();
        let PreimageLocation::Point(x) = third[0].location else {
            panic!()
        };
        assert!((x.z() + p).norm() < 1e-12);
        let prod = pole_preimages(
            &parse_map("product:q=pwl(-3:-4,-2:-3,-1:inf,1:-inf,2:3,3:4);d=2").unwrap(),
        )
        .unwrap();
        let circles: Vec<_> = prod
            .iter()
            .filter_map(|p| match p.location {
                PreimageLocation::Latitude(s) => Some(s),
                _ => None,
            })
            .collect();
        assert_eq!(circles, vec![-1.0, 1.0]);
    }

    #[test]
    fn decompose_examples() {
        let sq = decompose(&parse_map("power:d=2").unwrap(), 0).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(
            (sq[0].delta, sq[0].d_i, sq[0].repelling),
            (2, 2, Some(true))
        );
        let rep = decompose(&parse_map("product:q=affine(2,0);d=2").unwrap(), 0).unwrap();
        assert_eq!((rep[0].delta, rep[0].repelling), (2, Some(true)));
        assert_eq!((rep[0].lower_s, rep[0].upper_s), (-1.0, 1.0));
        let con = decompose(&parse_map("product:q=affine(0.5,0);d=2").unwrap(), 0).unwrap();
        assert_eq!(con[0].repelling, Some(false));
        let up = decompose(&parse_map("product:q=affine(1,1);d=2").unwrap(), 0).unwrap();
        assert_eq!(up[0].repelling, Some(false));
        assert!(matches!(
            decompose(&parse_map("quad:c=0.1+0i").unwrap(), 0),
            Err(AnnuliError::NotStraightened { count: 1, .. })
        ));
    }

    #[test]
    fn bound_examples() {
        let mut c = decompose(&parse_map("power:d=2").unwrap(), 0)
            .unwrap()
            .remove(0);
        assert_eq!(theorem3_bound(&c), Ok(1));
        c.delta = -1;
        assert_eq!(theorem3_bound(&c), Ok(2));
        c.delta = 1;
        assert_eq!(theorem3_bound(&c), Ok(0));
        c.repelling = Some(false);
        assert_eq!(theorem3_bound(&c), Err(AnnuliError::NotRepelling));
    }

    #[test]
    fn hypothesis_probe() {
        for spec in ["power:d=2", "product:q=affine(2,0);d=3"] {
            assert!(check_hypothesis_h(&parse_map(spec).unwrap())
                .unwrap()
                .passed());
        }
        let HypothesisCheck::Fail(w) =
            check_hypothesis_h(&parse_map("quad:c=0.1+0i").unwrap()).unwrap()
        else {
            panic!("expected failure");
        };
        assert_eq!(w.loop_winding, 0);
        assert_eq!(w.image_winding.abs(), 1);
        assert!((w.radius - 0.05).abs() < 1e-15);
    }
}
