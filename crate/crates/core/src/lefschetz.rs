//! Lefschetz index of a map along a closed curve, boundary certificates on
//! rectangles, and a fixed-point locator driven by the index.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{Chart, MapSpec, SpherePoint};
use crate::winding::{winding_number, SampledCurve, WindingError};

/// Displacements smaller than this multiple of the curve diameter count as
/// fixed points on the curve.
pub const FIXED_POINT_MARGIN: f64 = 1e-7;
/// Strictness margin of the rectangle boundary conditions.
pub const CERTIFICATE_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LefschetzError {
    #[error("map has a fixed point on the curve (displacement {displacement:e})")]
    FixedPointOnCurve { displacement: f64 },
    #[error("image of the curve leaves the chart")]
    ImageNotRepresentable,
    #[error("certificate {case:?} predicts index {expected} but the integrator returned {found}")]
    CertificateIndexMismatch {
        case: Certificate,
        expected: i64,
        found: i64,
    },
    #[error(transparent)]
    Winding(#[from] WindingError),
}

/// A map of (a region of) the plane, in one chart. `None` means the image is
/// not representable in the chart.
pub trait PlanarMap: Send + Sync {
    fn apply(&self, z: Complex64) -> Option<Complex64>;
}

impl<F> PlanarMap for F
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
{
    fn apply(&self, z: Complex64) -> Option<Complex64> {
        let w = self(z);
        (w.re.is_finite() && w.im.is_finite()).then_some(w)
    }
}

/// A sphere map read in a single chart.
#[derive(Clone, Debug)]
pub struct ChartMap {
    map: MapSpec,
    chart: Chart,
}

impl ChartMap {
    pub fn new(map: MapSpec, chart: Chart) -> Self {
        ChartMap { map, chart }
    }
}

impl PlanarMap for ChartMap {
    fn apply(&self, z: Complex64) -> Option<Complex64> {
        let image = self.map.evaluate(SpherePoint::new(z, self.chart));
        image.coordinate(self.chart)
    }
}

/// `(x, y) ↦ A (x, y) + b` with real `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl AffineMap {
    pub fn diagonal(a: f64, b: f64) -> Self {
        AffineMap {
            matrix: [[a, 0.0], [0.0, b]],
            offset: [0.0, 0.0],
        }
    }
}

impl PlanarMap for AffineMap {
    fn apply(&self, z: Complex64) -> Option<Complex64> {
        let [[a, b], [c, d]] = self.matrix;
        Some(Complex64::new(
            a * z.re + b * z.im + self.offset[0],
            c * z.re + d * z.im + self.offset[1],
        ))
    }
}

/// Index of the displacement field `x ↦ f(x) − x` along `curve`.
pub fn planar_index<M>(map: &M, curve: &SampledCurve) -> Result<i64, LefschetzError>
where
    M: PlanarMap + Clone + 'static,
{
    let threshold = FIXED_POINT_MARGIN * curve.diameter();
    for &z in curve.points() {
        let w = map.apply(z).ok_or(LefschetzError::ImageNotRepresentable)?;
        let displacement = (w - z).norm();
        if displacement <= threshold {
            return Err(LefschetzError::FixedPointOnCurve { displacement });
        }
    }
    let owned = map.clone();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let field = curve.map(curve.chart(), move |z| {
        owned.apply(z).map_or(nan, |w| w - z)
    });
    let field = match field {
        Ok(f) => f,
        Err(WindingError::NonFiniteSample) => return Err(LefschetzError::ImageNotRepresentable),
        Err(e) => return Err(e.into()),
    };
    match winding_number(&field, Complex64::new(0.0, 0.0)) {
        Ok(k) => Ok(k),
        Err(WindingError::NonFiniteSample) => Err(LefschetzError::ImageNotRepresentable),
        Err(WindingError::PointOnCurve { distance }) => Err(LefschetzError::FixedPointOnCurve {
            displacement: distance,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Lefschetz index `I_f(γ)` of a sphere map along a curve, computed in the
/// curve's chart.
pub fn lefschetz_index(map: &MapSpec, curve: &SampledCurve) -> Result<i64, LefschetzError> {
    planar_index(&ChartMap::new(map.clone(), curve.chart()), curve)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` of a chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn square(center: Complex64, half: f64) -> Self {
        Rect::new(
            center.re - half,
            center.re + half,
            center.im - half,
            center.im + half,
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Scaled about the center.
    pub fn scaled(&self, factor: f64) -> Rect {
        let c = self.center();
        let (hw, hh) = (0.5 * factor * self.width(), 0.5 * factor * self.height());
        Rect::new(c.re - hw, c.re + hw, c.im - hh, c.im + hh)
    }

    /// Point of the counterclockwise boundary at parameter `t ∈ [0, 1)`,
    /// starting at the lower-left corner; each side takes a quarter.
    pub fn boundary_point(&self, t: f64) -> Complex64 {
        let u = 4.0 * t.rem_euclid(1.0);
        let side = (u.floor() as usize).min(3);
        self.side_point(side, u - side as f64)
    }

    /// Point at fraction `r` along side `side` (bottom, right, top, left).
    fn side_point(&self, side: usize, r: f64) -> Complex64 {
        let (x, y) = match side {
            0 => (self.x0 + r * self.width(), self.y0),
            1 => (self.x1, self.y0 + r * self.height()),
            2 => (self.x1 - r * self.width(), self.y1),
            _ => (self.x0, self.y1 - r * self.height()),
        };
        Complex64::new(x, y)
    }

    /// The positively oriented boundary with `per_side` samples on each side.
    pub fn boundary(&self, per_side: usize, chart: Chart) -> SampledCurve {
        let rect = *self;
        SampledCurve::from_path(4 * per_side.max(2), chart, move |t| rect.boundary_point(t))
            .expect("non-degenerate rectangle")
    }

    fn split(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.x0 + fx * self.width();
        let ym = self.y0 + fy * self.height();
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] × [{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Boundary pattern of a rectangle under a map, with the index it forces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// every side maps outward across its own line
    ExpandingCase,
    /// vertical sides map inward, horizontal sides outward
    SaddleCaseH,
    /// horizontal sides map inward, vertical sides outward
    SaddleCaseV,
    /// every side maps inward across its own line
    ContractingCase,
    NoCertificate,
}

impl Certificate {
    pub fn index(self) -> Option<i64> {
        match self {
            Certificate::ExpandingCase | Certificate::ContractingCase => Some(1),
            Certificate::SaddleCaseH | Certificate::SaddleCaseV => Some(-1),
            Certificate::NoCertificate => None,
        }
    }
}

/// Detect which boundary pattern holds and confirm its index with the
/// integrator. A disagreement is a defect in the integrator, reported as
/// [`LefschetzError::CertificateIndexMismatch`].
pub fn rectangle_certificate<M>(
    map: &M,
    rect: &Rect,
    per_side: usize,
) -> Result<Certificate, LefschetzError>
where
    M: PlanarMap + Clone + 'static,
{
    let per_side = per_side.max(2);
    // (x outward, x inward, y outward, y inward)
    let mut flags = [true; 4];
    for side in 0..4 {
        for i in 0..=per_side {
            let z = rect.side_point(side, i as f64 / per_side as f64);
            let w = map.apply(z).ok_or(LefschetzError::ImageNotRepresentable)?;
            let m = CERTIFICATE_MARGIN;
            match side {
                // bottom: y = y0
                0 => {
                    flags[2] &= w.im < rect.y0 - m;
                    flags[3] &= w.im > rect.y0 + m;
                }
                // right: x = x1
                1 => {
                    flags[0] &= w.re > rect.x1 + m;
                    flags[1] &= w.re < rect.x1 - m;
                }
                // top: y = y1
                2 => {
                    flags[2] &= w.im > rect.y1 + m;
                    flags[3] &= w.im < rect.y1 - m;
                }
                // left: x = x0
                _ => {
                    flags[0] &= w.re < rect.x0 - m;
                    flags[1] &= w.re > rect.x0 + m;
                }
            }
        }
    }
    let [x_out, x_in, y_out, y_in] = flags;
    let case = match (x_out, x_in, y_out, y_in) {
        (true, _, true, _) => Certificate::ExpandingCase,
        (_, true, true, _) => Certificate::SaddleCaseH,
        (true, _, _, true) => Certificate::SaddleCaseV,
        (_, true, _, true) => Certificate::ContractingCase,
        _ => return Ok(Certificate::NoCertificate),
    };
    let expected = case.index().unwrap_or(0);
    let found = planar_index(map, &rect.boundary(per_side, Chart::North))?;
    if found != expected {
        return Err(LefschetzError::CertificateIndexMismatch {
            case,
            expected,
            found,
        });
    }
    Ok(case)
}

/// A fixed point located inside a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocatedFixedPoint {
    pub point: Complex64,
    pub residual: f64,
}

const SPLITS: [(f64, f64); 4] = [
    (0.4871, 0.5127),
    (0.5309, 0.4683),
    (0.4417, 0.5573),
    (0.5711, 0.4291),
];

/// Search `rect` for a fixed point by index-guided quadrisection followed by
/// Newton polishing with a finite-difference Jacobian. Returns `None` when
/// the boundary index vanishes or the search loses track of the index.
pub fn locate_fixed_point<M>(map: &M, rect: &Rect) -> Option<LocatedFixedPoint>
where
    M: PlanarMap + Clone + 'static,
{
    let index_of = |r: &Rect| planar_index(map, &r.boundary(16, Chart::North)).ok();
    if index_of(rect).unwrap_or(0) == 0 {
        return None;
    }
    let target = 1e-7 * rect.width().max(rect.height());
    let mut current = *rect;
    'descend: while current.width().max(current.height()) > target {
        for &(fx, fy) in &SPLITS {
            let mut indices = Vec::with_capacity(4);
            for child in current.split(fx, fy) {
                match index_of(&child) {
                    Some(k) => indices.push((child, k)),
                    None => break,
                }
            }
            if indices.len() == 4 {
                if let Some(&(child, _)) = indices.iter().find(|(_, k)| *k != 0) {
                    current = child;
                    continue 'descend;
                }
            }
        }
        // a fixed point sits on every candidate split line: it is within
        // the current rectangle, so polish from its center
        break;
    }
    polish(map, current.center(), rect)
}

fn residual<M: PlanarMap>(map: &M, z: Complex64) -> Option<f64> {
    map.apply(z).map(|w| (w - z).norm())
}

/// Newton iteration on `g(z) = f(z) − z` viewed as a real 2D map.
fn polish<M: PlanarMap>(map: &M, start: Complex64, bounds: &Rect) -> Option<LocatedFixedPoint> {
    let g = |z: Complex64| map.apply(z).map(|w| w - z);
    let mut z = start;
    let mut best = LocatedFixedPoint {
        point: z,
        residual: residual(map, z)?,
    };
    let scale = bounds.width().max(bounds.height());
    for _ in 0..50 {
        let gz = g(z)?;
        let h = 1e-7 * scale.max(z.norm()).max(1e-12);
        let gx = (g(z + Complex64::new(h, 0.0))? - g(z - Complex64::new(h, 0.0))?) / (2.0 * h);
        let gy = (g(z + Complex64::new(0.0, h))? - g(z - Complex64::new(0.0, h))?) / (2.0 * h);
        let det = gx.re * gy.im - gy.re * gx.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (gy.im * gz.re - gy.re * gz.im) / det;
        let dy = (-gx.im * gz.re + gx.re * gz.im) / det;
        z -= Complex64::new(dx, dy);
        let r = residual(map, z)?;
        if r < best.residual {
            best = LocatedFixedPoint {
                point: z,
                residual: r,
            };
        }
        if r < 1e-15 * scale.max(1.0) {
            break;
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::parse_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit() -> Rect {
        Rect::new(-1.0, 1.0, -1.0, 1.0)
    }

    #[test]
    fn index_examples() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 64, Chart::North);
        assert_eq!(planar_index(&|z: Complex64| 2.0 * z, &circle), Ok(1));
        assert_eq!(planar_index(&|z: Complex64| z + 5.0, &circle), Ok(0));
        let big = SampledCurve::circle(c(0.0, 0.0), 2.0, 64, Chart::North);
        assert_eq!(
            lefschetz_index(&parse_map("power:d=2").unwrap(), &big),
            Ok(2)
        );
    }

    #[test]
    fn fixed_point_on_curve() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 64, Chart::North);
        let err = lefschetz_index(&parse_map("power:d=2").unwrap(), &circle).unwrap_err();
        assert!(matches!(err, LefschetzError::FixedPointOnCurve { .. }));
    }

    #[test]
    fn four_linear_certificates() {
        let cases = [
            (AffineMap::diagonal(2.0, 2.0), Certificate::ExpandingCase),
            (AffineMap::diagonal(0.5, 0.5), Certificate::ContractingCase),
            (AffineMap::diagonal(0.5, 2.0), Certificate::SaddleCaseH),
            (AffineMap::diagonal(2.0, 0.5), Certificate::SaddleCaseV),
        ];
        for (map, expected) in cases {
            assert_eq!(rectangle_certificate(&map, &unit(), 32), Ok(expected));
        }
        let rotation = AffineMap {
            matrix: [[0.0, -1.0], [1.0, 0.0]],
            offset: [0.0, 0.0],
        };
        assert_eq!(
            rectangle_certificate(&rotation, &unit(), 32),
            Ok(Certificate::NoCertificate)
        );
    }

    #[test]
    fn certificate_survives_rescaling() {
        let map = AffineMap {
            matrix: [[0.4, 0.0], [0.0, 3.0]],
            offset: [0.1, -0.2],
        };
        let fixed = c(0.1 / 0.6, 0.1);
        let rect = Rect::square(fixed, 1.0);
        let base = rectangle_certificate(&map, &rect, 32).unwrap();
        assert_eq!(base, Certificate::SaddleCaseH);
        for f in [0.9, 1.1] {
            assert_eq!(rectangle_certificate(&map, &rect.scaled(f), 32), Ok(base));
        }
    }

    #[test]
    fn locator_finds_saddle_fixed_point() {
        let map = AffineMap {
            matrix: [[0.5, 0.1], [0.0, 2.0]],
            offset: [0.05, 0.3],
        };
        // oracle: solve (A − I) z = −b by hand
        let y = -0.3 / (2.0 - 1.0);
        let x = -(0.05 + 0.1 * y) / (0.5 - 1.0);
        let found = locate_fixed_point(&map, &unit()).unwrap();
        assert!((found.point - c(x, y)).norm() < 1e-10, "{found:?}");
        assert!(found.residual < 1e-12);
    }

    #[test]
    fn locator_on_sphere_map() {
        let map = ChartMap::new(parse_map("power:d=2").unwrap(), Chart::North);
        let found = locate_fixed_point(&map, &Rect::square(c(1.0, 0.0), 0.3)).unwrap();
        assert!((found.point - c(1.0, 0.0)).norm() < 1e-12);
        assert!(locate_fixed_point(&map, &Rect::square(c(3.0, 3.0), 0.3)).is_none());
    }
}
