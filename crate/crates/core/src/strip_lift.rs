//! Lifts of annulus maps to the strip `ℝ × (0, 1)`, the rectangular loop `β`
//! around a fundamental-domain block, and the index values it carries.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::annuli::AnnulusComponent;
use crate::charts::{Chart, MapSpec, SpherePoint};
use crate::lefschetz::{
    locate_fixed_point, rectangle_certificate, Certificate, LefschetzError, PlanarMap, Rect,
};
use crate::product::ProductIterate;
use crate::winding::SampledCurve;

/// Strip height of the lower boundary lift.
pub const LOWER_Y: f64 = 0.25;
/// Strip height of the upper boundary lift.
pub const UPPER_Y: f64 = 0.75;
/// Largest block half-width tried by [`verify_index`].
pub const MAX_M: u32 = 64;
/// Agreement required between a lift's projection and the map.
pub const PROJECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StripError {
    #[error("angle continuation lost track of the branch at ({x}, {y})")]
    LiftDiscontinuity { x: f64, y: f64 },
    #[error("projection of the lift misses f by {error:e} at ({x}, {y})")]
    ProjectionMismatch { x: f64, y: f64, error: f64 },
    #[error("no block half-width m ≤ {MAX_M} satisfies the boundary conditions")]
    MNotFound,
    #[error("translation degree 1: the boundary argument gives no index")]
    DegreeOne,
    #[error("expected index {expected}, certificate {case:?} gives {found:?}")]
    IndexMismatch {
        expected: i64,
        found: Option<i64>,
        case: Certificate,
    },
    #[error(transparent)]
    Lefschetz(#[from] LefschetzError),
}

/// The lift `F + (k, 0)` of `f` restricted to a component, in strip
/// coordinates `x = θ/2π`, `y = 0.25 + 0.5 (s − s_lo)/(s_hi − s_lo)`.
#[derive(Clone, Debug)]
pub struct StripMap {
    map: MapSpec,
    component: AnnulusComponent,
    translation_degree: i64,
    lift_offset: i64,
    /// image angle (in turns) at the basepoint `(0, 1/2)`
    base_turns: f64,
}

impl StripMap {
    pub fn translation_degree(&self) -> i64 {
        self.translation_degree
    }

    pub fn lift_offset(&self) -> i64 {
        self.lift_offset
    }

    pub fn component(&self) -> &AnnulusComponent {
        &self.component
    }

    fn latitude_of(&self, y: f64) -> f64 {
        let c = &self.component;
        c.lower_s + (y - LOWER_Y) / (UPPER_Y - LOWER_Y) * (c.upper_s - c.lower_s)
    }

    fn height_of(&self, s: f64) -> f64 {
        let c = &self.component;
        LOWER_Y + (UPPER_Y - LOWER_Y) * (s - c.lower_s) / (c.upper_s - c.lower_s)
    }

    /// The point of the annulus over `(x, y)`.
    pub fn project(&self, p: Complex64) -> SpherePoint {
        let s = self.latitude_of(p.im);
        SpherePoint::north(self.component.south + Complex64::from_polar(s.exp(), TAU * p.re))
    }

    fn image_offset(&self, x: f64, y: f64) -> Complex64 {
        let z = self.project(Complex64::new(x, y));
        match self.map.evaluate(z).coordinate(Chart::North) {
            Some(w) => w - self.component.south,
            None => Complex64::new(f64::INFINITY, 0.0),
        }
    }

    /// Image angle in turns, continued from the basepoint along the vertical
    /// then horizontal legs of the path to `(x, y)`.
    fn continued_turns(&self, x: f64, y: f64) -> Result<f64, StripError> {
        let mut turns = self.base_turns;
        let mut prev = self.image_offset(0.0, 0.5);
        let legs = [((0.0, 0.5), (0.0, y)), ((0.0, y), (x, y))];
        for ((x0, y0), (x1, y1)) in legs {
            let length = (x1 - x0).abs() + (y1 - y0).abs();
            let steps = (length * 64.0).ceil().max(1.0) as usize;
            let mut a = (x0, y0);
            for i in 1..=steps {
                let t = i as f64 / steps as f64;
                let b = (x0 + (x1 - x0) * t, y0 + (y1 - y0) * t);
                let (delta, last) = self.continue_segment(a, b, prev, 0)?;
                turns += delta / TAU;
                prev = last;
                a = b;
            }
        }
        Ok(turns)
    }

    fn continue_segment(
        &self,
        a: (f64, f64),
        b: (f64, f64),
        wa: Complex64,
        depth: u32,
    ) -> Result<(f64, Complex64), StripError> {
        let wb = self.image_offset(b.0, b.1);
        if !(wb.re.is_finite() && wb.im.is_finite()) || wb.norm() == 0.0 {
            return Err(StripError::LiftDiscontinuity { x: b.0, y: b.1 });
        }
        let delta = (wb / wa).arg();
        if delta.abs() < 0.25 * PI {
            return Ok((delta, wb));
        }
        if depth > 24 {
            return Err(StripError::LiftDiscontinuity { x: b.0, y: b.1 });
        }
        let m = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let (d1, wm) = self.continue_segment(a, m, wa, depth + 1)?;
        let (d2, wb) = self.continue_segment(m, b, wm, depth + 1)?;
        Ok((d1 + d2, wb))
    }

    /// `F(x, y)`.
    pub fn eval(&self, p: Complex64) -> Result<Complex64, StripError> {
        let (x, y) = (p.re, p.im);
        let s = self.latitude_of(y);
        let product = if self.component.south == Complex64::new(0.0, 0.0) {
            ProductIterate::from_map(&self.map)
        } else {
            None
        };
        let (image_s, turns) = match product {
            Some(prod) => {
                let image_s = prod.radial_image(s);
                let turns = prod.angular_degree() * x + prod.angle_offset(s) / TAU;
                (image_s, turns)
            }
            None => {
                let w = self.image_offset(x, y);
                (w.norm().ln(), self.continued_turns(x, y)?)
            }
        };
        Ok(Complex64::new(
            turns + self.lift_offset as f64,
            self.height_of(image_s),
        ))
    }

    fn check_projection(&self, p: Complex64) -> Result<(), StripError> {
        let image = self.eval(p)?;
        let expected = self.map.evaluate(self.project(p));
        let got = self.project(image);
        let error = expected.chordal_distance(&got);
        if error > PROJECTION_TOLERANCE {
            return Err(StripError::ProjectionMismatch {
                x: p.re,
                y: p.im,
                error,
            });
        }
        Ok(())
    }
}

impl PlanarMap for StripMap {
    fn apply(&self, p: Complex64) -> Option<Complex64> {
        self.eval(p)
            .ok()
            .filter(|w| w.re.is_finite() && w.im.is_finite())
    }
}

/// The lift of `f` on `component` selected by the deck offset `k`, checked
/// against `f` on 100 seeded random points.
pub fn lift(map: &MapSpec, component: &AnnulusComponent, k: i64) -> Result<StripMap, StripError> {
    let mut strip = StripMap {
        map: map.clone(),
        component: component.clone(),
        translation_degree: component.delta,
        lift_offset: k,
        base_turns: 0.0,
    };
    let w0 = strip.image_offset(0.0, 0.5);
    strip.base_turns = w0.arg() / TAU;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..100 {
        let p = Complex64::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(LOWER_Y..UPPER_Y),
        );
        strip.check_projection(p)?;
    }
    Ok(strip)
}

/// The positively oriented loop around `[−m, max(m, 1)] × [1/4, 3/4]`: the
/// lower boundary lift, the right vertical, the upper boundary lift
/// reversed, the left vertical.
pub fn build_beta(m: u32, per_unit: usize) -> SampledCurve {
    beta_rect(m).boundary(per_unit * (2 * m as usize + 1), Chart::North)
}

pub fn beta_rect(m: u32) -> Rect {
    let m = m as f64;
    Rect::new(-m, m.max(1.0), LOWER_Y, UPPER_Y)
}

/// A fixed point of a lift and its projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftFixedPoint {
    pub strip: Complex64,
    pub projection: SpherePoint,
    /// chordal distance between `f(p)` and `p`
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripIndex {
    pub d: i64,
    pub k: i64,
    pub m_used: u32,
    pub index: i64,
    pub certificate: Certificate,
    pub fixed_point: Option<LiftFixedPoint>,
}

/// Find the smallest `m` for which the boundary of the block satisfies the
/// expanding (`d ≥ 2`) or saddle (`d ≤ 0`) pattern, and return the certified
/// index with a fixed point of the lift inside the block.
pub fn verify_index(strip: &StripMap) -> Result<StripIndex, StripError> {
    let d = strip.translation_degree;
    if d == 1 {
        return Err(StripError::DegreeOne);
    }
    let (expected, wanted) = if d >= 2 {
        (1, Certificate::ExpandingCase)
    } else {
        (-1, Certificate::SaddleCaseH)
    };
    for m in 1..=MAX_M {
        let rect = beta_rect(m);
        let per_side = 32 * (2 * m as usize + 1);
        let case = rectangle_certificate(strip, &rect, per_side)?;
        if case == Certificate::NoCertificate {
            continue;
        }
        if case != wanted {
            return Err(StripError::IndexMismatch {
                expected,
                found: case.index(),
                case,
            });
        }
        let fixed_point = locate_fixed_point(strip, &rect).map(|found| {
            let projection = strip.project(found.point);
            let residual = strip.map.evaluate(projection).chordal_distance(&projection);
            LiftFixedPoint {
                strip: found.point,
                projection,
                residual,
            }
        });
        return Ok(StripIndex {
            d,
            k: strip.lift_offset,
            m_used: m,
            index: expected,
            certificate: case,
            fixed_point,
        });
    }
    Err(StripError::MNotFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annuli::decompose;
    use crate::charts::parse_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn strip(spec: &str, k: i64) -> StripMap {
        let map = parse_map(spec).unwrap();
        let component = decompose(&map, 0).unwrap().remove(0);
        lift(&map, &component, k).unwrap()
    }

    #[test]
    fn product_lift_is_closed_form() {
        let f = strip("product:q=affine(2,0);d=2", 0);
        // y = 0.5 is s = 0, fixed by s -> 2s; y = 0.75 is s = 1 -> s = 2
        assert_eq!(f.eval(c(0.3, 0.5)), Ok(c(0.6, 0.5)));
        assert_eq!(f.eval(c(0.3, 0.75)), Ok(c(0.6, 1.0)));
        let g = strip("product:q=affine(2,0);d=2", 1);
        assert_eq!(g.eval(c(0.3, 0.5)), Ok(c(1.6, 0.5)));
    }

    #[test]
    fn power_lift_by_continuation() {
        let f = strip("power:d=2", 0);
        for x in [-2.3, -0.4, 0.0, 0.7, 3.1] {
            for y in [0.3, 0.5, 0.7] {
                let w = f.eval(c(x, y)).unwrap();
                assert!((w.re - 2.0 * x).abs() < 1e-12, "{x} {y} {w}");
                // z -> z^2 doubles s about the window center s = 0
                assert!((w.im - (0.5 + 2.0 * (y - 0.5))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta_spans() {
        assert_eq!(beta_rect(1), Rect::new(-1.0, 1.0, 0.25, 0.75));
        assert_eq!(beta_rect(3), Rect::new(-3.0, 3.0, 0.25, 0.75));
        assert_eq!(beta_rect(0), Rect::new(0.0, 1.0, 0.25, 0.75));
        let beta = build_beta(1, 16);
        assert_eq!(crate::winding::winding_number(&beta, c(0.0, 0.5)), Ok(1));
    }

    #[test]
    fn indices_by_translation_degree() {
        for (spec, expected) in [
            ("product:q=affine(2,0);d=2", 1),
            ("product:q=affine(2,0);d=3", 1),
            ("product:q=affine(2,0);d=-1", -1),
            ("product:q=affine(2,0);d=0", -1),
            ("power:d=2", 1),
        ] {
            let r = verify_index(&strip(spec, 0)).unwrap();
            assert_eq!(r.index, expected, "{spec}");
            let fp = r.fixed_point.expect("fixed point");
            assert!(fp.residual < 1e-10, "{spec}: {fp:?}");
        }
        assert_eq!(
            verify_index(&strip("product:q=affine(2,0);d=1", 0)).unwrap_err(),
            StripError::DegreeOne
        );
    }
}
