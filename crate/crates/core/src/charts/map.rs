use num_complex::Complex64;

use super::{ChartError, RadialProfile, SpherePoint};
use crate::algebra::{homogeneous_eval, horner, Scalar, C64};
use crate::roots::polynomial_roots;

/// The closed-form sphere endomorphisms the library can analyse.
#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    /// `z ↦ zᵈ`
    Power { d: i32 },
    /// `z ↦ z² + c`
    Quadratic { c: Complex64 },
    /// `z ↦ P(z) / Q(z)`, ascending coefficients, both padded to the map's
    /// degree plus one.
    RationalPair {
        p: Vec<Complex64>,
        q: Vec<Complex64>,
    },
    /// `(s, θ) ↦ (q(s), dθ + h(s))` in log-latitude coordinates
    /// `z = e^{s + iθ}`.
    Product {
        radial: RadialProfile,
        angular_degree: i32,
        twist: RadialProfile,
    },
    /// `inner` composed with itself `n` times.
    Iterate { inner: Box<MapSpec>, n: u32 },
}

/// A validated [`MapKind`].
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    kind: MapKind,
}

impl MapSpec {
    pub fn power(d: i32) -> Self {
        MapSpec {
            kind: MapKind::Power { d },
        }
    }

    pub fn quadratic(c: Complex64) -> Self {
        MapSpec {
            kind: MapKind::Quadratic { c },
        }
    }

    /// `P/Q` from ascending coefficient lists. Rejects `Q ≡ 0` and pairs
    /// sharing a root (relative tolerance `1e-10`).
    pub fn rational(p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self, ChartError> {
        let trim = |mut v: Vec<Complex64>| {
            while v.len() > 1 && *v.last().unwrap() == Complex64::new(0.0, 0.0) {
                v.pop();
            }
            v
        };
        if p.is_empty() || q.is_empty() {
            return Err(ChartError::InvalidMap("empty coefficient list".into()));
        }
        let (mut p, mut q) = (trim(p), trim(q));
        let zero = Complex64::new(0.0, 0.0);
        if q.iter().all(|&c| c == zero) {
            return Err(ChartError::InvalidMap(
                "denominator is identically zero".into(),
            ));
        }
        if p.iter().all(|&c| c == zero) {
            if q.len() > 1 {
                return Err(ChartError::InvalidMap(
                    "zero numerator over a non-constant denominator".into(),
                ));
            }
        } else if p.len() > 1 && q.len() > 1 {
            let roots = polynomial_roots(&p).map_err(|e| ChartError::InvalidMap(e.to_string()))?;
            for r in roots.finite {
                let scale: f64 = q
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.norm() * r.norm().powi(k as i32))
                    .sum();
                if horner(&q, r).norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
                    return Err(ChartError::CommonRoot { root: r });
                }
            }
        }
        let degree = p.len().max(q.len());
        p.resize(degree, zero);
        q.resize(degree, zero);
        Ok(MapSpec {
            kind: MapKind::RationalPair { p, q },
        })
    }

    /// Product map; the radial profile must send both ends to poles so the
    /// map extends continuously over `N` and `S`.
    pub fn product(
        radial: RadialProfile,
        angular_degree: i32,
        twist: RadialProfile,
    ) -> Result<Self, ChartError> {
        let (lo, hi) = radial.end_limits();
        if lo.is_finite() || hi.is_finite() {
            return Err(ChartError::InvalidMap(
                "radial profile must tend to ±∞ at both ends".into(),
            ));
        }
        if twist.end_limits().0.is_nan() {
            return Err(ChartError::InvalidMap(
                "twist profile is not evaluable".into(),
            ));
        }
        if !twist.pole_levels().is_empty() {
            return Err(ChartError::InvalidMap(
                "twist profile must be finite".into(),
            ));
        }
        Ok(MapSpec {
            kind: MapKind::Product {
                radial,
                angular_degree,
                twist,
            },
        })
    }

    pub fn iterate(inner: MapSpec, n: u32) -> Result<Self, ChartError> {
        if n == 0 {
            return Err(ChartError::InvalidMap(
                "iterate count must be positive".into(),
            ));
        }
        Ok(MapSpec {
            kind: MapKind::Iterate {
                inner: Box::new(inner),
                n,
            },
        })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Topological degree as a sphere map.
    pub fn declared_degree(&self) -> i64 {
        match &self.kind {
            MapKind::Power { d } => d.unsigned_abs() as i64,
            MapKind::Quadratic { .. } => 2,
            MapKind::RationalPair { p, .. } => p.len() as i64 - 1,
            MapKind::Product {
                radial,
                angular_degree,
                ..
            } => {
                let (lo, hi) = radial.end_limits();
                let ends = (hi.signum() - lo.signum()) as i64 / 2;
                *angular_degree as i64 * ends
            }
            MapKind::Iterate { inner, n } => inner.declared_degree().pow(*n),
        }
    }

    /// The non-iterated map and the total number of compositions.
    pub fn flatten(&self) -> (&MapSpec, u32) {
        match &self.kind {
            MapKind::Iterate { inner, n } => {
                let (base, m) = inner.flatten();
                (base, m * n)
            }
            _ => (self, 1),
        }
    }

    /// Whether the map is a rational function (possibly iterated).
    pub fn is_rational(&self) -> bool {
        matches!(
            self.flatten().0.kind,
            MapKind::Power { .. } | MapKind::Quadratic { .. } | MapKind::RationalPair { .. }
        )
    }

    pub fn is_product(&self) -> bool {
        matches!(self.flatten().0.kind, MapKind::Product { .. })
    }

    /// North-chart coordinate of the fixed point playing the role of `S`.
    ///
    /// For `z² + c` this is the finite fixed point with the smaller
    /// multiplier (the attractor near 0 for small `c`); for every other kind
    /// it is `z = 0`. `N` is always `z = ∞`.
    pub fn frame_south(&self) -> Complex64 {
        match &self.flatten().0.kind {
            MapKind::Quadratic { c } => {
                let root = (Complex64::new(1.0, 0.0) - c * 4.0).sqrt();
                let p1 = (Complex64::new(1.0, 0.0) - root) / 2.0;
                let p2 = (Complex64::new(1.0, 0.0) + root) / 2.0;
                if p1.norm() <= p2.norm() {
                    p1
                } else {
                    p2
                }
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Degree of the underlying rational function, for rational kinds.
    pub(crate) fn rational_degree(&self) -> Option<u32> {
        match &self.kind {
            MapKind::Power { d } => Some(d.unsigned_abs()),
            MapKind::Quadratic { .. } => Some(2),
            MapKind::RationalPair { p, .. } => Some(p.len() as u32 - 1),
            _ => None,
        }
    }

    /// Ascending numerator/denominator coefficients of equal length
    /// `degree + 1`, for rational kinds.
    pub(crate) fn rational_coefficients(&self) -> Option<(Vec<C64>, Vec<C64>)> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match &self.kind {
            MapKind::Power { d } => {
                let n = d.unsigned_abs() as usize;
                let mut mono = vec![zero; n + 1];
                mono[n] = one;
                let mut unit = vec![zero; n + 1];
                unit[0] = one;
                if *d >= 0 {
                    Some((mono, unit))
                } else {
                    Some((unit, mono))
                }
            }
            MapKind::Quadratic { c } => Some((vec![*c, zero, one], vec![one, zero, zero])),
            MapKind::RationalPair { p, q } => {
                let len = p.len().max(q.len());
                let pad = |v: &Vec<C64>| {
                    let mut v = v.clone();
                    v.resize(len, zero);
                    v
                };
                Some((pad(p), pad(q)))
            }
            _ => None,
        }
    }

    /// One application of a rational kind in homogeneous coordinates.
    pub(crate) fn homogeneous_step<T: Scalar>(&self, x: T, y: T) -> (T, T) {
        match &self.kind {
            MapKind::Power { d } => {
                let e = d.unsigned_abs();
                if *d >= 0 {
                    (x.powu(e), y.powu(e))
                } else {
                    (y.powu(e), x.powu(e))
                }
            }
            MapKind::Quadratic { c } => {
                let yy = y * y;
                (x * x + T::constant(*c) * yy, yy)
            }
            MapKind::RationalPair { p, q } => {
                (homogeneous_eval(p, x, y), homogeneous_eval(q, x, y))
            }
            _ => panic!("homogeneous_step called on a non-rational map"),
        }
    }

    pub fn evaluate(&self, p: SpherePoint) -> SpherePoint {
        match &self.kind {
            MapKind::Power { .. } | MapKind::Quadratic { .. } | MapKind::RationalPair { .. } => {
                let (x, y) = p.homogeneous();
                let (a, b) = self.homogeneous_step(x, y);
                SpherePoint::from_homogeneous(a, b)
            }
            MapKind::Product {
                radial,
                angular_degree,
                twist,
            } => {
                let s = p.log_modulus();
                let image_s = radial.eval(s);
                if image_s.is_infinite() {
                    return SpherePoint::from_log_polar(image_s, 0.0);
                }
                let theta = *angular_degree as f64 * p.argument() + twist.eval(s);
                SpherePoint::from_log_polar(image_s, theta)
            }
            MapKind::Iterate { inner, n } => (0..*n).fold(p, |q, _| inner.evaluate(q)),
        }
    }
}

/// `f(p)` for a map specification.
pub fn evaluate(map: &MapSpec, p: SpherePoint) -> SpherePoint {
    map.evaluate(p)
}
