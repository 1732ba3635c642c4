use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ChartError;

/// One of the two standard charts of the Riemann sphere.
///
/// `North` carries the coordinate `z` with `S` at `z = 0` and `N` at
/// `z = ∞`; `South` carries `w = 1/z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    North,
    South,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pole {
    /// `z = 0`
    South,
    /// `z = ∞`
    North,
}

/// A point of the Riemann sphere written in one of the two charts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpherePoint {
    value: Complex64,
    chart: Chart,
}

impl SpherePoint {
    pub const S: SpherePoint = SpherePoint {
        value: Complex64::new(0.0, 0.0),
        chart: Chart::North,
    };
    pub const N: SpherePoint = SpherePoint {
        value: Complex64::new(0.0, 0.0),
        chart: Chart::South,
    };

    /// A point with a finite coordinate in `chart`. Infinite coordinates are
    /// turned into the opposite pole.
    pub fn new(value: Complex64, chart: Chart) -> Self {
        if value.re.is_infinite() || value.im.is_infinite() {
            return SpherePoint {
                value: Complex64::new(0.0, 0.0),
                chart: chart.other(),
            };
        }
        SpherePoint { value, chart }
    }

    pub fn north(z: Complex64) -> Self {
        Self::new(z, Chart::North)
    }

    pub fn south(w: Complex64) -> Self {
        Self::new(w, Chart::South)
    }

    pub fn pole(pole: Pole) -> Self {
        match pole {
            Pole::South => Self::S,
            Pole::North => Self::N,
        }
    }

    /// Point with homogeneous coordinates `[x : y]`, i.e. `z = x / y`.
    ///
    /// The chart is chosen so the stored coordinate has modulus at most one.
    pub fn from_homogeneous(x: Complex64, y: Complex64) -> Self {
        if x.norm_sqr() <= y.norm_sqr() {
            SpherePoint {
                value: x / y,
                chart: Chart::North,
            }
        } else {
            SpherePoint {
                value: y / x,
                chart: Chart::South,
            }
        }
    }

    /// `[x : y]` with `max(|x|, |y|) = 1`.
    pub fn homogeneous(&self) -> (Complex64, Complex64) {
        let p = self.normalized();
        let one = Complex64::new(1.0, 0.0);
        match p.chart {
            Chart::North => (p.value, one),
            Chart::South => (one, p.value),
        }
    }

    /// Point `e^{s + iθ}` of the North chart; `s = ±∞` gives the poles.
    pub fn from_log_polar(s: f64, theta: f64) -> Self {
        if s == f64::INFINITY {
            return Self::N;
        }
        if s == f64::NEG_INFINITY {
            return Self::S;
        }
        if s <= 0.0 {
            Self::north(Complex64::from_polar(s.exp(), theta))
        } else {
            Self::south(Complex64::from_polar((-s).exp(), -theta))
        }
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn is_finite(&self) -> bool {
        self.value.re.is_finite() && self.value.im.is_finite()
    }

    /// The same point re-expressed so that its coordinate has modulus ≤ 1.
    pub fn normalized(self) -> Self {
        if self.value.norm_sqr() > 1.0 {
            SpherePoint {
                value: self.value.inv(),
                chart: self.chart.other(),
            }
        } else {
            self
        }
    }

    pub fn is_pole(&self) -> Option<Pole> {
        let p = self.normalized();
        if p.value == Complex64::new(0.0, 0.0) {
            Some(match p.chart {
                Chart::North => Pole::South,
                Chart::South => Pole::North,
            })
        } else {
            None
        }
    }

    pub fn to_chart(self, target: Chart) -> Result<SpherePoint, ChartError> {
        if self.chart == target {
            return Ok(self);
        }
        if self.value == Complex64::new(0.0, 0.0) {
            return Err(ChartError::PoleHasNoCoordinate { chart: target });
        }
        Ok(SpherePoint {
            value: self.value.inv(),
            chart: target,
        })
    }

    /// Coordinate in `chart`, or `None` at that chart's point at infinity.
    pub fn coordinate(&self, chart: Chart) -> Option<Complex64> {
        self.to_chart(chart).ok().map(|p| p.value)
    }

    /// North-chart coordinate with `N` mapped to complex infinity.
    pub fn z(&self) -> Complex64 {
        self.coordinate(Chart::North)
            .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
    }

    /// Image under inverse stereographic projection, `N = (0,0,1)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let v = self.value;
        let m = v.norm_sqr();
        let den = 1.0 + m;
        match self.chart {
            Chart::North => [2.0 * v.re / den, 2.0 * v.im / den, (m - 1.0) / den],
            Chart::South => [2.0 * v.re / den, -2.0 * v.im / den, (1.0 - m) / den],
        }
    }

    /// Euclidean distance between the points on the unit sphere (at most 2).
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// `ln |z|` in the North chart; `-∞` at `S`, `+∞` at `N`.
    pub fn log_modulus(&self) -> f64 {
        match self.chart {
            Chart::North => self.value.norm().ln(),
            Chart::South => -self.value.norm().ln(),
        }
    }

    /// `arg z` in the North chart (0 at the poles).
    pub fn argument(&self) -> f64 {
        match self.chart {
            Chart::North => self.value.arg(),
            Chart::South => -self.value.arg(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reciprocal_chart_change() {
        let p = SpherePoint::north(c(2.0, 0.0))
            .to_chart(Chart::South)
            .unwrap();
        assert_eq!(p.value(), c(0.5, 0.0));
        assert_eq!(p.chart(), Chart::South);
        let q = SpherePoint::north(c(1.0, 0.0))
            .to_chart(Chart::South)
            .unwrap();
        assert_eq!(q.value(), c(1.0, 0.0));
    }

    #[test]
    fn pole_has_no_antipodal_coordinate() {
        assert_eq!(
            SpherePoint::S.to_chart(Chart::South),
            Err(ChartError::PoleHasNoCoordinate {
                chart: Chart::South
            })
        );
        assert!(SpherePoint::N.to_chart(Chart::North).is_err());
        assert_eq!(SpherePoint::S.to_chart(Chart::North), Ok(SpherePoint::S));
    }

    #[test]
    fn poles_are_chart_independent() {
        assert_eq!(SpherePoint::S.is_pole(), Some(Pole::South));
        assert_eq!(SpherePoint::N.is_pole(), Some(Pole::North));
        let inf = SpherePoint::north(c(f64::INFINITY, 0.0));
        assert_eq!(inf.is_pole(), Some(Pole::North));
        assert_eq!(SpherePoint::north(c(1e-3, 0.0)).is_pole(), None);
    }

    #[test]
    fn normalization_bounds_modulus() {
        let p = SpherePoint::north(c(3.0, 4.0)).normalized();
        assert_eq!(p.chart(), Chart::South);
        assert!((p.value() - c(3.0, -4.0) / 25.0).norm() < 1e-16);
    }

    #[test]
    fn chordal_distance_of_poles() {
        assert!((SpherePoint::S.chordal_distance(&SpherePoint::N) - 2.0).abs() < 1e-15);
        let a = SpherePoint::north(c(0.5, 0.5));
        let b = a.to_chart(Chart::South).unwrap();
        assert!(a.chordal_distance(&b) < 1e-15);
    }

    #[test]
    fn log_polar_round_trip() {
        for &(s, t) in &[(-3.0, 0.4), (0.0, 2.0), (2.5, -1.0)] {
            let p = SpherePoint::from_log_polar(s, t);
            assert!((p.log_modulus() - s).abs() < 1e-14);
            assert!((p.argument() - t).abs() < 1e-14);
        }
    }
}
