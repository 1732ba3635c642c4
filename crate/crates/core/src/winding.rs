//! Winding numbers of sampled closed curves, inside/outside classification
//! and essentiality of loops in the annulus `S² ∖ {N, S}`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::charts::Chart;
use crate::format::format_sig;

/// Resampling budget per winding computation.
pub const MAX_SAMPLES: usize = 1 << 20;
/// Distance from an integer tolerated in `Σ Δarg / 2π`.
pub const SNAP_TOLERANCE: f64 = 0.05;
/// Per-edge argument increment that triggers midpoint insertion.
pub const EDGE_ANGLE_CAP: f64 = FRAC_PI_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindingError {
    #[error("a closed curve needs at least 8 distinct samples, got {0}")]
    TooFewSamples(usize),
    #[error("query point lies on the curve (distance {distance:e})")]
    PointOnCurve { distance: f64 },
    #[error("winding sum {value} is not within {SNAP_TOLERANCE} of an integer")]
    NonIntegralWinding { value: f64 },
    #[error("curve sample is not finite")]
    NonFiniteSample,
    #[error("curve passes through a pole")]
    PoleOnCurve,
    #[error("curve fixture: {0}")]
    Fixture(String),
}

type PathFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A closed polyline in one chart, optionally backed by the parameterization
/// `t ∈ [0, 1) ↦ γ(t)` it was sampled from. The last sample connects back
/// to the first.
#[derive(Clone)]
pub struct SampledCurve {
    points: Vec<Complex64>,
    params: Vec<f64>,
    chart: Chart,
    path: Option<PathFn>,
}

impl fmt::Debug for SampledCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledCurve")
            .field("samples", &self.points.len())
            .field("chart", &self.chart)
            .field("parameterized", &self.path.is_some())
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Inn,
    Out,
}

fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl SampledCurve {
    fn build(
        points: Vec<Complex64>,
        params: Vec<f64>,
        chart: Chart,
        path: Option<PathFn>,
        min_samples: usize,
    ) -> Result<Self, WindingError> {
        if points.iter().any(|&z| !is_finite(z)) {
            return Err(WindingError::NonFiniteSample);
        }
        let mut kept_points = Vec::with_capacity(points.len());
        let mut kept_params = Vec::with_capacity(points.len());
        for (z, t) in points.into_iter().zip(params) {
            if kept_points.last() != Some(&z) {
                kept_points.push(z);
                kept_params.push(t);
            }
        }
        while kept_points.len() > 1 && kept_points.last() == kept_points.first() {
            kept_points.pop();
            kept_params.pop();
        }
        if kept_points.len() < min_samples {
            return Err(WindingError::TooFewSamples(kept_points.len()));
        }
        Ok(SampledCurve {
            points: kept_points,
            params: kept_params,
            chart,
            path,
        })
    }

    /// A closed polyline through `points`.
    pub fn from_points(points: Vec<Complex64>, chart: Chart) -> Result<Self, WindingError> {
        let n = points.len().max(1);
        let params = (0..points.len()).map(|i| i as f64 / n as f64).collect();
        Self::build(points, params, chart, None, 8)
    }

    /// `samples` equally spaced samples of a closed parameterized curve; the
    /// parameterization is kept for adaptive refinement.
    pub fn from_path<F>(samples: usize, chart: Chart, path: F) -> Result<Self, WindingError>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_arc(samples, chart, Arc::new(path), 8)
    }

    fn from_arc(
        samples: usize,
        chart: Chart,
        path: PathFn,
        min_samples: usize,
    ) -> Result<Self, WindingError> {
        let params: Vec<f64> = (0..samples).map(|i| i as f64 / samples as f64).collect();
        let points = params.iter().map(|&t| path(t)).collect();
        Self::build(points, params, chart, Some(path), min_samples)
    }

    /// Counterclockwise circle.
    pub fn circle(center: Complex64, radius: f64, samples: usize, chart: Chart) -> Self {
        Self::from_path(samples.max(8), chart, move |t| {
            center + Complex64::from_polar(radius, TAU * t)
        })
        .expect("circle of positive radius")
    }

    /// The latitude circle `|z| = e^s` of the North chart.
    pub fn latitude(s: f64, samples: usize) -> Self {
        Self::circle(Complex64::new(0.0, 0.0), s.exp(), samples, Chart::North)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_parameterized(&self) -> bool {
        self.path.is_some()
    }

    /// Diagonal of the bounding box of the samples.
    pub fn diameter(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for z in &self.points {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    }

    /// Point at parameter `t ∈ [0, 1]`: the parameterization when present,
    /// linear interpolation along the polyline otherwise.
    pub fn eval(&self, t: f64) -> Complex64 {
        if let Some(path) = &self.path {
            return path(t);
        }
        let n = self.points.len();
        let i = match self.params.partition_point(|&p| p <= t) {
            0 => 0,
            k => k - 1,
        };
        let (t0, z0) = (self.params[i], self.points[i]);
        let (t1, z1) = if i + 1 < n {
            (self.params[i + 1], self.points[i + 1])
        } else {
            (1.0, self.points[0])
        };
        if t1 <= t0 {
            return z0;
        }
        z0 + (z1 - z0) * ((t - t0) / (t1 - t0))
    }

    /// `t ↦ f(γ(t))`, sampled at the same parameters and refinable through
    /// `f`. Degenerate images (fewer than 8 distinct samples) are allowed.
    pub fn map<F>(&self, chart: Chart, f: F) -> Result<SampledCurve, WindingError>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let base = self.clone();
        let path: PathFn = Arc::new(move |t| f(base.eval(t)));
        let points = self.params.iter().map(|&t| path(t)).collect();
        Self::build(points, self.params.clone(), chart, Some(path), 1)
    }

    /// The curve in the other chart, `w = 1/z`.
    pub fn to_chart(&self, chart: Chart) -> Result<SampledCurve, WindingError> {
        if chart == self.chart {
            return Ok(self.clone());
        }
        if self.points.iter().any(|z| z.norm() == 0.0) {
            return Err(WindingError::PoleOnCurve);
        }
        self.map(chart, |z| z.inv())
    }

    /// The loop traversed backwards.
    pub fn reversed(&self) -> SampledCurve {
        let base = self.clone();
        let path: PathFn = Arc::new(move |t| base.eval((1.0 - t).rem_euclid(1.0)));
        let n = self.points.len();
        let mut points = Vec::with_capacity(n);
        let mut params = Vec::with_capacity(n);
        points.push(self.points[0]);
        params.push(0.0);
        for i in (1..n).rev() {
            points.push(self.points[i]);
            params.push(1.0 - self.params[i]);
        }
        SampledCurve {
            points,
            params,
            chart: self.chart,
            path: Some(path),
        }
    }

    /// `self` followed by `other`, joined by straight segments between their
    /// base points when these differ.
    pub fn concat(&self, other: &SampledCurve) -> Result<SampledCurve, WindingError> {
        let other = other.to_chart(self.chart)?;
        let (a, b) = (self.clone(), other.clone());
        let path: PathFn = Arc::new(move |t| {
            if t < 0.5 {
                a.eval(2.0 * t)
            } else {
                b.eval((2.0 * t - 1.0).min(1.0))
            }
        });
        let mut points = self.points.clone();
        let mut params: Vec<f64> = self.params.iter().map(|t| t / 2.0).collect();
        points.extend_from_slice(&other.points);
        params.extend(other.params.iter().map(|t| 0.5 + t / 2.0));
        Self::build(points, params, self.chart, Some(path), 1)
    }

    /// Parse the `re,im` CSV fixture format. A `# chart=north|south` comment
    /// line selects the chart (North when absent).
    pub fn read_csv<R: Read>(mut reader: R) -> Result<SampledCurve, WindingError> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| WindingError::Fixture(e.to_string()))?;
        let mut chart = Chart::North;
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("chart=") {
                    chart = match value.trim() {
                        "north" => Chart::North,
                        "south" => Chart::South,
                        other => {
                            return Err(WindingError::Fixture(format!("unknown chart `{other}`")))
                        }
                    };
                }
            }
        }
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| WindingError::Fixture(e.to_string()))?;
            if record.len() != 2 {
                return Err(WindingError::Fixture(format!(
                    "expected `re,im`, got {} fields",
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| WindingError::Fixture(format!("`{s}`: {e}")))
            };
            points.push(Complex64::new(parse(&record[0])?, parse(&record[1])?));
        }
        SampledCurve::from_points(points, chart)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        let chart = match self.chart {
            Chart::North => "north",
            Chart::South => "south",
        };
        writeln!(writer, "# chart={chart}")?;
        for z in &self.points {
            writeln!(writer, "{},{}", format_sig(z.re), format_sig(z.im))?;
        }
        Ok(())
    }
}

struct Refiner<'a> {
    curve: &'a SampledCurve,
    p: Complex64,
    min_distance: f64,
    samples: usize,
}

impl Refiner<'_> {
    fn check(&self, z: Complex64) -> Result<(), WindingError> {
        if !is_finite(z) {
            return Err(WindingError::NonFiniteSample);
        }
        let d = (z - self.p).norm();
        if d <= self.min_distance {
            return Err(WindingError::PointOnCurve { distance: d });
        }
        Ok(())
    }

    /// Argument increment along one edge, bisecting while it exceeds the cap.
    fn edge(
        &mut self,
        t0: f64,
        z0: Complex64,
        t1: f64,
        z1: Complex64,
    ) -> Result<f64, WindingError> {
        let mut total = 0.0;
        let mut stack = vec![(t0, z0, t1, z1)];
        while let Some((a, za, b, zb)) = stack.pop() {
            let delta = ((zb - self.p) / (za - self.p)).arg();
            if delta.abs() < EDGE_ANGLE_CAP || self.samples >= MAX_SAMPLES || b - a < 1e-15 {
                total += delta;
                continue;
            }
            let m = 0.5 * (a + b);
            let zm = self.curve.eval(m);
            self.check(zm)?;
            self.samples += 1;
            // right half first so the left half is summed first
            stack.push((m, zm, b, zb));
            stack.push((a, za, m, zm));
        }
        Ok(total)
    }
}

/// Total argument change of `γ(t) - p`, in turns, before integer snapping.
pub fn winding_sum(curve: &SampledCurve, p: Complex64) -> Result<f64, WindingError> {
    let mut refiner = Refiner {
        curve,
        p,
        min_distance: 1e-9 * curve.diameter(),
        samples: curve.len(),
    };
    for &z in curve.points() {
        refiner.check(z)?;
    }
    let n = curve.len();
    let mut total = 0.0;
    for i in 0..n {
        let (t0, z0) = (curve.params[i], curve.points[i]);
        let (t1, z1) = if i + 1 < n {
            (curve.params[i + 1], curve.points[i + 1])
        } else {
            (1.0, curve.points[0])
        };
        total += refiner.edge(t0, z0, t1, z1)?;
    }
    Ok(total / TAU)
}

/// Winding number `Ind_γ(p)` of the closed curve about `p`.
pub fn winding_number(curve: &SampledCurve, p: Complex64) -> Result<i64, WindingError> {
    let turns = winding_sum(curve, p)?;
    let k = turns.round();
    if (turns - k).abs() > SNAP_TOLERANCE {
        return Err(WindingError::NonIntegralWinding { value: turns });
    }
    Ok(k as i64)
}

/// `Out` iff the winding number about `p` vanishes.
pub fn classify(curve: &SampledCurve, p: Complex64) -> Result<Side, WindingError> {
    Ok(if winding_number(curve, p)? == 0 {
        Side::Out
    } else {
        Side::Inn
    })
}

/// Whether a loop of `A = S² ∖ {N, S}` separates the poles, i.e. winds
/// around `S` (`z = 0` of the North chart).
pub fn is_essential(curve: &SampledCurve) -> Result<bool, WindingError> {
    is_essential_about(curve, Complex64::new(0.0, 0.0))
}

/// [`is_essential`] for an annulus whose `S` sits at North-chart coordinate
/// `south` (and `N` at infinity).
pub fn is_essential_about(curve: &SampledCurve, south: Complex64) -> Result<bool, WindingError> {
    let curve = curve.to_chart(Chart::North)?;
    Ok(winding_number(&curve, south)? != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_circle() -> SampledCurve {
        SampledCurve::circle(c(0.0, 0.0), 1.0, 64, Chart::North)
    }

    #[test]
    fn unit_circle_examples() {
        let circle = unit_circle();
        assert_eq!(winding_number(&circle, c(0.0, 0.0)), Ok(1));
        assert_eq!(winding_number(&circle, c(3.0, 0.0)), Ok(0));
        assert_eq!(classify(&circle, c(0.0, 0.0)), Ok(Side::Inn));
        assert_eq!(classify(&circle, c(3.0, 0.0)), Ok(Side::Out));
    }

    #[test]
    fn doubled_sample_list_winds_twice() {
        let mut pts = unit_circle().points().to_vec();
        pts.extend(unit_circle().points().to_vec());
        let twice = SampledCurve::from_points(pts, Chart::North).unwrap();
        assert_eq!(winding_number(&twice, c(0.0, 0.0)), Ok(2));
    }

    #[test]
    fn circle_and_reverse_cancel() {
        // exact oracle: the analytic argument of e^{2πit} over the two halves
        // is +2π then -2π
        let fig = unit_circle().concat(&unit_circle().reversed()).unwrap();
        assert_eq!(classify(&fig, c(0.0, 0.0)), Ok(Side::Out));
        assert!(winding_sum(&fig, c(0.0, 0.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn coarse_parameterized_curve_is_refined() {
        // 8 samples of a curve winding 5 times: consecutive samples are 225°
        // apart, so the raw polyline reads -3
        let curve = SampledCurve::from_path(8, Chart::North, |t| {
            Complex64::from_polar(1.0, 5.0 * TAU * t)
        })
        .unwrap();
        assert_eq!(winding_number(&curve, c(0.0, 0.0)), Ok(5));
        let raw = SampledCurve::from_points(curve.points().to_vec(), Chart::North).unwrap();
        assert_eq!(winding_number(&raw, c(0.0, 0.0)), Ok(-3));
    }

    #[test]
    fn point_on_curve_is_rejected() {
        assert!(matches!(
            winding_number(&unit_circle(), c(1.0, 0.0)),
            Err(WindingError::PointOnCurve { .. })
        ));
    }

    #[test]
    fn essentiality_examples() {
        assert_eq!(is_essential(&unit_circle()), Ok(true));
        let off = SampledCurve::circle(c(1.0, 0.0), 0.1, 32, Chart::North);
        assert_eq!(is_essential(&off), Ok(false));
        assert_eq!(is_essential(&SampledCurve::latitude(0.5, 32)), Ok(true));
    }

    #[test]
    fn chart_swap_flips_sign() {
        let curve = SampledCurve::circle(c(0.2, 0.1), 0.8, 48, Chart::North);
        let south = curve.to_chart(Chart::South).unwrap();
        assert_eq!(winding_number(&curve, c(0.0, 0.0)), Ok(1));
        assert_eq!(winding_number(&south, c(0.0, 0.0)), Ok(-1));
    }

    #[test]
    fn too_few_samples() {
        let pts = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        assert_eq!(
            SampledCurve::from_points(pts, Chart::North).unwrap_err(),
            WindingError::TooFewSamples(3)
        );
    }

    #[test]
    fn duplicates_are_removed() {
        let mut pts = unit_circle().points().to_vec();
        pts.insert(3, pts[3]);
        pts.push(pts[0]);
        let curve = SampledCurve::from_points(pts, Chart::North).unwrap();
        assert_eq!(curve.len(), 64);
    }

    #[test]
    fn csv_fixture_round_trip() {
        let curve = SampledCurve::circle(c(0.0, 0.0), 2.0, 16, Chart::South);
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# chart=south\n"));
        let back = SampledCurve::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.chart(), Chart::South);
        assert_eq!(back.len(), 16);
        assert_eq!(winding_number(&back, c(0.0, 0.0)), Ok(1));
        assert!(SampledCurve::read_csv("1,2,3\n".as_bytes()).is_err());
    }
}
