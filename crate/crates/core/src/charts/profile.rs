use super::ChartError;

/// A real function of log-latitude `s`, extended to `s = ±∞` by its limits.
///
/// Values may be `±∞` at finite `s` (piecewise-linear breakpoints only):
/// those are the latitudes sent onto a pole.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialProfile {
    /// `s ↦ a s + b`
    Affine { a: f64, b: f64 },
    /// Linear between consecutive `(s, value)` breakpoints, extended past
    /// both ends by the end segments.
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
    /// `s ↦ Σ cₖ sᵏ`, coefficients in ascending order.
    Poly { coefficients: Vec<f64> },
}

/// `v ↦ v / (1 + |v|)`, sending `[-∞, ∞]` onto `[-1, 1]`.
fn compactify(v: f64) -> f64 {
    if v.is_infinite() {
        v.signum()
    } else {
        v / (1.0 + v.abs())
    }
}

fn decompactify(k: f64) -> f64 {
    if k >= 1.0 {
        f64::INFINITY
    } else if k <= -1.0 {
        f64::NEG_INFINITY
    } else {
        k / (1.0 - k.abs())
    }
}

impl RadialProfile {
    pub fn zero() -> Self {
        RadialProfile::Affine { a: 0.0, b: 0.0 }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        RadialProfile::Affine { a, b }
    }

    /// Radial dilation `r ↦ factor · r` in polar coordinates, i.e.
    /// `s ↦ s + ln factor`.
    pub fn dilation(factor: f64) -> Result<Self, ChartError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(ChartError::InvalidProfile(format!(
                "dilation factor must be positive, got {factor}"
            )));
        }
        Ok(RadialProfile::Affine {
            a: 1.0,
            b: factor.ln(),
        })
    }

    pub fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Result<Self, ChartError> {
        if breakpoints.len() < 2 {
            return Err(ChartError::InvalidProfile(
                "piecewise-linear profile needs at least two breakpoints".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if w[0].0 >= w[1].0 || !w[0].0.is_finite() || !w[1].0.is_finite() {
                return Err(ChartError::InvalidProfile(
                    "breakpoint abscissae must be finite and strictly increasing".into(),
                ));
            }
            if w[0].1.is_infinite() && w[0].1 == w[1].1 {
                return Err(ChartError::InvalidProfile(
                    "consecutive breakpoints at the same pole level".into(),
                ));
            }
        }
        let n = breakpoints.len();
        for &(_, v) in [
            &breakpoints[0],
            &breakpoints[1],
            &breakpoints[n - 2],
            &breakpoints[n - 1],
        ] {
            if !v.is_finite() {
                return Err(ChartError::InvalidProfile(
                    "the two end segments must have finite values".into(),
                ));
            }
        }
        if breakpoints.iter().any(|&(_, v)| v.is_nan()) {
            return Err(ChartError::InvalidProfile("NaN breakpoint value".into()));
        }
        Ok(RadialProfile::PiecewiseLinear { breakpoints })
    }

    pub fn poly(coefficients: Vec<f64>) -> Result<Self, ChartError> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(ChartError::InvalidProfile(
                "polynomial profile needs finite coefficients".into(),
            ));
        }
        Ok(RadialProfile::Poly { coefficients })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RadialProfile::Affine { a, b } => *a == 0.0 && *b == 0.0,
            RadialProfile::Poly { coefficients } => coefficients.iter().all(|&c| c == 0.0),
            RadialProfile::PiecewiseLinear { breakpoints } => {
                breakpoints.iter().all(|&(_, v)| v == 0.0)
            }
        }
    }

    /// Limits as `s → -∞` and `s → +∞`.
    pub fn end_limits(&self) -> (f64, f64) {
        match self {
            RadialProfile::Affine { a, b } => {
                if *a > 0.0 {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else if *a < 0.0 {
                    (f64::INFINITY, f64::NEG_INFINITY)
                } else {
                    (*b, *b)
                }
            }
            RadialProfile::PiecewiseLinear { breakpoints } => {
                let n = breakpoints.len();
                let lo = slope_limit(breakpoints[0], breakpoints[1], -1.0);
                let hi = slope_limit(breakpoints[n - 2], breakpoints[n - 1], 1.0);
                (lo, hi)
            }
            RadialProfile::Poly { coefficients } => {
                let Some(deg) = coefficients.iter().rposition(|&c| c != 0.0) else {
                    return (0.0, 0.0);
                };
                if deg == 0 {
                    return (coefficients[0], coefficients[0]);
                }
                let lead = coefficients[deg].signum();
                let hi = lead * f64::INFINITY;
                let lo = if deg % 2 == 0 { hi } else { -hi };
                (lo, hi)
            }
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s == f64::NEG_INFINITY {
            return self.end_limits().0;
        }
        if s == f64::INFINITY {
            return self.end_limits().1;
        }
        match self {
            RadialProfile::Affine { a, b } => a * s + b,
            RadialProfile::Poly { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, &c| acc * s + c)
            }
            RadialProfile::PiecewiseLinear { breakpoints } => {
                let n = breakpoints.len();
                let i = match breakpoints.iter().position(|&(x, _)| x > s) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => n - 2,
                };
                let (s0, v0) = breakpoints[i];
                let (s1, v1) = breakpoints[i + 1];
                let t = (s - s0) / (s1 - s0);
                if v0.is_finite() && v1.is_finite() {
                    v0 + t * (v1 - v0)
                } else {
                    let (k0, k1) = (compactify(v0), compactify(v1));
                    decompactify(k0 + t * (k1 - k0))
                }
            }
        }
    }

    /// Latitudes where the profile takes the value `±∞` at finite `s`.
    pub fn pole_levels(&self) -> Vec<(f64, f64)> {
        match self {
            RadialProfile::PiecewiseLinear { breakpoints } => breakpoints
                .iter()
                .copied()
                .filter(|(_, v)| v.is_infinite())
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Exact solutions of `profile(s) = target`, when the profile kind admits
    /// a closed form. `None` means the caller must search numerically.
    pub(crate) fn exact_level_set(&self, target: f64) -> Option<Vec<f64>> {
        match self {
            RadialProfile::Affine { a, b } => {
                if *a == 0.0 {
                    return None;
                }
                Some(vec![(target - b) / a])
            }
            RadialProfile::PiecewiseLinear { breakpoints } => {
                let n = breakpoints.len();
                let kt = compactify(target);
                let mut out = Vec::new();
                for i in 0..n - 1 {
                    let (s0, v0) = breakpoints[i];
                    let (s1, v1) = breakpoints[i + 1];
                    let (lo_open, hi_open) = (i == 0, i == n - 2);
                    let t = if v0.is_finite() && v1.is_finite() {
                        if v1 == v0 {
                            if v0 == target {
                                return None;
                            }
                            continue;
                        }
                        (target - v0) / (v1 - v0)
                    } else {
                        let (k0, k1) = (compactify(v0), compactify(v1));
                        (kt - k0) / (k1 - k0)
                    };
                    let inside_lo = lo_open || t >= 0.0;
                    let inside_hi = if hi_open { true } else { t < 1.0 };
                    if inside_lo && inside_hi {
                        out.push(s0 + t * (s1 - s0));
                    }
                }
                out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                Some(out)
            }
            RadialProfile::Poly { .. } => None,
        }
    }
}

fn slope_limit(a: (f64, f64), b: (f64, f64), direction: f64) -> f64 {
    let slope = (b.1 - a.1) / (b.0 - a.0);
    if slope == 0.0 {
        a.1
    } else {
        direction * slope.signum() * f64::INFINITY
    }
}
