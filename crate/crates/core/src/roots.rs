//! Simultaneous polynomial root finding (Aberth–Ehrlich).
//!
//! The solver only needs the value and derivative of the polynomial, so
//! iterated maps can be solved without expanding their coefficients.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::algebra::{horner_with_derivative, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("Aberth iteration did not converge after {sweeps} sweeps (worst step {worst:e})")]
    NotConverged { sweeps: usize, worst: f64 },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
}

const MAX_SWEEPS: usize = 2000;
const STEP_TOLERANCE: f64 = 1e-14;

/// All `count` roots of the polynomial whose value and derivative are
/// returned by `eval`. Initial guesses sit on a circle of radius `radius`.
pub(crate) fn aberth<F>(count: usize, eval: F, radius: f64) -> Result<Vec<C64>, RootError>
where
    F: Fn(C64) -> (C64, C64),
{
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut z: Vec<C64> = (0..count)
        .map(|k| C64::from_polar(radius, TAU * k as f64 / count as f64 + 0.4))
        .collect();
    let mut done = vec![false; count];
    let mut worst = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        worst = 0.0f64;
        for k in 0..count {
            if done[k] {
                continue;
            }
            let (p, dp) = eval(z[k]);
            if p == C64::new(0.0, 0.0) {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..count)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                // stalled on a critical point or overflowed: nudge and retry
                z[k] = z[k] * C64::from_polar(0.9, 0.3) + C64::new(1e-3, 1e-3);
                worst = f64::INFINITY;
                continue;
            }
            z[k] -= step;
            let rel = step.norm() / z[k].norm().max(1.0);
            worst = worst.max(rel);
            if rel < STEP_TOLERANCE {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(polish(z, &eval));
        }
        // after a while accept roots that stopped improving at round-off level
        if sweep > 200 && worst < 1e-11 {
            return Ok(polish(z, &eval));
        }
    }
    Err(RootError::NotConverged {
        sweeps: MAX_SWEEPS,
        worst,
    })
}

fn polish<F>(mut z: Vec<C64>, eval: &F) -> Vec<C64>
where
    F: Fn(C64) -> (C64, C64),
{
    for root in z.iter_mut() {
        let (mut p, _) = eval(*root);
        for _ in 0..3 {
            let (_, dp) = eval(*root);
            let candidate = *root - p / dp;
            if !(candidate.re.is_finite() && candidate.im.is_finite()) {
                break;
            }
            let (pc, _) = eval(candidate);
            if pc.norm() < p.norm() {
                *root = candidate;
                p = pc;
            } else {
                break;
            }
        }
    }
    z
}

/// Roots of `Σ cₖ zᵏ` (ascending coefficients, formal degree
/// `coefficients.len() - 1`).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct PolynomialRoots {
    pub finite: Vec<C64>,
    /// Degree deficit: how many roots were lost to infinity.
    pub at_infinity: usize,
}

pub(crate) fn polynomial_roots(coefficients: &[C64]) -> Result<PolynomialRoots, RootError> {
    let scale = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(RootError::ZeroPolynomial);
    }
    let negligible = |c: &C64| c.norm() <= 1e-15 * scale;
    let top = coefficients
        .iter()
        .rposition(|c| !negligible(c))
        .expect("nonzero polynomial");
    let at_infinity = coefficients.len() - 1 - top;
    let low = coefficients.iter().position(|c| !negligible(c)).unwrap();
    let reduced = &coefficients[low..=top];
    let degree = reduced.len() - 1;
    let mut finite = vec![C64::new(0.0, 0.0); low];
    if degree > 0 {
        let radius = (reduced[0].norm() / reduced[degree].norm()).powf(1.0 / degree as f64);
        let roots = aberth(degree, |z| horner_with_derivative(reduced, z), radius)?;
        finite.extend(roots);
    }
    Ok(PolynomialRoots {
        finite,
        at_infinity,
    })
}
