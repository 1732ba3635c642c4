//! Iterates of product maps `(s, θ) ↦ (q(s), dθ + h(s))` and the 1D root
//! finding they reduce to.

use std::f64::consts::PI;

use crate::charts::{MapKind, MapSpec, RadialProfile};

/// Grid resolution of the compactified line used for sign-change searches.
pub const GRID_POINTS: usize = 10_000;

/// `fⁿ` for a product base map `f`.
#[derive(Clone, Debug)]
pub(crate) struct ProductIterate<'a> {
    pub radial: &'a RadialProfile,
    pub d: i32,
    pub twist: &'a RadialProfile,
    pub n: u32,
}

impl<'a> ProductIterate<'a> {
    pub fn from_map(map: &'a MapSpec) -> Option<Self> {
        Self::with_extra_iterates(map, 1)
    }

    /// `map` composed `times` times.
    pub fn with_extra_iterates(map: &'a MapSpec, times: u32) -> Option<Self> {
        let (base, n) = map.flatten();
        match base.kind() {
            MapKind::Product {
                radial,
                angular_degree,
                twist,
            } => Some(ProductIterate {
                radial,
                d: *angular_degree,
                twist,
                n: n * times,
            }),
            _ => None,
        }
    }

    /// Angular degree `dⁿ`.
    pub fn angular_degree(&self) -> f64 {
        (self.d as f64).powi(self.n as i32)
    }

    /// `qⁿ(s)`; infinities propagate through the end limits.
    pub fn radial_image(&self, s: f64) -> f64 {
        (0..self.n).fold(s, |v, _| self.radial.eval(v))
    }

    /// `Σₖ d^{n−1−k} h(qᵏ(s))`, the additive part of the image angle.
    pub fn angle_offset(&self, s: f64) -> f64 {
        let mut v = s;
        let mut total = 0.0;
        for _ in 0..self.n {
            total = self.d as f64 * total + self.twist.eval(v);
            v = self.radial.eval(v);
            if !v.is_finite() {
                break;
            }
        }
        total
    }

    /// Finite latitudes sent to a pole by `qⁿ`, ascending.
    pub fn pole_latitudes(&self) -> Vec<f64> {
        let direct: Vec<f64> = self.radial.pole_levels().iter().map(|&(s, _)| s).collect();
        let mut current = direct.clone();
        for _ in 1..self.n {
            let mut next = direct.clone();
            for &u in &current {
                next.extend(solve_level(self.radial, u));
            }
            current = sorted_unique(next);
        }
        sorted_unique(current)
    }

    /// Finite solutions of `qⁿ(s) = target` for finite `target`, ascending.
    pub fn level_set(&self, target: f64) -> Vec<f64> {
        let mut current = vec![target];
        for _ in 0..self.n {
            let mut next = Vec::new();
            for &u in &current {
                next.extend(solve_level(self.radial, u));
            }
            current = sorted_unique(next);
        }
        current
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    v
}

/// `s = tan(πt/2)` for `t ∈ (−1, 1)`.
pub(crate) fn decompactify_line(t: f64) -> f64 {
    (0.5 * PI * t).tan()
}

/// Finite solutions of `profile(s) = target`.
pub(crate) fn solve_level(profile: &RadialProfile, target: f64) -> Vec<f64> {
    if let Some(exact) = profile.exact_level_set(target) {
        return exact;
    }
    grid_roots(|s| profile.eval(s) - target)
}

/// Zeros of `g` on the real line located by sign changes on a compactified
/// grid of [`GRID_POINTS`] points and refined by bisection.
pub(crate) fn grid_roots<G: Fn(f64) -> f64>(g: G) -> Vec<f64> {
    let step = 2.0 / GRID_POINTS as f64;
    let mut roots = Vec::new();
    let mut prev_s = decompactify_line(-1.0 + step);
    let mut prev = g(prev_s);
    if prev == 0.0 {
        roots.push(prev_s);
    }
    for i in 2..GRID_POINTS {
        let s = decompactify_line(-1.0 + i as f64 * step);
        let v = g(s);
        if v == 0.0 {
            roots.push(s);
        } else if prev != 0.0 && !prev.is_nan() && !v.is_nan() && (prev < 0.0) != (v < 0.0) {
            roots.push(bisect(&g, prev_s, s, prev));
        }
        prev_s = s;
        prev = v;
    }
    sorted_unique(roots)
}

fn bisect<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
