//! Small complex-algebra helpers shared by the map evaluators and the
//! root finders: forward-mode derivatives, homogeneous Möbius transforms and
//! polynomial evaluation.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub(crate) type C64 = Complex64;

/// A value that supports the ring operations needed for homogeneous
/// polynomial evaluation.
pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(c: C64) -> Self;
    fn scale(self, r: f64) -> Self;
    fn magnitude(self) -> f64;

    fn powu(self, mut e: u32) -> Self {
        let mut base = self;
        let mut acc = Self::constant(C64::new(1.0, 0.0));
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Scalar for C64 {
    fn constant(c: C64) -> Self {
        c
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// A complex number carrying its derivative with respect to one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dual {
    pub v: C64,
    pub d: C64,
}

impl Dual {
    pub fn variable(v: C64) -> Self {
        Dual {
            v,
            d: C64::new(1.0, 0.0),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.v * o.d + self.d * o.v,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            d: -self.d,
        }
    }
}

impl Scalar for Dual {
    fn constant(c: C64) -> Self {
        Dual {
            v: c,
            d: C64::new(0.0, 0.0),
        }
    }
    fn scale(self, r: f64) -> Self {
        Dual {
            v: self.v * r,
            d: self.d * r,
        }
    }
    fn magnitude(self) -> f64 {
        self.v.norm()
    }
}

/// Homogeneous form `Σ cₖ xᵏ y^{D-k}` of an ascending coefficient list of
/// formal degree `D = coefficients.len() - 1`.
pub(crate) fn homogeneous_eval<T: Scalar>(coefficients: &[C64], x: T, y: T) -> T {
    let degree = coefficients.len() - 1;
    let mut acc = T::constant(coefficients[degree]);
    let mut ypow = T::constant(C64::new(1.0, 0.0));
    for k in (0..degree).rev() {
        ypow = ypow * y;
        acc = acc * x + T::constant(coefficients[k]) * ypow;
    }
    acc
}

/// Value and derivative of `Σ cₖ zᵏ` by Horner's rule.
pub(crate) fn horner_with_derivative(coefficients: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coefficients.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub(crate) fn horner(coefficients: &[C64], z: C64) -> C64 {
    coefficients
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Möbius transform `[x : y] ↦ [a x + b y : c x + d y]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mobius {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// `z ↦ 1/z`, exchanging the two charts.
    pub fn swap() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mobius {
            a: zero,
            b: one,
            c: one,
            d: zero,
        }
    }

    /// The rigid rotation of the sphere `z ↦ (z + α) / (1 - ᾱ z)`.
    pub fn rotation(alpha: C64) -> Self {
        Mobius {
            a: C64::new(1.0, 0.0),
            b: alpha,
            c: -alpha.conj(),
            d: C64::new(1.0, 0.0),
        }
    }

    #[cfg(test)]
    /// Adjugate; inverse up to a scalar, which is irrelevant projectively.
    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply<T: Scalar>(&self, x: T, y: T) -> (T, T) {
        (
            T::constant(self.a) * x + T::constant(self.b) * y,
            T::constant(self.c) * x + T::constant(self.d) * y,
        )
    }
}

/// Divide both homogeneous coordinates by the same positive constant so that
/// the larger has unit modulus. Ratios (and value/derivative ratios) are
/// unchanged.
pub(crate) fn rebalance<T: Scalar>(x: T, y: T) -> (T, T) {
    let m = x.magnitude().max(y.magnitude());
    if m > 0.0 && m.is_finite() {
        (x.scale(1.0 / m), y.scale(1.0 / m))
    } else {
        (x, y)
    }
}
