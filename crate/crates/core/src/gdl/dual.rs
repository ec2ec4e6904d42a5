//! Dual numbers `a + b ε` with `ε² = 0`, equivalently `[[a, b], [0, a]]`.
//!
//! Written in polar-like form `a∠t` with angle `t = b / a`, the product
//! multiplies magnitudes and adds angles, so a ring-product of `f_i∠log q_i`
//! carries `Σ log q_i` alongside `Π f_i`.

use std::fmt;
use std::ops::{Add, Mul};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub a: f64,
    pub b: f64,
}

impl Dual {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    /// Builds `a∠t`, i.e. dual part `a * t`.
    pub fn from_angle(a: f64, t: f64) -> Self {
        Self { a, b: a * t }
    }

    /// `b / a`; undefined (NaN or infinite) when `a == 0`.
    pub fn angle(&self) -> f64 {
        self.b / self.a
    }

    /// The 2×2 upper-triangular matrix form.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [0.0, self.a]]
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.a + o.a, self.b + o.b)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.a * o.a, self.a * o.b + o.a * self.b)
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}∠{}", self.a, self.angle())
    }
}
