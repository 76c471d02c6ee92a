//! Second-order truncated Taylor arithmetic.
//!
//! Polynomial recurrences (Jacobi ladders, harmonic ladders) are written
//! against [`Ring`] so the same code yields values and, when fed a [`Jet`],
//! exact first and second derivatives along one parameter.

use std::ops::{Add, Mul, Neg, Sub};

pub trait Ring: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn constant(c: f64) -> Self;
    fn scale(self, c: f64) -> Self;
    fn value(self) -> f64;
}

impl Ring for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
}

/// `(f, f', f'')` of a function of one parameter at a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    /// The independent variable itself at `x`.
    pub const fn variable(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0 }
    }

    /// Derivative of order 0, 1 or 2.
    pub fn derivative(&self, order: usize) -> f64 {
        match order {
            0 => self.v,
            1 => self.d1,
            2 => self.d2,
            _ => panic!("jets carry derivatives up to order 2"),
        }
    }

    pub fn powi(self, n: usize) -> Self {
        let mut acc = Jet::constant(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.d1 * o.v + self.v * o.d1, self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Ring for Jet {
    #[inline]
    fn constant(c: f64) -> Self {
        Jet::new(c, 0.0, 0.0)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        Jet::new(self.v * c, self.d1 * c, self.d2 * c)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
}
