//! Truncated Taylor jets carrying `u`, `∂u/∂t`, `∂u/∂x` and `∂²u/∂x²`.

use std::ops::{Add, Mul, Neg, Sub};

/// A value together with its first `t`, first `x` and second `x` derivative
/// coefficients with respect to the network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub dt: f64,
    pub dx: f64,
    pub dxx: f64,
}

/// Selects one coefficient of a [`Jet2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Value,
    Dt,
    Dx,
    Dxx,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2::constant(0.0);

    pub const fn new(v: f64, dt: f64, dx: f64, dxx: f64) -> Self {
        Jet2 { v, dt, dx, dxx }
    }

    /// Lifts a constant: all derivative coefficients are zero.
    pub const fn constant(c: f64) -> Self {
        Jet2::new(c, 0.0, 0.0, 0.0)
    }

    /// Seeds the time input.
    pub const fn seed_t(t: f64) -> Self {
        Jet2::new(t, 1.0, 0.0, 0.0)
    }

    /// Seeds the space input.
    pub const fn seed_x(x: f64) -> Self {
        Jet2::new(x, 0.0, 1.0, 0.0)
    }

    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Value => self.v,
            Component::Dt => self.dt,
            Component::Dx => self.dx,
            Component::Dxx => self.dxx,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.dt.is_finite() && self.dx.is_finite() && self.dxx.is_finite()
    }

    /// True when every derivative coefficient is exactly zero.
    pub fn is_constant(&self) -> bool {
        self.dt == 0.0 && self.dx == 0.0 && self.dxx == 0.0
    }

    pub fn scale(self, a: f64) -> Self {
        Jet2::new(a * self.v, a * self.dt, a * self.dx, a * self.dxx)
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    #[inline]
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Jet2::new(f, df * self.dt, df * self.dx, df * self.dxx + d2f * self.dx * self.dx)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let s = 1.0 - t * t;
        self.chain(t, s, -2.0 * t * s)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn dot(&self, other: &Jet2) -> f64 {
        self.v * other.v + self.dt * other.dt + self.dx * other.dx + self.dxx * other.dxx
    }
}

impl From<f64> for Jet2 {
    fn from(c: f64) -> Self {
        Jet2::constant(c)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, b: Jet2) -> Jet2 {
        Jet2::new(self.v + b.v, self.dt + b.dt, self.dx + b.dx, self.dxx + b.dxx)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, b: Jet2) -> Jet2 {
        Jet2::new(self.v - b.v, self.dt - b.dt, self.dx - b.dx, self.dxx - b.dxx)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        Jet2::new(-self.v, -self.dt, -self.dx, -self.dxx)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, b: Jet2) -> Jet2 {
        Jet2::new(
            self.v * b.v,
            self.dt * b.v + self.v * b.dt,
            self.dx * b.v + self.v * b.dx,
            self.dxx * b.v + 2.0 * self.dx * b.dx + self.v * b.dxx,
        )
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, a: f64) -> Jet2 {
        self.scale(a)
    }
}
