//! Forward-mode automatic differentiation with a fixed 6-slot gradient,
//! sized for the six equinoctial state variables.  One evaluation of a scalar
//! expression over [`Dual6`] yields its value and full gradient, which is how
//! the costate rates (gradients of the Hamiltonian terms) are produced.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric scalar abstraction so the dynamics can run on plain floats or on
/// dual numbers without duplication.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual6 {
    pub re: f64,
    pub eps: [f64; 6],
}

impl Dual6 {
    pub const fn constant(v: f64) -> Self {
        Dual6 {
            re: v,
            eps: [0.0; 6],
        }
    }

    /// Independent variable number `slot`.
    pub fn variable(v: f64, slot: usize) -> Self {
        let mut eps = [0.0; 6];
        eps[slot] = 1.0;
        Dual6 { re: v, eps }
    }
}

impl Add for Dual6 {
    type Output = Dual6;
    fn add(self, o: Dual6) -> Dual6 {
        let mut eps = self.eps;
        for (e, oe) in eps.iter_mut().zip(o.eps) {
            *e += oe;
        }
        Dual6 {
            re: self.re + o.re,
            eps,
        }
    }
}

impl Sub for Dual6 {
    type Output = Dual6;
    fn sub(self, o: Dual6) -> Dual6 {
        let mut eps = self.eps;
        for (e, oe) in eps.iter_mut().zip(o.eps) {
            *e -= oe;
        }
        Dual6 {
            re: self.re - o.re,
            eps,
        }
    }
}

impl Mul for Dual6 {
    type Output = Dual6;
    // The product rule genuinely adds inside a Mul impl.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Dual6) -> Dual6 {
        let eps = std::array::from_fn(|k| self.re * o.eps[k] + self.eps[k] * o.re);
        Dual6 {
            re: self.re * o.re,
            eps,
        }
    }
}

impl Div for Dual6 {
    type Output = Dual6;
    fn div(self, o: Dual6) -> Dual6 {
        let inv2 = 1.0 / (o.re * o.re);
        let eps = std::array::from_fn(|k| (self.eps[k] * o.re - self.re * o.eps[k]) * inv2);
        Dual6 {
            re: self.re / o.re,
            eps,
        }
    }
}

impl Neg for Dual6 {
    type Output = Dual6;
    fn neg(self) -> Dual6 {
        let mut eps = self.eps;
        for e in &mut eps {
            *e = -*e;
        }
        Dual6 { re: -self.re, eps }
    }
}

impl Real for Dual6 {
    fn from_f64(v: f64) -> Self {
        Dual6::constant(v)
    }
    fn value(self) -> f64 {
        self.re
    }
    fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        let mut eps = self.eps;
        for e in &mut eps {
            *e *= c;
        }
        Dual6 { re: s, eps }
    }
    fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        let mut eps = self.eps;
        for e in &mut eps {
            *e *= -s;
        }
        Dual6 { re: c, eps }
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        let d = 0.5 / r;
        let mut eps = self.eps;
        for e in &mut eps {
            *e *= d;
        }
        Dual6 { re: r, eps }
    }
}
