//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries `(u, u', u'')` of a scalar function of one variable and
//! propagates them exactly through arithmetic and elementary functions. All
//! profile derivatives in the crate are produced this way; finite differences
//! are only ever used as an independent check.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    /// The independent variable itself.
    pub const fn variable(at: f64) -> Self {
        Self::new(at, 1.0, 0.0)
    }

    /// Compose with a scalar function given its value and first two derivatives at `self.value`.
    #[inline]
    pub fn chain(self, g: f64, g1: f64, g2: f64) -> Self {
        Self::new(g, g1 * self.d1, g2 * self.d1 * self.d1 + g1 * self.d2)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    /// `self^p` for a constant exponent.
    pub fn powf(self, p: f64) -> Self {
        let v = self.value;
        if p == 0.0 {
            return Self::constant(1.0);
        }
        if p == 1.0 {
            return self;
        }
        if p == 2.0 {
            return self * self;
        }
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    /// `self^other` with both arguments varying; requires a positive base.
    pub fn pow(self, other: Jet) -> Self {
        if other.d1 == 0.0 && other.d2 == 0.0 {
            return self.powf(other.value);
        }
        (other * self.ln()).exp()
    }

    pub fn abs(self) -> Self {
        if self.value < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.value, c * self.d1, c * self.d2)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = o.chain(1.0 / o.value, -1.0 / (o.value * o.value), 2.0 / (o.value * o.value * o.value));
        self * inv
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.d1, -self.d2)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet::new(self.value + c, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet::new(self.value - c, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn product_and_quotient_rules() {
        let x = Jet::variable(1.3);
        let p = x * x * x; // x^3
        assert!(close(p.d1, 3.0 * 1.3 * 1.3));
        assert!(close(p.d2, 6.0 * 1.3));
        let q = Jet::constant(1.0) / x; // 1/x
        assert!(close(q.d1, -1.0 / (1.3 * 1.3)));
        assert!(close(q.d2, 2.0 / (1.3f64.powi(3))));
    }

    #[test]
    fn elementary_functions() {
        let x = Jet::variable(0.7);
        let e = (x * 2.0).exp();
        assert!(close(e.d2, 4.0 * (1.4f64).exp()));
        let l = x.ln();
        assert!(close(l.d2, -1.0 / 0.49));
        let p = x.powf(-1.5);
        assert!(close(p.d2, 1.5 * 2.5 * 0.7f64.powf(-3.5)));
        let general = x.pow(x); // x^x
        let v = 0.7f64.powf(0.7);
        assert!(close(general.d1, v * (0.7f64.ln() + 1.0)));
    }
}
