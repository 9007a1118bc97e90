//! Double-double ("twofold") arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, which
//! gives roughly 106 bits of significand. Only the handful of operations the
//! series and Gamma code need are provided.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twofold {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Twofold = Twofold {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Twofold {
    pub const ZERO: Twofold = Twofold { hi: 0.0, lo: 0.0 };
    pub const ONE: Twofold = Twofold { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Twofold { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Twofold { hi: x, lo: 0.0 }
    }

    /// Exact ratio of two integers that fit in an f64 mantissa.
    pub fn ratio(num: f64, den: f64) -> Self {
        Twofold::from_f64(num) / Twofold::from_f64(den)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// Multiply by an exact power of two.
    pub fn ldexp(self, k: i32) -> Self {
        // two steps so that 2^k itself never overflows for |k| <= 2046
        let half = k / 2;
        let a = 2f64.powi(half);
        let b = 2f64.powi(k - half);
        Twofold::new(self.hi * a * b, self.lo * a * b)
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.8 {
            return Twofold::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Twofold::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * k;
        // r / 1024, then expm1 by Taylor and ten doublings
        let r = r.ldexp(-10);
        let mut term = r;
        let mut sum = r;
        for i in 2..=12 {
            term = term * r / (i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            // expm1(2x) = expm1(x) * (2 + expm1(x))
            sum = sum * (sum + 2.0);
        }
        (sum + 1.0).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Twofold::from_f64(f64::NAN);
        }
        let mut y = Twofold::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }
}

impl Add for Twofold {
    type Output = Twofold;
    #[inline]
    fn add(self, rhs: Twofold) -> Twofold {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Twofold { hi, lo }
    }
}

impl Add<f64> for Twofold {
    type Output = Twofold;
    #[inline]
    fn add(self, rhs: f64) -> Twofold {
        let (s, e) = two_sum(self.hi, rhs);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Twofold { hi, lo }
    }
}

impl Neg for Twofold {
    type Output = Twofold;
    #[inline]
    fn neg(self) -> Twofold {
        Twofold {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Twofold {
    type Output = Twofold;
    #[inline]
    fn sub(self, rhs: Twofold) -> Twofold {
        self + (-rhs)
    }
}

impl Sub<f64> for Twofold {
    type Output = Twofold;
    #[inline]
    fn sub(self, rhs: f64) -> Twofold {
        self + (-rhs)
    }
}

impl Mul for Twofold {
    type Output = Twofold;
    #[inline]
    fn mul(self, rhs: Twofold) -> Twofold {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Twofold { hi, lo }
    }
}

impl Mul<f64> for Twofold {
    type Output = Twofold;
    #[inline]
    fn mul(self, rhs: f64) -> Twofold {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        Twofold { hi, lo }
    }
}

impl Div for Twofold {
    type Output = Twofold;
    fn div(self, rhs: Twofold) -> Twofold {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Twofold { hi, lo } + q3
    }
}

impl Div<f64> for Twofold {
    type Output = Twofold;
    #[inline]
    fn div(self, rhs: f64) -> Twofold {
        self / Twofold::from_f64(rhs)
    }
}
