//! Double-double arithmetic (about 106 bits of mantissa).
//!
//! Target reals such as `cbrt(2)` are evaluated once in this format, and the
//! Littlewood scans form `n * u` from the two limbs so that the fractional
//! part stays accurate far beyond what a single `f64` product gives.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
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

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn round(self) -> Self {
        let r = self.hi.round();
        if r == self.hi {
            // hi is already an integer; the low limb decides ties.
            let lr = self.lo.round();
            DoubleDouble::new(r, lr)
        } else if (r - self.hi).abs() == 0.5 {
            // half-way on the high limb: lo breaks the tie
            let up = if self.lo > 0.0 {
                self.hi.ceil()
            } else {
                self.hi.floor()
            };
            DoubleDouble::from_f64(up)
        } else {
            DoubleDouble::from_f64(r)
        }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = DoubleDouble::ONE;
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    /// Square root via two Newton steps from the `f64` estimate.
    pub fn sqrt(self) -> Option<Self> {
        if self.hi < 0.0 {
            return None;
        }
        if self.hi == 0.0 {
            return Some(DoubleDouble::ZERO);
        }
        let mut y = DoubleDouble::from_f64(self.hi.sqrt());
        for _ in 0..2 {
            y = y + (self - y * y) / (y * DoubleDouble::from_f64(2.0));
        }
        Some(y)
    }

    /// Real cube root via Newton steps on `y^3 - x`.
    pub fn cbrt(self) -> Self {
        if self.hi == 0.0 {
            return DoubleDouble::ZERO;
        }
        if self.hi < 0.0 {
            return -(-self).cbrt();
        }
        let mut y = DoubleDouble::from_f64(self.hi.cbrt());
        let three = DoubleDouble::from_f64(3.0);
        for _ in 0..2 {
            let y2 = y * y;
            y = y - (y2 * y - self) / (three * y2);
        }
        y
    }

    /// `<n x>`, the distance from `n * x` to the nearest integer, for `n < 2^53`.
    pub fn frac_dist_mul(self, n: u64) -> f64 {
        let nf = n as f64;
        let (ph, pl) = two_prod(nf, self.hi);
        let head = ph - ph.round();
        let rest = pl + nf * self.lo;
        let f = head + rest;
        (f - f.round()).abs()
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * DoubleDouble::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DoubleDouble::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + DoubleDouble::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            c => c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cbrt_two_cubes_back() {
        let two = DoubleDouble::from_f64(2.0);
        let c = two.cbrt();
        let err = (c * c * c - two).abs();
        assert!(err.to_f64() < 1e-30, "{err:?}");
        // 1.25992104989487316476721060727822835057...
        assert!((c.hi - 1.2599210498948732).abs() < 1e-16);
    }

    #[test]
    fn sqrt_five_squares_back() {
        let five = DoubleDouble::from_f64(5.0);
        let s = five.sqrt().unwrap();
        assert!((s * s - five).abs().to_f64() < 1e-30);
        assert!(DoubleDouble::from_f64(-1.0).sqrt().is_none());
    }

    #[test]
    fn division_is_accurate() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0) - DoubleDouble::ONE;
        assert!(back.abs().to_f64() < 1e-31);
    }

    #[test]
    fn frac_dist_of_large_multiples() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        assert!(third.frac_dist_mul(3_000_000) < 1e-20);
        assert!((third.frac_dist_mul(1_000_000) - 1.0 / 3.0).abs() < 1e-12);
    }
}
