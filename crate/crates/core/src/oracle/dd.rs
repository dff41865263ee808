//! Double-double floats: an unevaluated sum `hi + lo` carrying about 106
//! bits of mantissa.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::algebra::Q;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

/// Complex double-double.
pub type CDD = Complex<DD>;

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

impl DD {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DD { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn from_bigint(n: &BigInt) -> Self {
        let hi = n.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return DD::from_f64(hi);
        }
        let rest = n - BigInt::from_f64(hi).unwrap_or_default();
        let lo = rest.to_f64().unwrap_or(0.0);
        let (h, l) = quick_two_sum(hi, lo);
        DD { hi: h, lo: l }
    }

    pub fn from_q(q: &Q) -> Self {
        DD::from_bigint(q.numer()) / DD::from_bigint(q.denom())
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DD::zero();
        }
        let q = self.hi.sqrt();
        let (p, e) = two_prod(q, q);
        let r = (self - DD::new(p, e)).hi;
        let (h, l) = quick_two_sum(q, r / (2.0 * q));
        DD { hi: h, lo: l }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

impl fmt::Debug for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl fmt::Display for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            c => c,
        }
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, o: DD) -> DD {
        self + (-o)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self - o * DD::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DD::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from_f64(q3)
    }
}

impl Rem for DD {
    type Output = DD;
    fn rem(self, o: DD) -> DD {
        let q = (self / o).to_f64().trunc();
        self - o * DD::from_f64(q)
    }
}

impl AddAssign for DD {
    fn add_assign(&mut self, o: DD) {
        *self = *self + o;
    }
}

impl SubAssign for DD {
    fn sub_assign(&mut self, o: DD) {
        *self = *self - o;
    }
}

impl MulAssign for DD {
    fn mul_assign(&mut self, o: DD) {
        *self = *self * o;
    }
}

impl Zero for DD {
    fn zero() -> Self {
        DD { hi: 0.0, lo: 0.0 }
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DD {
    fn one() -> Self {
        DD { hi: 1.0, lo: 0.0 }
    }
}

impl Num for DD {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(DD::from_f64)
    }
}

impl Signed for DD {
    fn abs(&self) -> Self {
        DD::abs(*self)
    }
    fn abs_sub(&self, o: &Self) -> Self {
        if *self > *o {
            *self - *o
        } else {
            DD::zero()
        }
    }
    fn signum(&self) -> Self {
        DD::from_f64(self.hi.signum())
    }
    fn is_positive(&self) -> bool {
        self.hi > 0.0
    }
    fn is_negative(&self) -> bool {
        self.hi < 0.0
    }
}

pub fn cdd(re: DD) -> CDD {
    Complex::new(re, DD::zero())
}

pub fn cdd_q(q: &Q) -> CDD {
    cdd(DD::from_q(q))
}

pub fn cdd_f64(z: Complex<f64>) -> CDD {
    Complex::new(DD::from_f64(z.re), DD::from_f64(z.im))
}

pub fn to_c64(z: CDD) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn cabs(z: CDD) -> DD {
    z.norm_sqr().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_is_accurate() {
        let t = DD::one() / DD::from_f64(3.0);
        let back = t * DD::from_f64(3.0) - DD::one();
        assert!(back.to_f64().abs() < 1e-31);
        assert!(t.lo != 0.0);
    }

    #[test]
    fn sqrt_two() {
        let s = DD::from_f64(2.0).sqrt();
        assert!((s * s - DD::from_f64(2.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn rational_conversion() {
        let q = Q::new(BigInt::from(1), BigInt::from(7));
        let x = DD::from_q(&q) * DD::from_f64(7.0) - DD::one();
        assert!(x.to_f64().abs() < 1e-31);
    }
}
