//! Error-free-transformation (double-double) arithmetic for the compensated
//! hypergeometric series.
//!
//! A `Dd` value represents hi + lo with |lo| ≤ ulp(hi)/2, giving ~31 decimal
//! digits. The confluent series at complex parameters of size ~10i loses up
//! to ~24 digits to cancellation near the series/asymptotics crossover, so
//! plain f64 accumulation is not enough; double-double keeps ~7 digits of
//! headroom past the target tolerance.
//!
//! Algorithms follow Dekker (1971) and Hida, Li & Bailey (2001).

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

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
    let err = b - (s - a);
    (s, err)
}

/// Exact product via fused multiply-add: a*b = p + err.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, other: Dd) -> Dd {
        self + (-other)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self - other * Dd::from_f64(q1);
        let q2 = r.hi / other.hi;
        let r = r - other * Dd::from_f64(q2);
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }
}

/// Complex double-double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn from_c64(z: Complex64) -> Cdd {
        Cdd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// |z|² in leading precision; enough for termination tests.
    #[inline]
    pub fn norm_sqr_hi(self) -> f64 {
        let r = self.re.to_f64();
        let i = self.im.to_f64();
        r * r + i * i
    }
}

impl std::ops::Add for Cdd {
    type Output = Cdd;
    #[inline]
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl std::ops::Mul for Cdd {
    type Output = Cdd;
    #[inline]
    fn mul(self, o: Cdd) -> Cdd {
        Cdd { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl std::ops::Div for Cdd {
    type Output = Cdd;
    #[inline]
    fn div(self, o: Cdd) -> Cdd {
        let den = o.re * o.re + o.im * o.im;
        Cdd { re: (self.re * o.re + self.im * o.im) / den, im: (self.im * o.re - self.re * o.im) / den }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_lost_bits() {
        let a = Dd::from_f64(1.0);
        let b = Dd::from_f64(1e-20);
        let s = a + b;
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-20);
        let back = s - a;
        assert_eq!(back.to_f64(), 1e-20);
    }

    #[test]
    fn mul_is_exact_for_representable_products() {
        let a = Dd::from_f64(1.0 + 2f64.powi(-30));
        let b = Dd::from_f64(1.0 - 2f64.powi(-30));
        let p = a * b;
        // (1+e)(1-e) = 1 - e^2 exactly, e^2 = 2^-60
        assert_eq!(p.hi, 1.0 - 2f64.powi(-60));
    }

    #[test]
    fn div_round_trips() {
        let a = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
        let b = Dd::from_f64(7.3);
        let q = a / b;
        let r = q * b - a;
        assert!(r.to_f64().abs() < 1e-30);
    }

    #[test]
    fn complex_mul_matches_f64_at_leading_order() {
        let x = Cdd::from_c64(Complex64::new(1.5, -2.25));
        let y = Cdd::from_c64(Complex64::new(-0.75, 3.5));
        let z = (x * y).to_c64();
        let z64 = Complex64::new(1.5, -2.25) * Complex64::new(-0.75, 3.5);
        assert!((z - z64).norm() < 1e-15 * z64.norm());
    }
}
