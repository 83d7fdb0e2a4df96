//! Double-double reals and complex numbers (about 106 significant bits).

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
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
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const TWO_PI: Dd = Dd { hi: 6.283185307179586, lo: 2.4492935982947064e-16 };

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, t) = two_sum(self.hi, -p);
        let t = t - e + self.lo;
        let q2 = (s + t) / b;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (h, l) = quick_two_sum(x, r);
        Dd { hi: h, lo: l }
    }

    /// `(cos 2πx, sin 2πx)` for a phase given in turns.
    pub fn cis_turns(x: Dd) -> (Dd, Dd) {
        // reduce to [-1/2, 1/2]
        let k = x.hi.round();
        let mut r = x - Dd::from_f64(k);
        let r_hi = r.to_f64();
        let q = (4.0 * r_hi).round();
        r = r - Dd::from_f64(q / 4.0);
        let a = r * TWO_PI;
        let (c, s) = taylor_cos_sin(a);
        match (q as i64).rem_euclid(4) {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        }
    }
}

fn taylor_cos_sin(a: Dd) -> (Dd, Dd) {
    let a2 = a * a;
    let mut term = Dd::ONE;
    let mut c = Dd::ONE;
    let mut k = 0.0;
    loop {
        k += 2.0;
        term = (term * a2).div_f64(k * (k - 1.0));
        term = -term;
        c = c + term;
        if term.hi.abs() < 1e-34 {
            break;
        }
    }
    let mut term = a;
    let mut s = a;
    let mut k = 1.0;
    loop {
        k += 2.0;
        term = (term * a2).div_f64(k * (k - 1.0));
        term = -term;
        s = s + term;
        if term.hi.abs() < 1e-34 {
            break;
        }
    }
    (c, s)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (h, l) = quick_two_sum(s1, s2);
        Dd { hi: h, lo: l }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    pub fn from_real(x: f64) -> Cdd {
        Cdd { re: Dd::from_f64(x), im: Dd::ZERO }
    }

    /// `exp(-2πi x)` with `x` in turns.
    pub fn expi_neg_turns(x: Dd) -> Cdd {
        let (c, s) = Dd::cis_turns(x);
        Cdd { re: c, im: -s }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt().to_f64()
    }

    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: -self.im }
    }

    pub fn scale(self, k: Dd) -> Cdd {
        Cdd { re: self.re * k, im: self.im * k }
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for Cdd {
    type Output = Cdd;
    #[inline]
    fn add(self, b: Cdd) -> Cdd {
        Cdd { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    #[inline]
    fn sub(self, b: Cdd) -> Cdd {
        Cdd { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    #[inline]
    fn mul(self, b: Cdd) -> Cdd {
        Cdd { re: self.re * b.re - self.im * b.im, im: self.re * b.im + self.im * b.re }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_beats_double() {
        let third = Dd::ONE.div_f64(3.0);
        let back = third.mul_f64(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let s = Dd::from_f64(2.0).sqrt();
        assert!((s * s - Dd::from_f64(2.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn cis_matches_libm() {
        for i in 0..200 {
            let x = -3.0 + i as f64 * 0.0371;
            let (c, s) = Dd::cis_turns(Dd::from_f64(x));
            let ang = 2.0 * std::f64::consts::PI * x;
            assert!((c.to_f64() - ang.cos()).abs() < 1e-14, "cos at {x}");
            assert!((s.to_f64() - ang.sin()).abs() < 1e-14, "sin at {x}");
            assert!(((c * c + s * s) - Dd::ONE).to_f64().abs() < 1e-30);
        }
    }

    #[test]
    fn quarter_turns_are_exact() {
        let (c, s) = Dd::cis_turns(Dd::from_f64(0.25));
        assert!(c.to_f64().abs() < 1e-32);
        assert_eq!(s.to_f64(), 1.0);
        let (c, _) = Dd::cis_turns(Dd::from_f64(0.5));
        assert_eq!(c.to_f64(), -1.0);
    }
}
