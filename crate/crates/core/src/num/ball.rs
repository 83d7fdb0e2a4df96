//! Real balls over fixed-point big integers.
//!
//! A `Ball` with precision `p` stands for every real in
//! `[(mid - rad) / 2^p, (mid + rad) / 2^p]`. All operations return balls
//! that contain every possible exact result.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

fn pow2(p: u32) -> BigInt {
    BigInt::one() << p
}

/// floor(x / 2^p)
fn shr_floor(x: &BigInt, p: u32) -> BigInt {
    x.div_floor(&pow2(p))
}

/// round(x / 2^p), ties up
fn shr_round(x: &BigInt, p: u32) -> BigInt {
    if p == 0 {
        return x.clone();
    }
    shr_floor(&(x + (BigInt::one() << (p - 1))), p)
}

/// ceil(x / 2^p) for x >= 0
fn shr_ceil(x: &BigInt, p: u32) -> BigInt {
    -shr_floor(&-x, p)
}

fn div_ceil_pos(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Ball {
    pub fn zero(prec: u32) -> Self {
        Ball { mid: BigInt::zero(), rad: BigInt::zero(), prec }
    }

    pub fn from_int(k: &BigInt, prec: u32) -> Self {
        Ball { mid: k << prec, rad: BigInt::zero(), prec }
    }

    pub fn from_i64(k: i64, prec: u32) -> Self {
        Self::from_int(&BigInt::from(k), prec)
    }

    /// Exact rational `num / den` rounded to the nearest grid point.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let scaled = num << prec;
        let (q, r) = scaled.div_mod_floor(den);
        let rad = if r.is_zero() { BigInt::zero() } else { BigInt::one() };
        Ball { mid: q, rad, prec }
    }

    /// Raw constructor from scaled midpoint and radius.
    pub fn from_parts(mid: BigInt, rad: BigInt, prec: u32) -> Self {
        assert!(!rad.is_negative());
        Ball { mid, rad, prec }
    }

    /// Finite f64 values are dyadic rationals, so the conversion is exact
    /// whenever the precision can hold every bit.
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "non-finite input");
        let (m, e) = decompose_f64(x);
        let shift = e + prec as i64;
        if shift >= 0 {
            Ball { mid: m << (shift as u32), rad: BigInt::zero(), prec }
        } else {
            let s = (-shift) as u32;
            let q = shr_round(&m, s);
            let exact = &q << s == m;
            Ball { mid: q, rad: if exact { BigInt::zero() } else { BigInt::one() }, prec }
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }
    pub fn rad_raw(&self) -> &BigInt {
        &self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Drops the radius; used for approximate iterations whose output is
    /// certified separately.
    pub fn mid_only(&self) -> Self {
        Ball { mid: self.mid.clone(), rad: BigInt::zero(), prec: self.prec }
    }

    pub fn widen(&self, extra_raw: &BigInt) -> Self {
        Ball { mid: self.mid.clone(), rad: &self.rad + extra_raw, prec: self.prec }
    }

    pub fn set_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = prec - self.prec;
                Ball { mid: &self.mid << d, rad: &self.rad << d, prec }
            }
            Ordering::Less => {
                let d = self.prec - prec;
                let mid = shr_round(&self.mid, d);
                let rad = shr_ceil(&self.rad, d) + BigInt::one();
                Ball { mid, rad, prec }
            }
        }
    }

    fn align(&self, other: &Ball) -> (Ball, Ball) {
        let p = self.prec.max(other.prec);
        (self.set_prec(p), other.set_prec(p))
    }

    pub fn add(&self, o: &Ball) -> Ball {
        if self.prec == o.prec {
            return Ball { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad, prec: self.prec };
        }
        let (a, b) = self.align(o);
        a.add(&b)
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: -&self.mid, rad: self.rad.clone(), prec: self.prec }
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        if self.prec != o.prec {
            let (a, b) = self.align(o);
            return a.mul(&b);
        }
        let p = self.prec;
        let prod = &self.mid * &o.mid;
        let mid = shr_round(&prod, p);
        let rounding = if (&mid << p) == prod { BigInt::zero() } else { BigInt::one() };
        let err = self.mid.abs() * &o.rad + o.mid.abs() * &self.rad + &self.rad * &o.rad;
        let rad = shr_ceil(&err, p) + rounding;
        Ball { mid, rad, prec: p }
    }

    pub fn mul_int(&self, k: &BigInt) -> Ball {
        Ball { mid: &self.mid * k, rad: &self.rad * k.abs(), prec: self.prec }
    }

    pub fn mul_i64(&self, k: i64) -> Ball {
        self.mul_int(&BigInt::from(k))
    }

    pub fn sqr(&self) -> Ball {
        let b = self.mul(self);
        // the square is nonnegative; clip the lower end at zero
        if b.mid < b.rad {
            let hi = &b.mid + &b.rad;
            let mid = shr_ceil(&hi, 1);
            Ball { rad: mid.clone(), mid, prec: b.prec }
        } else {
            b
        }
    }

    /// Multiplication by 2^-k, exact up to one unit of rounding.
    pub fn div_pow2(&self, k: u32) -> Ball {
        let mid = shr_round(&self.mid, k);
        let exact = (&mid << k) == self.mid;
        let rad = shr_ceil(&self.rad, k) + if exact { BigInt::zero() } else { BigInt::one() };
        Ball { mid, rad, prec: self.prec }
    }

    /// `None` when the divisor ball contains zero.
    pub fn div(&self, o: &Ball) -> Option<Ball> {
        if self.prec != o.prec {
            let (a, b) = self.align(o);
            return a.div(&b);
        }
        let p = self.prec;
        let m2 = o.mid.abs();
        if m2 <= o.rad {
            return None;
        }
        let num = &self.mid << p;
        let q = if o.mid.is_negative() {
            -div_round(&num, &m2)
        } else {
            div_round(&num, &m2)
        };
        let denom = &m2 - &o.rad;
        let err = (&self.rad << p) + (q.abs() + BigInt::one()) * &o.rad;
        let rad = div_ceil_pos(&err, &denom) + BigInt::one();
        Some(Ball { mid: q, rad, prec: p })
    }

    pub fn div_int(&self, k: &BigInt) -> Ball {
        assert!(!k.is_zero());
        let q = div_round(&self.mid, &k.abs());
        let q = if k.is_negative() { -q } else { q };
        let rad = div_ceil_pos(&self.rad, &k.abs()) + BigInt::one();
        Ball { mid: q, rad, prec: self.prec }
    }

    pub fn recip(&self) -> Option<Ball> {
        Ball::from_i64(1, self.prec).div(self)
    }

    pub fn pow(&self, mut e: u64) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::from_i64(1, self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Square root of a ball; the part below zero is discarded.
    pub fn sqrt(&self) -> Ball {
        let p = self.prec;
        let hi = &self.mid + &self.rad;
        if !hi.is_positive() {
            return Ball::zero(p);
        }
        let lo = &self.mid - &self.rad;
        let s_hi = (&hi << p).sqrt() + BigInt::one();
        if !lo.is_positive() {
            let mid = shr_ceil(&s_hi, 1);
            return Ball { rad: mid.clone(), mid, prec: p };
        }
        let s_lo = (&lo << p).sqrt();
        let mid = (&s_lo + &s_hi) >> 1u32;
        let rad = (&s_hi - &s_lo) / BigInt::from(2) + BigInt::one();
        Ball { mid, rad, prec: p }
    }

    pub fn abs(&self) -> Ball {
        if self.mid.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn is_positive(&self) -> bool {
        self.mid > self.rad
    }
    pub fn is_negative(&self) -> bool {
        -&self.mid > self.rad
    }
    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    /// Certified comparison; `None` when the balls overlap.
    pub fn cmp_certified(&self, o: &Ball) -> Option<Ordering> {
        let d = self.sub(o);
        if d.is_positive() {
            Some(Ordering::Greater)
        } else if d.is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn mid_f64(&self) -> f64 {
        scaled_to_f64(&self.mid, self.prec)
    }

    /// Upper bound on the radius as an f64 (rounded outward).
    pub fn rad_f64(&self) -> f64 {
        let r = scaled_to_f64(&self.rad, self.prec);
        if r == 0.0 {
            0.0
        } else {
            r * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
        }
    }

    pub fn lo_f64(&self) -> f64 {
        let v = scaled_to_f64(&(&self.mid - &self.rad), self.prec);
        v - v.abs() * 4.0 * f64::EPSILON - f64::MIN_POSITIVE
    }

    pub fn hi_f64(&self) -> f64 {
        let v = scaled_to_f64(&(&self.mid + &self.rad), self.prec);
        v + v.abs() * 4.0 * f64::EPSILON + f64::MIN_POSITIVE
    }

    /// Width of the ball in ulps of the grid, in bits (log2 of 2*rad).
    pub fn rad_bits(&self) -> u64 {
        self.rad.bits()
    }

    /// Integer `k` and signed remainder `x - k` when the ball lies inside
    /// `(k - 1/2, k + 1/2)`.
    pub fn nearest_int(&self) -> Option<(BigInt, Ball)> {
        let p = self.prec;
        let k = shr_round(&self.mid, p);
        let eps = Ball { mid: &self.mid - (&k << p), rad: self.rad.clone(), prec: p };
        let half = pow2(p) >> 1u32;
        if eps.mid.abs() + &eps.rad < half {
            Some((k, eps))
        } else {
            None
        }
    }

    /// Fractional part in `[0, 1)` together with the floor, when the ball
    /// does not straddle an integer.
    pub fn floor_frac(&self) -> Option<(BigInt, Ball)> {
        let p = self.prec;
        let lo = &self.mid - &self.rad;
        let hi = &self.mid + &self.rad;
        let fl = shr_floor(&lo, p);
        if shr_floor(&hi, p) != fl {
            return None;
        }
        let frac = Ball { mid: &self.mid - (&fl << p), rad: self.rad.clone(), prec: p };
        Some((fl, frac))
    }

    /// Representative of `self mod 1` that never splits at an integer:
    /// the centred remainder when one exists, else the fractional part.
    pub fn mod_one(&self) -> Option<Ball> {
        match self.nearest_int() {
            Some((_, eps)) => Some(eps),
            None => self.floor_frac().map(|(_, f)| f),
        }
    }

    /// Upper bound on the distance to the nearest integer.
    pub fn dist_int_upper(&self) -> f64 {
        let p = self.prec;
        let k = shr_round(&self.mid, p);
        let e = (&self.mid - (&k << p)).abs() + &self.rad;
        scaled_to_f64(&e, p).min(0.5)
    }

    /// Lower bound on the distance to the nearest integer.
    pub fn dist_int_lower(&self) -> f64 {
        match self.nearest_int() {
            Some((_, eps)) => {
                let lo = eps.mid.abs() - &eps.rad;
                if lo.is_positive() {
                    scaled_to_f64(&lo, self.prec)
                } else {
                    0.0
                }
            }
            None => {
                // straddles a half-integer: distance is near 1/2
                let p = self.prec;
                let half = pow2(p) >> 1u32;
                let k = shr_floor(&self.mid, p);
                let off = (&self.mid - (&k << p) - &half).abs() + &self.rad;
                let d = &half - off;
                if d.is_positive() {
                    scaled_to_f64(&d, p)
                } else {
                    0.0
                }
            }
        }
    }
}

fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    // den > 0
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * &two))
}

/// Splits a finite f64 into `m * 2^e` with integer `m`.
pub fn decompose_f64(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { Sign::Minus } else { Sign::Plus };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    (BigInt::from_biguint(sign, m.into()), e)
}

/// Converts `x / 2^p` to f64 with correct magnitude for huge `x`.
pub fn scaled_to_f64(x: &BigInt, p: u32) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        let v = x.to_f64().unwrap_or(0.0);
        return v * 2f64.powi(-(p.min(1000) as i32)) * 2f64.powi(-((p.saturating_sub(1000)) as i32));
    }
    let drop = bits - 64;
    let top = (x >> drop).to_f64().unwrap_or(0.0);
    top * 2f64.powf(drop as f64 - p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64) -> Ball {
        Ball::from_f64(x, 80)
    }

    #[test]
    fn arithmetic_encloses() {
        let x = b(1.5).add(&b(0.25));
        assert_eq!(x.mid_f64(), 1.75);
        assert!(x.is_exact());
        let y = b(3.0).div(&b(7.0)).unwrap();
        assert!(y.lo_f64() <= 3.0 / 7.0 && 3.0 / 7.0 <= y.hi_f64());
        let s = Ball::from_i64(2, 100).sqrt();
        assert!((s.mid_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert!(s.lo_f64() <= 2f64.sqrt() && 2f64.sqrt() <= s.hi_f64());
    }

    #[test]
    fn divisor_containing_zero() {
        let z = Ball::from_parts(BigInt::from(1), BigInt::from(2), 10);
        assert!(b(1.0).div(&z).is_none());
    }

    #[test]
    fn nearest_int_and_frac() {
        let x = b(2.302775637731995);
        let (k, e) = x.nearest_int().unwrap();
        assert_eq!(k, BigInt::from(2));
        assert!((e.mid_f64() - 0.302775637731995).abs() < 1e-15);
        let (f, fr) = b(-0.25).floor_frac().unwrap();
        assert_eq!(f, BigInt::from(-1));
        assert_eq!(fr.mid_f64(), 0.75);
        assert!(Ball::from_ratio(&BigInt::from(1), &BigInt::from(2), 30).nearest_int().is_none());
    }

    #[test]
    fn precision_changes_keep_enclosure() {
        let third = Ball::from_ratio(&BigInt::from(1), &BigInt::from(3), 200);
        let low = third.set_prec(20);
        assert!(low.lo_f64() <= 1.0 / 3.0 && 1.0 / 3.0 <= low.hi_f64());
        let back = low.set_prec(200);
        assert!(back.cmp_certified(&third).is_none());
    }
}
