//! Brute-force root finder used as an oracle: Durand–Kerner in f64, then
//! refined in 320-bit fixed point.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

const F: usize = 320;

#[derive(Clone, Debug)]
pub struct Fx {
    pub re: BigInt,
    pub im: BigInt,
}

fn from_f64(x: f64) -> BigInt {
    let (m, e) = {
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        if exp == 0 {
            return BigInt::zero();
        }
        let mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
        (mant as i64, exp - 1075)
    };
    let v = BigInt::from(m);
    let sh = F as i64 + e;
    let v = if sh >= 0 { v << sh as usize } else { v >> (-sh) as usize };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

impl Fx {
    fn new(z: Complex64) -> Fx {
        Fx { re: from_f64(z.re), im: from_f64(z.im) }
    }
    fn int(k: &BigInt) -> Fx {
        Fx { re: k << F, im: BigInt::zero() }
    }
    fn add(&self, o: &Fx) -> Fx {
        Fx { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Fx) -> Fx {
        Fx { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Fx) -> Fx {
        Fx { re: (&self.re * &o.re - &self.im * &o.im) >> F, im: (&self.re * &o.im + &self.im * &o.re) >> F }
    }
    fn div(&self, o: &Fx) -> Fx {
        let den = &o.re * &o.re + &o.im * &o.im;
        let nr = &self.re * &o.re + &self.im * &o.im;
        let ni = &self.im * &o.re - &self.re * &o.im;
        Fx { re: (nr << F) / &den, im: (ni << F) / &den }
    }
    /// |z|² − 1 scaled by 2^F.
    pub fn modulus_sq_minus_one(&self) -> BigInt {
        ((&self.re * &self.re + &self.im * &self.im) >> F) - (BigInt::from(1) << F)
    }
    pub fn to_c64(&self) -> Complex64 {
        let s = 2f64.powi(-(F as i32));
        Complex64::new(self.re.to_f64().unwrap() * s, self.im.to_f64().unwrap() * s)
    }
}

/// Coefficients highest degree first, monic.
pub fn roots(c: &[i64]) -> Vec<Fx> {
    let n = c.len() - 1;
    let p = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a as f64);
    let mut z: Vec<Complex64> = (0..n).map(|k| Complex64::new(0.4, 0.9).powu(k as u32 + 1)).collect();
    for _ in 0..2000 {
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / den;
            z[i] -= step;
        }
    }
    let cb: Vec<BigInt> = c.iter().map(|&a| BigInt::from(a)).collect();
    let pf = |x: &Fx| cb.iter().fold(Fx { re: BigInt::zero(), im: BigInt::zero() }, |acc, a| acc.mul(x).add(&Fx::int(a)));
    let mut w: Vec<Fx> = z.into_iter().map(Fx::new).collect();
    for _ in 0..12 {
        for i in 0..n {
            let mut den = Fx::int(&BigInt::from(1));
            for j in 0..n {
                if j != i {
                    den = den.mul(&w[i].sub(&w[j]));
                }
            }
            if den.re.is_zero() && den.im.is_zero() {
                continue;
            }
            w[i] = w[i].sub(&pf(&w[i]).div(&den));
        }
    }
    w
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub enum Verdict {
    PV,
    Salem,
    Outside,
    /// Some root other than θ lies within the tolerance of the circle
    /// and the polynomial is not reciprocal.
    Unresolved,
}

/// Root-modulus comparison against 1 at a 2⁻²⁰⁰ tolerance.
pub fn brute_classify(c: &[i64]) -> Verdict {
    let rs = roots(c);
    let ti = (0..rs.len())
        .filter(|&i| rs[i].to_c64().im.abs() < 1e-20)
        .max_by(|&a, &b| rs[a].to_c64().re.partial_cmp(&rs[b].to_c64().re).unwrap())
        .unwrap();
    let tol = BigInt::from(1) << (F - 200);
    let mut outside = 0;
    let mut circle = 0;
    for (i, r) in rs.iter().enumerate() {
        if i == ti {
            continue;
        }
        let d = r.modulus_sq_minus_one();
        if d.abs() < tol {
            circle += 1;
        } else if d.is_positive() {
            outside += 1;
        }
    }
    let rev: Vec<i64> = c.iter().rev().copied().collect();
    let reciprocal = rev == c || rev.iter().zip(c).all(|(a, b)| *a == -*b);
    match (outside, circle) {
        (0, 0) => Verdict::PV,
        (0, _) if reciprocal => Verdict::Salem,
        (0, _) => Verdict::Unresolved,
        _ => Verdict::Outside,
    }
}
