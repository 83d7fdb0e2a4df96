//! Rectangular complex balls built from two real balls.

use super::ball::Ball;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CBall {
    pub re: Ball,
    pub im: Ball,
}

impl CBall {
    pub fn new(re: Ball, im: Ball) -> Self {
        CBall { re, im }
    }

    pub fn real(re: Ball) -> Self {
        let p = re.prec();
        CBall { re, im: Ball::zero(p) }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        CBall { re: Ball::from_f64(re, prec), im: Ball::from_f64(im, prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn mid_only(&self) -> Self {
        CBall { re: self.re.mid_only(), im: self.im.mid_only() }
    }

    pub fn set_prec(&self, p: u32) -> Self {
        CBall { re: self.re.set_prec(p), im: self.im.set_prec(p) }
    }

    pub fn add(&self, o: &CBall) -> CBall {
        CBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CBall) -> CBall {
        CBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn mul(&self, o: &CBall) -> CBall {
        CBall {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale(&self, k: &Ball) -> CBall {
        CBall { re: self.re.mul(k), im: self.im.mul(k) }
    }

    pub fn norm_sqr(&self) -> Ball {
        self.re.sqr().add(&self.im.sqr())
    }

    pub fn abs(&self) -> Ball {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, o: &CBall) -> Option<CBall> {
        let d = o.norm_sqr();
        let num = self.mul(&CBall { re: o.re.clone(), im: o.im.neg() });
        Some(CBall { re: num.re.div(&d)?, im: num.im.div(&d)? })
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.mid_f64(), self.im.mid_f64())
    }
}
