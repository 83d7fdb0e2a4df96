//! Integer polynomials and certified complex root isolation.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::num::{Ball, CBall};

/// Integer polynomial, coefficients stored lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<BigInt>,
}

/// Maximum working precision for root certification.
pub const ROOT_PREC_CAP: u32 = 1 << 16;

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        Poly { coeffs }
    }

    /// Coefficients given highest degree first, as in `[1, -1, -3]` for x²−x−3.
    pub fn from_high_first(c: &[i64]) -> Self {
        Poly::new(c.iter().rev().map(|&x| BigInt::from(x)).collect())
    }

    pub fn to_high_first(&self) -> Vec<BigInt> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn lead(&self) -> &BigInt {
        self.coeffs.last().expect("nonempty")
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_one()
    }

    /// Max |coefficient| below the leading one.
    pub fn height_below_lead(&self) -> BigInt {
        self.coeffs[..self.degree()].iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn derivative(&self) -> Poly {
        if self.degree() == 0 {
            return Poly::new(vec![BigInt::zero()]);
        }
        Poly::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect(),
        )
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Exact sign of p(m / 2^e).
    pub fn sign_at_dyadic(&self, m: &BigInt, e: u32) -> i32 {
        // 2^{ed} p(m/2^e) = sum c_i m^i 2^{e(d-i)}
        let d = self.degree() as u32;
        let mut total = BigInt::zero();
        let mut mp = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate() {
            total += (c * &mp) << (e * (d - i as u32));
            mp *= m;
        }
        match total.sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        }
    }

    pub fn eval_ball(&self, x: &Ball) -> Ball {
        let p = x.prec();
        let mut acc = Ball::zero(p);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&Ball::from_int(c, p));
        }
        acc
    }

    pub fn eval_cball(&self, z: &CBall) -> CBall {
        let p = z.prec();
        let mut acc = CBall::real(Ball::zero(p));
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(&CBall::real(Ball::from_int(c, p)));
        }
        acc
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex64::new(c.to_f64().unwrap_or(f64::MAX), 0.0);
        }
        acc
    }

    fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn primitive_part(&self) -> Poly {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        let sign = if self.lead().is_negative() { -BigInt::one() } else { BigInt::one() };
        Poly::new(self.coeffs.iter().map(|c| c / &g * &sign).collect())
    }

    /// Pseudo-remainder of self by d.
    fn prem(&self, d: &Poly) -> Poly {
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let ld = d.lead().clone();
        while r.len() > dd && !(r.len() == 1 && r[0].is_zero()) {
            let k = r.len() - 1;
            let lr = r[k].clone();
            if lr.is_zero() {
                r.pop();
                continue;
            }
            for c in r.iter_mut() {
                *c *= &ld;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] -= &lr * dc;
            }
            r.pop();
        }
        Poly::new(r)
    }

    /// Primitive gcd over the rationals.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.primitive_part(), other.primitive_part())
        } else {
            (other.primitive_part(), self.primitive_part())
        };
        while !b.is_zero() {
            let r = a.prem(&b);
            a = b;
            b = if r.is_zero() { r } else { r.primitive_part() };
        }
        a.primitive_part()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    /// Exact division; `None` if `d` does not divide `self` over the integers.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() || d.degree() > self.degree() {
            return if self.is_zero() { Some(self.clone()) } else { None };
        }
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let mut q = vec![BigInt::zero(); self.degree() - dd + 1];
        for k in (dd..r.len()).rev() {
            let (qq, rem) = r[k].div_rem(d.lead());
            if !rem.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] -= &qq * dc;
            }
            q[k - dd] = qq;
        }
        if r.iter().all(|c| c.is_zero()) {
            Some(Poly::new(q))
        } else {
            None
        }
    }

    pub fn squarefree_part(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        self.primitive_part().div_exact(&g).expect("gcd divides").primitive_part()
    }

    /// Coefficient palindrome: p(x) = x^d p(1/x).
    pub fn is_palindromic(&self) -> bool {
        let d = self.degree();
        (0..=d).all(|i| self.coeffs[i] == self.coeffs[d - i])
    }

    pub fn is_antipalindromic(&self) -> bool {
        let d = self.degree();
        (0..=d).all(|i| self.coeffs[i] == -&self.coeffs[d - i])
    }

    /// For a palindromic polynomial of even degree 2d, the degree-d
    /// polynomial R with p(x) = x^d R(x + 1/x).
    pub fn reciprocal_trace(&self) -> Option<Poly> {
        let n = self.degree();
        if n % 2 != 0 || !self.is_palindromic() {
            return None;
        }
        let d = n / 2;
        // V_0 = 2, V_1 = y, V_{k+1} = y V_k - V_{k-1}; x^k + x^-k = V_k(x + 1/x)
        let mut v: Vec<Vec<BigInt>> = vec![vec![BigInt::from(2)], vec![BigInt::zero(), BigInt::one()]];
        for k in 1..d {
            let mut next = vec![BigInt::zero(); k + 2];
            for (i, c) in v[k].iter().enumerate() {
                next[i + 1] += c;
            }
            for (i, c) in v[k - 1].iter().enumerate() {
                next[i] -= c;
            }
            v.push(next);
        }
        let mut r = vec![BigInt::zero(); d + 1];
        r[0] += &self.coeffs[d];
        for k in 1..=d {
            for (i, c) in v[k].iter().enumerate() {
                r[i] += &self.coeffs[d + k] * c;
            }
        }
        Some(Poly::new(r))
    }

    /// Characteristic polynomial det(xI − A) by Faddeev–LeVerrier.
    pub fn charpoly(a: &[Vec<i64>]) -> Poly {
        let n = a.len();
        let am: Vec<Vec<BigInt>> =
            a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = vec![vec![BigInt::zero(); n]; n];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = mat_mul(&am, &m);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += &coeffs[n - k + 1];
            }
            m = next;
            let am_k = mat_mul(&am, &m);
            let tr: BigInt = (0..n).map(|i| am_k[i][i].clone()).sum();
            coeffs[n - k] = -(tr / BigInt::from(k));
        }
        Poly::new(coeffs)
    }
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                c[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    c
}

/// A disk certified to contain exactly one root.
#[derive(Clone, Debug)]
pub struct CertRoot {
    pub center: CBall,
    /// Upper bound on the disk radius (exact ball).
    pub radius: Ball,
    /// The root is certified real.
    pub real: bool,
}

impl CertRoot {
    pub fn re(&self) -> f64 {
        self.center.re.mid_f64()
    }
    pub fn im(&self) -> f64 {
        self.center.im.mid_f64()
    }
    pub fn value_c64(&self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }

    /// Ball containing the modulus of the root.
    pub fn modulus(&self) -> Ball {
        let base = self.center.abs();
        base.widen(&(self.radius.mid_raw() + BigInt::one()))
    }

    /// Ball containing the real root (only meaningful when `real`).
    pub fn real_ball(&self) -> Ball {
        self.center.re.widen(self.radius.mid_raw())
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius.hi_f64()
    }
}

/// Initial approximations by Aberth–Ehrlich iteration in double precision.
fn aberth(p: &Poly) -> Vec<Complex64> {
    let n = p.degree();
    let lead = p.lead().to_f64().unwrap_or(1.0);
    let cauchy = 1.0
        + p.coeffs[..n]
            .iter()
            .map(|c| (c.to_f64().unwrap_or(f64::MAX) / lead).abs())
            .fold(0.0, f64::max);
    let dp = p.derivative();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(cauchy * 0.7, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..2000 {
        let mut maxstep: f64 = 0.0;
        for i in 0..n {
            let pv = p.eval_c64(z[i]);
            let dv = dp.eval_c64(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            maxstep = maxstep.max(w.norm() / (1.0 + z[i].norm()));
        }
        if maxstep < 1e-17 {
            break;
        }
    }
    z
}

fn newton_refine(p: &Poly, dp: &Poly, z0: Complex64, prec: u32) -> CBall {
    let mut z = CBall::from_f64(z0.re, z0.im, prec);
    let mut last_bits = u64::MAX;
    for _ in 0..(prec.ilog2() + 40) {
        let pv = p.eval_cball(&z).mid_only();
        let dv = dp.eval_cball(&z).mid_only();
        let Some(step) = pv.div(&dv) else { break };
        let step = step.mid_only();
        z = z.sub(&step).mid_only();
        let bits = step.re.mid_raw().bits().max(step.im.mid_raw().bits());
        if bits <= 2 || (bits >= last_bits && bits < prec as u64 / 2) {
            break;
        }
        last_bits = bits;
    }
    z
}

fn try_certify(p: &Poly, approx: &[Complex64], prec: u32) -> Option<Vec<CertRoot>> {
    let n = p.degree();
    let dp = p.derivative();
    let snap = (prec as f64 / 2.0).min(1000.0);
    let mut centers: Vec<CBall> = approx
        .iter()
        .map(|&z0| {
            let mut z = newton_refine(p, &dp, z0, prec);
            let im_bits = z.im.mid_raw().bits() as f64;
            if (prec as f64 - im_bits) > snap {
                z.im = Ball::zero(prec);
            }
            z
        })
        .collect();
    // enforce conjugate symmetry on near-real snapping
    for c in centers.iter_mut() {
        *c = c.mid_only();
    }
    let lead = Ball::from_int(p.lead(), prec);
    let mut radii = Vec::with_capacity(n);
    for i in 0..n {
        let pv = p.eval_cball(&centers[i]);
        let mut denom = CBall::real(lead.clone());
        for j in 0..n {
            if j != i {
                denom = denom.mul(&centers[i].sub(&centers[j]));
            }
        }
        let w = pv.div(&denom)?;
        let r = w.abs().mul_i64(n as i64);
        // exact upper bound
        let up = r.mid_raw() + r.rad_raw() + BigInt::one();
        radii.push(Ball::from_parts(up, BigInt::zero(), prec));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = centers[i].sub(&centers[j]).abs();
            let sum = radii[i].add(&radii[j]);
            if d.cmp_certified(&sum) != Some(std::cmp::Ordering::Greater) {
                return None;
            }
        }
    }
    Some(
        centers
            .into_iter()
            .zip(radii)
            .map(|(c, r)| {
                let real = c.im.mid_raw().is_zero();
                CertRoot { center: c, radius: r, real }
            })
            .collect(),
    )
}

/// Disjoint disks, each holding exactly one root, with radii below
/// 2^-precision_bits. Roots are sorted by decreasing modulus.
pub fn certify_roots(p: &Poly, precision_bits: u32) -> Result<Vec<CertRoot>> {
    if p.degree() == 0 {
        return Ok(vec![]);
    }
    if !p.is_squarefree() {
        return Err(Error::NotSquarefree);
    }
    let approx = aberth(p);
    let mut prec = (precision_bits + 64).max(128);
    let target = Ball::from_parts(BigInt::one(), BigInt::zero(), precision_bits);
    loop {
        if let Some(mut roots) = try_certify(p, &approx, prec) {
            let fine = roots.iter().all(|r| r.radius.cmp_certified(&target) != Some(std::cmp::Ordering::Greater));
            if fine {
                roots.sort_by(|a, b| {
                    let ma = a.value_c64().norm();
                    let mb = b.value_c64().norm();
                    mb.partial_cmp(&ma).unwrap().then(b.re().partial_cmp(&a.re()).unwrap()).then(b.im().partial_cmp(&a.im()).unwrap())
                });
                return Ok(roots);
            }
        }
        if prec >= ROOT_PREC_CAP {
            return Err(Error::precision("root isolation", ROOT_PREC_CAP));
        }
        prec = (prec * 2).min(ROOT_PREC_CAP);
    }
}

/// Refines a real simple root isolated by `root` to about `prec` bits.
///
/// The result is certified by an exact sign change of `p` at two dyadic
/// points inside the isolating disk.
pub fn refine_real_root(p: &Poly, root: &CertRoot, prec: u32) -> Result<Ball> {
    if !root.real {
        return Err(Error::InvalidArgument("root is not real".into()));
    }
    let dp = p.derivative();
    let mut x = root.center.re.set_prec(prec + 16).mid_only();
    for _ in 0..(prec.ilog2() + 40) {
        let Some(step) = p.eval_ball(&x).mid_only().div(&dp.eval_ball(&x).mid_only()) else { break };
        let step = step.mid_only();
        x = x.sub(&step).mid_only();
        if step.mid_raw().bits() <= 2 {
            break;
        }
    }
    let wp = prec + 16;
    let disk_lo = root.center.re.set_prec(wp).sub(&root.radius.set_prec(wp));
    let disk_hi = root.center.re.set_prec(wp).add(&root.radius.set_prec(wp));
    let mut delta_bits: u32 = 8;
    while delta_bits < wp {
        let delta = BigInt::one() << delta_bits;
        let lo = x.mid_raw() - &delta;
        let hi = x.mid_raw() + &delta;
        let inside = Ball::from_parts(lo.clone(), BigInt::zero(), wp).cmp_certified(&disk_lo) != Some(std::cmp::Ordering::Less)
            && Ball::from_parts(hi.clone(), BigInt::zero(), wp).cmp_certified(&disk_hi) != Some(std::cmp::Ordering::Greater);
        if !inside {
            break;
        }
        let sl = p.sign_at_dyadic(&lo, wp);
        let sh = p.sign_at_dyadic(&hi, wp);
        if sl == 0 {
            return Ok(Ball::from_parts(lo, BigInt::zero(), wp));
        }
        if sh == 0 {
            return Ok(Ball::from_parts(hi, BigInt::zero(), wp));
        }
        if sl != sh {
            return Ok(Ball::from_parts(x.mid_raw().clone(), delta, wp));
        }
        delta_bits += 8;
    }
    Ok(root.real_ball().set_prec(wp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_small() {
        let p = Poly::charpoly(&[vec![1, 1], vec![3, 0]]);
        assert_eq!(p, Poly::from_high_first(&[1, -1, -3]));
        let q = Poly::charpoly(&[vec![2, 0, 0], vec![0, 3, 0], vec![1, 0, 5]]);
        assert_eq!(q, Poly::from_high_first(&[1, -10, 31, -30]));
    }

    #[test]
    fn squarefree_and_gcd() {
        assert!(Poly::from_high_first(&[1, 0, -1]).is_squarefree());
        assert!(!Poly::from_high_first(&[1, -2, 1]).is_squarefree());
        let p = Poly::from_high_first(&[1, -3, 3, -1]);
        assert_eq!(p.squarefree_part(), Poly::from_high_first(&[1, -1]));
    }

    #[test]
    fn reciprocal_trace_of_lehmer_like() {
        // x^4 - x^3 - x^2 - x + 1 = x^2 R(x + 1/x), R(y) = y^2 - y - 3
        let p = Poly::from_high_first(&[1, -1, -1, -1, 1]);
        assert_eq!(p.reciprocal_trace().unwrap(), Poly::from_high_first(&[1, -1, -3]));
    }

    #[test]
    fn dyadic_signs() {
        let p = Poly::from_high_first(&[1, 0, -2]);
        assert_eq!(p.sign_at_dyadic(&BigInt::from(1), 0), -1);
        assert_eq!(p.sign_at_dyadic(&BigInt::from(3), 1), 1);
        assert_eq!(p.sign_at_dyadic(&BigInt::from(2), 0), 1);
    }

    #[test]
    fn roots_of_golden_polynomial() {
        let r = certify_roots(&Poly::from_high_first(&[1, -1, -1]), 200).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.real));
        assert!((r[0].re() - 1.618033988749895).abs() < 1e-15);
        assert!((r[1].re() + 0.6180339887498949).abs() < 1e-15);
        assert!(r[0].radius_f64() < 1e-60);
    }

    #[test]
    fn complex_roots_certified() {
        let r = certify_roots(&Poly::from_high_first(&[1, 0, -1, -1]), 100).unwrap();
        assert_eq!(r.iter().filter(|x| x.real).count(), 1);
        let plastic = r.iter().find(|x| x.real).unwrap();
        assert!((plastic.re() - 1.324717957244746).abs() < 1e-14);
        assert!(!certify_roots(&Poly::from_high_first(&[1, 0, 1]), 64).unwrap()[0].real);
    }

    #[test]
    fn real_root_refinement() {
        let p = Poly::from_high_first(&[1, 0, -2]);
        let r = certify_roots(&p, 60).unwrap();
        let b = refine_real_root(&p, &r[0], 3000).unwrap();
        assert!(b.rad_bits() < 20);
        let sq = b.sqr().sub(&Ball::from_i64(2, b.prec()));
        assert!(sq.contains_zero());
        assert!(sq.rad_bits() < 40);
    }

    #[test]
    fn not_squarefree_rejected() {
        assert_eq!(certify_roots(&Poly::from_high_first(&[1, -2, 1]), 64).unwrap_err(), Error::NotSquarefree);
    }
}
