//! Algebraic integers given by monic integer polynomials: certified
//! conjugates, PV/Salem classification, exact arithmetic in ℤ[θ],
//! distance to the nearest integer, and explicit decay constants.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Ball;
use crate::poly::{certify_roots, refine_real_root, CertRoot, Poly, ROOT_PREC_CAP};

/// Hard cap for precision escalation in ‖·‖ computations.
pub const PREC_CAP: u32 = 1 << 20;

#[derive(Clone, Debug)]
pub struct AlgebraicInteger {
    poly: Poly,
    height: BigInt,
    /// Certified roots sorted by decreasing modulus.
    roots: Vec<CertRoot>,
    /// Index of θ in `roots`.
    root_index: usize,
}

impl AlgebraicInteger {
    /// θ is the largest real root, which must exceed 1.
    pub fn new(poly: Poly) -> Result<Self> {
        if !poly.is_monic() {
            return Err(Error::InvalidArgument("polynomial must be monic".into()));
        }
        if poly.degree() == 0 {
            return Err(Error::InvalidArgument("constant polynomial".into()));
        }
        let roots = certify_roots(&poly, 128)?;
        let root_index = roots
            .iter()
            .enumerate()
            .filter(|(_, r)| r.real)
            .max_by(|a, b| a.1.re().partial_cmp(&b.1.re()).unwrap())
            .map(|(i, _)| i)
            .ok_or_else(|| Error::WrongClass("no real root".into()))?;
        let one = Ball::from_i64(1, 128);
        if roots[root_index].real_ball().cmp_certified(&one) != Some(Ordering::Greater) {
            return Err(Error::WrongClass("largest real root is not > 1".into()));
        }
        let height = poly.height_below_lead();
        Ok(AlgebraicInteger { poly, height, roots, root_index })
    }

    pub fn from_high_first(c: &[i64]) -> Result<Self> {
        Self::new(Poly::from_high_first(c))
    }

    /// The Perron–Frobenius root of a nonnegative integer matrix, with the
    /// linear factors of other integer eigenvalues removed from its
    /// characteristic polynomial.
    pub fn perron_of(s: &[Vec<i64>]) -> Result<Self> {
        let mut p = Poly::charpoly(s).squarefree_part();
        let theta = crate::substitution::perron_data(&s.to_vec(), 128)?.theta_f64();
        for r in certify_roots(&p, 128)? {
            let k = r.re().round();
            if !r.real || (r.re() - k).abs() > 1e-6 {
                continue;
            }
            let kb = BigInt::from(k as i64);
            if !p.eval_int(&kb).is_zero() {
                continue;
            }
            let lin = Poly::new(vec![-kb, BigInt::one()]);
            if (k - theta).abs() < 1e-6 {
                return Self::new(lin);
            }
            p = p.div_exact(&lin).expect("integer root divides");
        }
        Self::new(p)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }
    pub fn height(&self) -> &BigInt {
        &self.height
    }
    pub fn roots(&self) -> &[CertRoot] {
        &self.roots
    }
    pub fn root_index(&self) -> usize {
        self.root_index
    }
    pub fn theta_f64(&self) -> f64 {
        self.roots[self.root_index].re()
    }

    /// θ as a ball with radius about 2^-prec.
    pub fn theta_ball(&self, prec: u32) -> Result<Ball> {
        refine_real_root(&self.poly, &self.roots[self.root_index], prec)
    }

    /// Moduli of the conjugates other than θ, as f64 midpoints.
    pub fn conjugate_moduli(&self) -> Vec<f64> {
        self.roots
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.root_index)
            .map(|(_, r)| r.value_c64().norm())
            .collect()
    }

    /// Coefficients b_j of x^s − b_1 x^{s−1} − … − b_s.
    pub fn recurrence_coeffs(&self) -> Vec<BigInt> {
        let s = self.degree();
        (1..=s).map(|j| -&self.poly.coeffs()[s - j]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    PV,
    Salem,
    HasConjugateOutside,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub kind: ClassKind,
    /// Index (into the sorted root list) of the certifying conjugate.
    pub witness: Option<usize>,
    pub witness_modulus: Option<f64>,
    pub on_circle: usize,
    pub outside: usize,
}

pub fn classify(theta: &AlgebraicInteger) -> Result<Classification> {
    let p = &theta.poly;
    let s = p.degree();
    if s == 1 {
        return Ok(Classification { kind: ClassKind::PV, witness: None, witness_modulus: None, on_circle: 0, outside: 1 });
    }
    if p.eval_int(&BigInt::from(1)).is_zero() || p.eval_int(&BigInt::from(-1)).is_zero() {
        // x = ±1 is a root
        return Ok(Classification { kind: ClassKind::Degenerate, witness: None, witness_modulus: Some(1.0), on_circle: 1, outside: 0 });
    }
    let largest_other = theta
        .roots
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != theta.root_index)
        .max_by(|a, b| a.1.value_c64().norm().partial_cmp(&b.1.value_c64().norm()).unwrap())
        .map(|(i, r)| (i, r.value_c64().norm()));
    if let Some(r) = p.reciprocal_trace() {
        let mut prec = 128;
        loop {
            let ys = certify_roots(&r, prec)?;
            let two = Ball::from_i64(2, prec);
            let mut outside = 0;
            let mut circle = 0;
            let mut ok = true;
            for y in &ys {
                if !y.real {
                    outside += 1;
                    continue;
                }
                match y.real_ball().abs().cmp_certified(&two) {
                    Some(Ordering::Less) => circle += 2,
                    Some(Ordering::Greater) => outside += 1,
                    _ => ok = false,
                }
            }
            if ok {
                let kind = match (outside, circle) {
                    (1, 0) => ClassKind::PV,
                    (1, _) => ClassKind::Salem,
                    _ => ClassKind::HasConjugateOutside,
                };
                let (witness, witness_modulus) = match kind {
                    ClassKind::HasConjugateOutside => (largest_other.map(|x| x.0), largest_other.map(|x| x.1)),
                    ClassKind::Salem => (None, Some(1.0)),
                    _ => (None, largest_other.map(|x| x.1)),
                };
                return Ok(Classification { kind, witness, witness_modulus, on_circle: circle, outside });
            }
            if prec >= ROOT_PREC_CAP {
                return Err(Error::precision("reciprocal trace roots vs ±2", ROOT_PREC_CAP));
            }
            prec *= 2;
        }
    }
    let mut prec = 128;
    loop {
        let roots = if prec == 128 { theta.roots.clone() } else { certify_roots(p, prec)? };
        let one = Ball::from_i64(1, prec);
        let mut outside = 0;
        let mut ok = true;
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in roots.iter().enumerate() {
            match r.modulus().set_prec(prec).cmp_certified(&one) {
                Some(Ordering::Greater) => {
                    outside += 1;
                    let m = r.value_c64().norm();
                    let is_theta = r.real && (r.re() - theta.theta_f64()).abs() < 1e-9 * theta.theta_f64();
                    if !is_theta && best.map_or(true, |b| m > b.1) {
                        best = Some((i, m));
                    }
                }
                Some(Ordering::Less) => {}
                _ => ok = false,
            }
        }
        // a certified conjugate outside decides the class even when other
        // roots are still unresolved against the circle
        if ok || best.is_some() {
            let kind = if best.is_none() { ClassKind::PV } else { ClassKind::HasConjugateOutside };
            let witness = if kind == ClassKind::HasConjugateOutside { best } else { largest_other };
            return Ok(Classification {
                kind,
                witness: if kind == ClassKind::HasConjugateOutside { witness.map(|w| w.0) } else { None },
                witness_modulus: witness.map(|w| w.1),
                on_circle: 0,
                outside,
            });
        }
        if prec >= ROOT_PREC_CAP {
            return Err(Error::precision("conjugate modulus vs 1", ROOT_PREC_CAP));
        }
        prec *= 2;
    }
}

/// Element of ℤ[θ] in the basis 1, θ, …, θ^{s−1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZThetaElement {
    pub coords: Vec<BigInt>,
}

impl ZThetaElement {
    pub fn integer(k: i64, s: usize) -> Self {
        let mut coords = vec![BigInt::zero(); s];
        coords[0] = BigInt::from(k);
        ZThetaElement { coords }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        ZThetaElement { coords: c.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn max_coord_bits(&self) -> u64 {
        self.coords.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    pub fn is_integer(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    /// Value as a ball, given θ.
    pub fn value(&self, theta: &Ball) -> Ball {
        let p = theta.prec();
        let mut acc = Ball::zero(p);
        for c in self.coords.iter().rev() {
            acc = acc.mul(theta).add(&Ball::from_int(c, p));
        }
        acc
    }

    pub fn add(&self, o: &ZThetaElement) -> ZThetaElement {
        ZThetaElement { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> ZThetaElement {
        ZThetaElement { coords: self.coords.iter().map(|a| a * k).collect() }
    }
}

/// θ·x via the companion matrix of `poly`.
pub fn zt_mul_theta(x: &ZThetaElement, poly: &Poly) -> ZThetaElement {
    let s = poly.degree();
    let a = poly.coeffs();
    let top = x.coords[s - 1].clone();
    let mut out = Vec::with_capacity(s);
    for i in 0..s {
        let prev = if i == 0 { BigInt::zero() } else { x.coords[i - 1].clone() };
        out.push(prev - &top * &a[i]);
    }
    ZThetaElement { coords: out }
}

/// Certified ‖x‖ with its nearest integer and signed remainder.
#[derive(Clone, Debug)]
pub struct FracDist {
    pub nearest: BigInt,
    /// x − nearest, as a ball.
    pub eps: Ball,
    pub bits_used: u32,
}

impl FracDist {
    pub fn dist_f64(&self) -> f64 {
        self.eps.mid_f64().abs()
    }
    pub fn dist_lower(&self) -> f64 {
        (self.eps.abs().lo_f64()).max(0.0)
    }
    pub fn dist_upper(&self) -> f64 {
        self.eps.abs().hi_f64()
    }
}

/// ‖value(x)‖ to within `target_err`, raising precision from `start_bits`.
pub fn frac_dist_from(x: &ZThetaElement, theta: &AlgebraicInteger, target_err: f64, start_bits: u32) -> Result<FracDist> {
    if !(target_err > 0.0 && target_err <= 0.125) {
        return Err(Error::InvalidArgument("target_err must lie in (0, 1/8]".into()));
    }
    if x.is_integer() {
        return Ok(FracDist { nearest: x.coords[0].clone(), eps: Ball::zero(64), bits_used: 0 });
    }
    let need = (-target_err.log2()).ceil() as u32 + 8;
    let mut prec = start_bits.max(need + x.max_coord_bits() as u32 + 64);
    loop {
        let th = theta.theta_ball(prec)?;
        let v = x.value(&th);
        if let Some((k, eps)) = v.nearest_int() {
            if 2.0 * eps.rad_f64() <= target_err {
                return Ok(FracDist { nearest: k, eps, bits_used: prec });
            }
        }
        if prec >= PREC_CAP {
            return Err(Error::precision("distance to nearest integer", PREC_CAP));
        }
        prec = (prec * 2).min(PREC_CAP);
    }
}

pub fn frac_dist(x: &ZThetaElement, theta: &AlgebraicInteger, target_err: f64) -> Result<FracDist> {
    frac_dist_from(x, theta, target_err, 64)
}

#[derive(Clone, Debug, Serialize)]
pub struct PropAlgConstants {
    pub s: usize,
    pub height: i64,
    pub delta1: f64,
    pub beta: u64,
    pub alpha: f64,
    pub theta2_modulus: f64,
}

/// δ₁ = (1+sH)^{-1}, β = 1 + ⌈s log θ / log|θ₂|⌉, α = δ₁² / log β.
pub fn prop_alg_constants(theta: &AlgebraicInteger) -> Result<PropAlgConstants> {
    let cl = classify(theta)?;
    if cl.kind != ClassKind::HasConjugateOutside {
        return Err(Error::WrongClass(format!("needs a conjugate outside the unit circle, got {:?}", cl.kind)));
    }
    let s = theta.degree();
    let h = theta.height.to_i64().unwrap_or(i64::MAX);
    let delta1 = 1.0 / (1.0 + s as f64 * h as f64);
    let t2 = cl.witness_modulus.expect("witness");
    let th = theta.theta_f64();
    let ratio = s as f64 * th.ln() / t2.ln();
    let mut q = ratio.ceil();
    let r = ratio.round();
    if (ratio - r).abs() < 1e-9 {
        // decide θ^s vs |θ₂|^r exactly
        q = exact_ceil_ratio(theta, &cl, s, r as u64)?;
    }
    let beta = 1 + q as u64;
    let alpha = delta1 * delta1 / (beta as f64).ln();
    Ok(PropAlgConstants { s, height: h, delta1, beta, alpha, theta2_modulus: t2 })
}

fn exact_ceil_ratio(theta: &AlgebraicInteger, cl: &Classification, s: usize, r: u64) -> Result<f64> {
    let mut prec = 256;
    loop {
        let roots = certify_roots(theta.poly(), prec)?;
        let th = theta.theta_ball(prec)?;
        let w = cl.witness.expect("witness");
        let m2 = roots[w].modulus().set_prec(th.prec());
        match th.pow(s as u64).cmp_certified(&m2.pow(r)) {
            Some(Ordering::Greater) => return Ok(r as f64 + 1.0),
            Some(Ordering::Less) => return Ok(r as f64),
            _ if prec >= 4096 => return Ok(r as f64),
            _ => prec *= 2,
        }
    }
}

/// Garsia's lower bound for |Q(θ_{j₂})| over nonzero integer Q with the
/// given height and degree below s.
pub fn garsia_lower_bound(theta: &AlgebraicInteger, j2: usize, q_height: u64, q_degree: usize) -> Result<f64> {
    let s = theta.degree();
    if q_height == 0 {
        return Err(Error::InvalidArgument("Q must be nonzero (height >= 1)".into()));
    }
    if q_degree >= s {
        return Err(Error::InvalidArgument("deg Q must be below deg θ".into()));
    }
    let one = Ball::from_i64(1, 256);
    let roots = certify_roots(theta.poly(), 256)?;
    let mut num_lo = 1.0f64;
    let mut big_hi = 1.0f64;
    for (j, r) in roots.iter().enumerate() {
        if j == j2 {
            continue;
        }
        let m = r.modulus();
        match m.cmp_certified(&one) {
            Some(Ordering::Greater) => {
                num_lo *= m.sub(&one).lo_f64();
                big_hi *= m.hi_f64();
            }
            Some(Ordering::Less) => num_lo *= one.sub(&m).lo_f64(),
            _ => {
                // on the unit circle (Salem case) or unresolved: excluded
                // only when certified by the reciprocal structure
                if !theta.poly().is_palindromic() {
                    return Err(Error::precision("conjugate modulus vs 1", 256));
                }
            }
        }
    }
    let sf = s as f64;
    let denom = sf.powf(sf - 2.0) * big_hi.powf(sf) * (q_height as f64).powf(sf);
    Ok(num_lo / denom * (1.0 - 1e-12))
}

/// Roots of the polynomial as (re, im) pairs at 256 bits, for reporting.
pub fn conjugates(theta: &AlgebraicInteger) -> Vec<(f64, f64)> {
    theta.roots.iter().map(|r| (r.re(), r.im())).collect()
}

/// Exact companion-matrix recurrence for the coordinates of tθ^k, k < n.
pub fn orbit(t: &ZThetaElement, poly: &Poly, n: usize) -> Vec<ZThetaElement> {
    let mut out = Vec::with_capacity(n);
    let mut x = t.clone();
    for _ in 0..n {
        out.push(x.clone());
        x = zt_mul_theta(&x, poly);
    }
    out
}

pub fn one_zt(s: usize) -> ZThetaElement {
    let mut c = vec![BigInt::zero(); s];
    c[0] = BigInt::one();
    ZThetaElement { coords: c }
}

pub fn is_negative_coords(x: &ZThetaElement) -> bool {
    x.coords.iter().any(|c| c.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let k = |c: &[i64]| classify(&AlgebraicInteger::from_high_first(c).unwrap()).unwrap().kind;
        assert_eq!(k(&[1, -1, -1]), ClassKind::PV);
        assert_eq!(k(&[1, -1, -3]), ClassKind::HasConjugateOutside);
        assert_eq!(k(&[1, 0, -1, -1]), ClassKind::PV);
        assert_eq!(k(&[1, -1, -1, -1, 1]), ClassKind::Salem);
        assert_eq!(k(&[1, -3, 1]), ClassKind::PV);
        assert_eq!(k(&[1, -2]), ClassKind::PV);
        let c = classify(&AlgebraicInteger::from_high_first(&[1, -1, -3]).unwrap()).unwrap();
        assert!((c.witness_modulus.unwrap() - 1.3027756377319946).abs() < 1e-12);
    }

    #[test]
    fn ztheta_multiplication() {
        let p = Poly::from_high_first(&[1, -1, -3]);
        let one = ZThetaElement::from_i64(&[1, 0]);
        let t = zt_mul_theta(&one, &p);
        assert_eq!(t, ZThetaElement::from_i64(&[0, 1]));
        let t2 = zt_mul_theta(&t, &p);
        assert_eq!(t2, ZThetaElement::from_i64(&[3, 1]));
        assert_eq!(zt_mul_theta(&t2, &p), ZThetaElement::from_i64(&[3, 4]));
    }

    #[test]
    fn distances_to_integers() {
        let th = AlgebraicInteger::from_high_first(&[1, -1, -3]).unwrap();
        let d = frac_dist(&ZThetaElement::from_i64(&[0, 1]), &th, 1e-12).unwrap();
        assert!((d.dist_f64() - 0.30277563773199456).abs() < 1e-12);
        assert_eq!(frac_dist(&ZThetaElement::from_i64(&[5, 0]), &th, 1e-12).unwrap().dist_f64(), 0.0);
        let phi = AlgebraicInteger::from_high_first(&[1, -1, -1]).unwrap();
        // φ^5 = 5φ + 3
        let d = frac_dist(&ZThetaElement::from_i64(&[3, 5]), &phi, 1e-12).unwrap();
        assert!((d.dist_f64() - 0.09016994374947451).abs() < 1e-12);
        assert_eq!(d.nearest, BigInt::from(11));
    }

    #[test]
    fn constants_for_non_pisot_quadratic() {
        let th = AlgebraicInteger::from_high_first(&[1, -1, -3]).unwrap();
        let c = prop_alg_constants(&th).unwrap();
        assert_eq!(c.beta, 8);
        assert!((c.delta1 - 1.0 / 7.0).abs() < 1e-15);
        assert!((c.alpha - (1.0 / 49.0) / 8f64.ln()).abs() < 1e-15);
        assert!((c.alpha - 0.009815).abs() < 1e-6);
        let phi = AlgebraicInteger::from_high_first(&[1, -1, -1]).unwrap();
        assert!(matches!(prop_alg_constants(&phi), Err(Error::WrongClass(_))));
        let plastic = AlgebraicInteger::from_high_first(&[1, 0, -1, -1]).unwrap();
        assert!(matches!(prop_alg_constants(&plastic), Err(Error::WrongClass(_))));
    }

    #[test]
    fn garsia_two_root_case() {
        let th = AlgebraicInteger::from_high_first(&[1, -1, -3]).unwrap();
        let j2 = classify(&th).unwrap().witness.unwrap();
        let g = garsia_lower_bound(&th, j2, 1, 1).unwrap();
        let t1 = (1.0 + 13f64.sqrt()) / 2.0;
        let expect = (t1 - 1.0) / (t1 * t1);
        assert!((g - expect).abs() < 1e-10);
        assert!((g - 0.24567).abs() < 1e-4);
        let g10 = garsia_lower_bound(&th, j2, 10, 1).unwrap();
        assert!((g10 * 100.0 - g).abs() < 1e-12);
        assert!(garsia_lower_bound(&th, j2, 0, 1).is_err());
    }
}
