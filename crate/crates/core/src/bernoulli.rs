//! Biased Bernoulli convolutions ν_λ^p: truncated Fourier products with
//! rigorous tail bounds, the logarithmic decay scan for θ = 1/λ with a
//! conjugate outside the unit circle, and non-decay along θᴺ for PV θ.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebraic::{classify, prop_alg_constants, AlgebraicInteger, ClassKind};
use crate::error::{Error, Result};
use crate::num::{ball_to_dd, Ball, Dd};

#[derive(Clone, Debug)]
pub struct BernoulliParams {
    pub lambda: f64,
    /// Probability of the sign −.
    pub p: f64,
    pub theta: Option<AlgebraicInteger>,
}

impl BernoulliParams {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidArgument("λ must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument("p must lie in [0, 1]".into()));
        }
        Ok(BernoulliParams { lambda, p, theta: None })
    }

    /// λ = 1/θ for an algebraic integer θ > 1.
    pub fn from_theta(theta: AlgebraicInteger, p: f64) -> Result<Self> {
        let mut b = Self::new(1.0 / theta.theta_f64(), p)?;
        b.theta = Some(theta);
        Ok(b)
    }

    pub fn lambda_ball(&self, prec: u32) -> Result<Ball> {
        match &self.theta {
            Some(t) => t.theta_ball(prec)?.recip().ok_or_else(|| Error::precision("1/θ", prec)),
            None => Ok(Ball::from_f64(self.lambda, prec.max(1100))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierValue {
    pub xi: f64,
    pub value: Complex64,
    /// Bound for |ν̂(ξ) − value|.
    pub tail_bound: f64,
    /// `Σ_{n≥N} 2π²·4p(1−p)λ^{2n}ξ²`, a bound for −log of the tail modulus.
    pub log_modulus_tail: f64,
    pub n_terms: usize,
}

/// `∏_{n<N}(p e^{−2πiλⁿξ} + (1−p)e^{2πiλⁿξ})` at the real ξ.
pub fn bc_fourier(params: &BernoulliParams, xi: f64, n_terms: usize) -> Result<FourierValue> {
    let prec = 128 + exact_bits_of(xi);
    let x = Ball::from_f64(xi, prec.max(crate::riesz::exact_bits(xi)));
    bc_fourier_ball(params, &x, n_terms)
}

fn exact_bits_of(x: f64) -> u32 {
    if x == 0.0 {
        0
    } else {
        (x.abs().log2().max(0.0).ceil() as u32) + 8
    }
}

/// As [`bc_fourier`], with ξ given as a ball (e.g. θᴺu computed exactly).
pub fn bc_fourier_ball(params: &BernoulliParams, xi: &Ball, n_terms: usize) -> Result<FourierValue> {
    let p = params.p;
    let xabs = xi.abs().hi_f64();
    let lam = params.lambda;
    let x_n = 2.0 * std::f64::consts::PI * lam.powi(n_terms as i32) * xabs;
    if x_n >= 0.5 {
        return Err(Error::TailNotConverged(format!("2πλ^N|ξ| = {x_n:.3} is not below 1/2")));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    if xabs > 0.0 {
        let prec = xi.prec().max(128 + exact_bits_of(xabs));
        let lb = params.lambda_ball(prec)?;
        let mut cur = xi.set_prec(prec);
        for _ in 0..n_terms {
            let frac = cur.mod_one().ok_or_else(|| Error::precision("λⁿξ mod 1", prec))?;
            if frac.rad_f64() > 1e-25 {
                return Err(Error::precision("λⁿξ mod 1", prec));
            }
            let (c, s) = Dd::cis_turns(ball_to_dd(&frac));
            let (c, s) = (c.to_f64(), s.to_f64());
            acc *= Complex64::new(c, (1.0 - 2.0 * p) * s);
            cur = cur.mul(&lb);
        }
    }
    // |factor − 1| ≤ x²/2 + |1−2p|·|x|, x = 2πλⁿξ
    let l2 = lam * lam;
    let s1 = x_n / (1.0 - lam);
    let s2 = x_n * x_n / (1.0 - l2);
    let e = 0.5 * s2 + (1.0 - 2.0 * p).abs() * s1;
    let tail_bound = acc.norm() * e.exp_m1() + 1e-15;
    let log_modulus_tail = 2.0 * std::f64::consts::PI.powi(2) * 4.0 * p * (1.0 - p) * lam.powi(2 * n_terms as i32) * xabs * xabs / (1.0 - l2);
    Ok(FourierValue { xi: xi.mid_f64(), value: acc, tail_bound, log_modulus_tail, n_terms })
}

/// Smallest N with a tail bound below `tol` relative to 1.
pub fn terms_for(lambda: f64, p: f64, xi: f64, tol: f64) -> usize {
    let xa = xi.abs();
    if xa == 0.0 {
        return 0;
    }
    let mut n = 0usize;
    loop {
        let x = 2.0 * std::f64::consts::PI * lambda.powi(n as i32) * xa;
        if x < 0.5 {
            let e = 0.5 * x * x / (1.0 - lambda * lambda) + (1.0 - 2.0 * p).abs() * x / (1.0 - lambda);
            if e.exp_m1() <= tol {
                return n;
            }
        }
        n += 1;
    }
}

/// Constant c with `|p + (1−p)e^{2πix}| ≤ 1 − c‖x‖²`.
pub fn chain_constant(p: f64) -> f64 {
    ((1.0 - p) / 2.0).min(8.0 * p * (1.0 - p))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub n: u32,
    pub u: f64,
    pub xi: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub tail_bound: f64,
    pub bound_chain: f64,
    pub scan_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayScan {
    pub alpha: f64,
    pub chain_constant: f64,
    pub rows: Vec<ScanRow>,
    pub sup: f64,
    /// Rows where |ν̂| − tail exceeds the chain product.
    pub chain_violations: usize,
}

/// `|ν̂^p_{1/θ}(ξ)|·(log(2+|ξ|))^α` on ξ = θᴺu, next to the chain bound
/// `∏_{n≤N}(1 − c‖2θⁿu‖²)`.
pub fn bc_log_decay_scan(theta: &AlgebraicInteger, p: f64, n_range: std::ops::RangeInclusive<u32>, us: &[f64]) -> Result<DecayScan> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument("p must lie in (0, 1)".into()));
    }
    let alpha = prop_alg_constants(theta)?.alpha;
    let th = theta.theta_f64();
    if us.iter().any(|&u| !(u >= 1.0 && u <= th)) {
        return Err(Error::InvalidArgument("grid multipliers must lie in [1, θ]".into()));
    }
    let params = BernoulliParams::from_theta(theta.clone(), p)?;
    let c = chain_constant(p);
    let mut rows = Vec::new();
    for n in n_range {
        let prec = 160 + (n as f64 * th.log2()).ceil() as u32;
        let tb = theta.theta_ball(prec)?;
        for &u in us {
            let ub = Ball::from_f64(u, prec.max(crate::riesz::exact_bits(u)));
            let mut powers = Vec::with_capacity(n as usize + 1);
            let mut cur = ub.clone();
            for _ in 0..=n {
                powers.push(cur.clone());
                cur = cur.mul(&tb);
            }
            let xi = powers[n as usize].clone();
            let chain: f64 = powers.iter().map(|x| 1.0 - c * x.mul_i64(2).dist_int_lower().min(0.5).powi(2)).product();
            let terms = terms_for(params.lambda, p, xi.hi_f64(), 1e-13);
            let fv = bc_fourier_ball(&params, &xi, terms)?;
            let modulus = fv.value.norm();
            rows.push(ScanRow {
                n,
                u,
                xi: fv.xi,
                re: fv.value.re,
                im: fv.value.im,
                modulus,
                tail_bound: fv.tail_bound,
                bound_chain: chain,
                scan_value: modulus * (2.0 + fv.xi).ln().powf(alpha),
            });
        }
    }
    let sup = rows.iter().map(|r| r.scan_value).fold(0.0, f64::max);
    let chain_violations = rows.iter().filter(|r| r.modulus - r.tail_bound > r.bound_chain * (1.0 + 1e-12)).count();
    Ok(DecayScan { alpha, chain_constant: c, rows, sup, chain_violations })
}

/// Scan value at ξ = 0, `(log 2)^α`.
pub fn scan_value_at_zero(alpha: f64) -> f64 {
    std::f64::consts::LN_2.powf(alpha)
}

#[derive(Clone, Debug, Serialize)]
pub struct NonDecay {
    /// |ν̂_λ(θᴺ)| for N = 0..=N_max.
    pub values: Vec<f64>,
    pub running_inf: Vec<f64>,
    /// Smallest certified lower bound |value| − tail over the range.
    pub floor: f64,
}

/// `|ν̂_{1/θ}(θᴺ)|` for the unbiased convolution.
pub fn erdos_nondecay(theta: &AlgebraicInteger, n_max: u32) -> Result<NonDecay> {
    if classify(theta)?.kind != ClassKind::PV {
        return Err(Error::WrongClass("θ must be a PV number".into()));
    }
    nondecay_values(theta, n_max)
}

/// `|ν̂_{1/θ}(θᴺ)|`, N ≤ n_max, for any algebraic θ > 1.
pub fn nondecay_values(theta: &AlgebraicInteger, n_max: u32) -> Result<NonDecay> {
    let params = BernoulliParams::from_theta(theta.clone(), 0.5)?;
    let th = theta.theta_f64();
    let mut values = Vec::new();
    let mut running_inf = Vec::new();
    let mut floor = f64::INFINITY;
    let mut inf = f64::INFINITY;
    for n in 0..=n_max {
        let prec = 160 + (n as f64 * th.log2()).ceil() as u32;
        let xi = theta.theta_ball(prec)?.pow(n as u64);
        let terms = terms_for(params.lambda, 0.5, xi.hi_f64(), 1e-14);
        let fv = bc_fourier_ball(&params, &xi, terms)?;
        let v = fv.value.norm();
        inf = inf.min(v);
        floor = floor.min(v - fv.tail_bound);
        values.push(v);
        running_inf.push(inf);
    }
    Ok(NonDecay { values, running_inf, floor })
}
