//! Nearest-integer sequences `tθᵏ = K_k + ε_k` computed exactly in ℤ[θ],
//! the decay product `exp(−Σ‖tθᵏ‖²)`, its window-escape structure, and the
//! Erdős–Kahane step machinery over a Vandermonde matrix.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::algebraic::{
    classify, prop_alg_constants, zt_mul_theta, AlgebraicInteger, ClassKind, PropAlgConstants, ZThetaElement,
    PREC_CAP,
};
use crate::error::{Error, Result};
use crate::num::{Ball, CBall};

/// `tθᵏ = K_k + ε_k` for `k = 0..=N`.
#[derive(Clone, Debug)]
pub struct PisotLikeSequence {
    pub theta: AlgebraicInteger,
    pub t: ZThetaElement,
    pub k: Vec<BigInt>,
    pub eps: Vec<Ball>,
    pub bits_used: u32,
}

impl PisotLikeSequence {
    pub fn len(&self) -> usize {
        self.k.len()
    }
    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
    /// Midpoint of ‖tθᵏ‖.
    pub fn dist(&self, k: usize) -> f64 {
        self.eps[k].mid_f64().abs()
    }
    pub fn dist_lower(&self, k: usize) -> f64 {
        self.eps[k].abs().lo_f64().max(0.0)
    }
    pub fn dist_upper(&self, k: usize) -> f64 {
        self.eps[k].abs().hi_f64()
    }

    /// Checks `K_{k+s} − Σ b_j K_{k+s−j} = −(ε_{k+s} − Σ b_j ε_{k+s−j})`
    /// for every k; returns the first index where the enclosure misses.
    pub fn recurrence_violation(&self) -> Option<usize> {
        let b = self.theta.recurrence_coeffs();
        let s = b.len();
        let p = self.eps.first().map(Ball::prec).unwrap_or(64);
        for k in 0..self.len().saturating_sub(s) {
            let mut lhs = self.k[k + s].clone();
            let mut rhs = self.eps[k + s].set_prec(p);
            for (j, bj) in b.iter().enumerate() {
                lhs -= bj * &self.k[k + s - 1 - j];
                rhs = rhs.sub(&self.eps[k + s - 1 - j].set_prec(p).mul_int(bj));
            }
            if !Ball::from_int(&lhs, p).add(&rhs).contains_zero() {
                return Some(k);
            }
        }
        None
    }

    /// Whenever `|ε_k|,…,|ε_{k+s}| < δ₁` the ε's obey the companion
    /// recursion. Returns `(windows tested, first failure)`.
    pub fn propagation_check(&self, delta1: f64) -> (usize, Option<usize>) {
        let b = self.theta.recurrence_coeffs();
        let s = b.len();
        let mut tested = 0;
        for k in 0..self.len().saturating_sub(s) {
            if (k..=k + s).all(|i| self.dist_upper(i) < delta1) {
                tested += 1;
                let mut r = self.eps[k + s].clone();
                for (j, bj) in b.iter().enumerate() {
                    r = r.sub(&self.eps[k + s - 1 - j].mul_int(bj));
                }
                if !r.contains_zero() {
                    return (tested, Some(k));
                }
            }
        }
        (tested, None)
    }
}

/// Precision policy: ⌈N log₂θ⌉ + s·bits(t) + 64 guard bits.
pub fn default_precision(theta: &AlgebraicInteger, t: &ZThetaElement, n: usize) -> u32 {
    let lg = theta.theta_f64().log2();
    ((n as f64 * lg).ceil() as u64 + theta.degree() as u64 * t.max_coord_bits() + 64).min(PREC_CAP as u64) as u32
}

/// Exact orbit of `t` under multiplication by θ with certified rounding.
pub fn pisot_sequence(theta: &AlgebraicInteger, t: &ZThetaElement, n: usize, err: f64) -> Result<PisotLikeSequence> {
    if t.coords.len() != theta.degree() {
        return Err(Error::InvalidArgument("t must have one coordinate per basis element".into()));
    }
    if !(err > 0.0) {
        return Err(Error::InvalidArgument("error target must be positive".into()));
    }
    let need = (-err.log2()).ceil().max(0.0) as u32 + 2;
    let mut prec = default_precision(theta, t, n).saturating_add(need).min(PREC_CAP);
    loop {
        let th = theta.theta_ball(prec)?;
        let mut x = t.clone();
        let mut ks = Vec::with_capacity(n + 1);
        let mut eps = Vec::with_capacity(n + 1);
        let mut failure = None;
        for k in 0..=n {
            let v = x.value(&th);
            match v.nearest_int() {
                Some((kk, e)) if 2.0 * e.rad_f64() <= err => {
                    ks.push(kk);
                    eps.push(e);
                }
                Some(_) => {
                    failure = Some(false);
                    break;
                }
                None => {
                    failure = Some(true);
                    break;
                }
            }
            if k < n {
                x = zt_mul_theta(&x, theta.poly());
            }
        }
        match failure {
            None => {
                return Ok(PisotLikeSequence { theta: theta.clone(), t: t.clone(), k: ks, eps, bits_used: prec });
            }
            Some(half) if prec >= PREC_CAP => {
                return Err(if half {
                    Error::HalfIntegerAmbiguity { bits: prec }
                } else {
                    Error::precision("nearest-integer sequence", PREC_CAP)
                });
            }
            Some(_) => prec = prec.saturating_mul(2).min(PREC_CAP),
        }
    }
}

/// ‖tθᵏ‖ for real `t`, k = 0..=n, as certified `(lower, upper)` pairs.
pub fn real_orbit_dists(theta: &AlgebraicInteger, t: f64, n: usize, err: f64) -> Result<Vec<(f64, f64)>> {
    let lg = theta.theta_f64().log2();
    let tb = t.abs().log2().max(0.0);
    let need = (-err.log2()).ceil().max(0.0);
    let mut prec = ((n as f64 * lg + tb + need).ceil() as u32 + 64 + crate::riesz::exact_bits(t)).min(PREC_CAP);
    loop {
        let th = theta.theta_ball(prec)?;
        let mut x = Ball::from_f64(t, prec);
        let mut out = Vec::with_capacity(n + 1);
        let mut ok = true;
        for _ in 0..=n {
            let lo = x.dist_int_lower();
            let hi = x.dist_int_upper();
            if hi - lo > err {
                ok = false;
                break;
            }
            out.push((lo, hi));
            x = x.mul(&th);
        }
        if ok {
            return Ok(out);
        }
        if prec >= PREC_CAP {
            return Err(Error::precision("‖tθᵏ‖ for real t", PREC_CAP));
        }
        prec = prec.saturating_mul(2).min(PREC_CAP);
    }
}

/// δ₁ and β, with a fallback β = 2 for inputs outside the hypothesis.
fn window_constants(theta: &AlgebraicInteger, diagnostic: bool) -> Result<(f64, u64, Option<PropAlgConstants>, bool)> {
    match prop_alg_constants(theta) {
        Ok(c) => Ok((c.delta1, c.beta, Some(c), true)),
        Err(Error::WrongClass(msg)) => {
            if !diagnostic {
                return Err(Error::WrongClass(msg));
            }
            let s = theta.degree() as f64;
            let h = theta.height().to_f64().unwrap_or(f64::MAX);
            Ok((1.0 / (1.0 + s * h), 2, None, false))
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropAlgProduct {
    /// `log exp(−Σ_{k<N}‖tθᵏ‖²)` for N = 0..=N_max (upper enclosure).
    pub log_values: Vec<f64>,
    pub constants: Option<PropAlgConstants>,
    /// Set when the input violates the hypothesis (diagnostic runs only).
    pub hypothesis_violated: bool,
    pub t_value: f64,
    /// First N where the bound is claimed.
    pub first_n: usize,
    /// C fitted on `first_n ≤ N ≤ 10`.
    pub fitted_c: f64,
    /// Least-squares slope of log value against log N over N ≥ N_max/8.
    pub decay_slope: f64,
    pub monotone: bool,
    pub first_violation: Option<usize>,
}

impl PropAlgProduct {
    pub fn value(&self, n: usize) -> f64 {
        self.log_values[n].exp()
    }

    /// `C (log(1+t))^{1/log β} N^{−α}` for t ≥ 1, `C N^{−α}` otherwise.
    pub fn bound(&self, n: usize) -> Option<f64> {
        let c = self.constants.as_ref()?;
        Some(self.fitted_c * bound_shape(c, self.t_value, n))
    }
}

fn bound_shape(c: &PropAlgConstants, t: f64, n: usize) -> f64 {
    let pre = if t >= 1.0 { (1.0 + t).ln().powf(1.0 / (c.beta as f64).ln()) } else { 1.0 };
    pre * (n as f64).powf(-c.alpha)
}

/// `exp(−Σ_{k<N}‖tθᵏ‖²)` for all N ≤ `n_max`, checked against the
/// power-of-N bound with a constant fitted at small N.
pub fn prop_alg_product(theta: &AlgebraicInteger, t: &ZThetaElement, n_max: usize, diagnostic: bool) -> Result<PropAlgProduct> {
    let (_, _, consts, ok) = window_constants(theta, diagnostic)?;
    let seq = pisot_sequence(theta, t, n_max.max(1), 1e-20)?;
    let t_value = t.value(&theta.theta_ball(128)?).mid_f64();
    if t_value <= 0.0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let mut log_values = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    log_values.push(0.0);
    for k in 0..n_max {
        let d = seq.dist_lower(k);
        acc += d * d;
        log_values.push(-acc);
    }
    let monotone = log_values.windows(2).all(|w| w[1] <= w[0]);
    let first_n = if t_value >= 1.0 {
        1
    } else {
        2 * ((1.0 / t_value).ln() / theta.theta_f64().ln()).ceil() as usize
    };
    let mut fitted_c = f64::NAN;
    let mut first_violation = None;
    if let Some(c) = &consts {
        let hi = 10.min(n_max);
        fitted_c = (first_n..=hi)
            .map(|n| log_values[n].exp() / bound_shape(c, t_value, n))
            .fold(0.0, f64::max);
        for n in first_n.max(1)..=n_max {
            let b = fitted_c * bound_shape(c, t_value, n);
            if log_values[n].exp() > b * (1.0 + 1e-12) {
                first_violation = Some(n);
                break;
            }
        }
    }
    let decay_slope = tail_slope(&log_values, n_max);
    Ok(PropAlgProduct {
        log_values,
        constants: consts,
        hypothesis_violated: !ok,
        t_value,
        first_n,
        fitted_c,
        decay_slope,
        monotone,
        first_violation,
    })
}

fn tail_slope(log_values: &[f64], n_max: usize) -> f64 {
    let lo = (n_max / 8).max(1);
    let pts: Vec<(f64, f64)> = (lo..=n_max).map(|n| ((n as f64).ln(), log_values[n])).collect();
    least_squares_slope(&pts)
}

/// Slope of the least-squares line through the points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowVerdict {
    pub k: usize,
    /// Index in `[k, kβ−1]` with ‖tθⁱ‖ ≥ δ₁, if any.
    pub witness: Option<usize>,
    pub max_dist: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    pub delta1: f64,
    pub beta: u64,
    /// Empirical constant K: last failing window start plus 5.
    pub k_const: usize,
    pub k0: usize,
    pub hypothesis_violated: bool,
    /// One verdict per k in `[k0, k_max]`.
    pub windows: Vec<WindowVerdict>,
    /// Largest k ≤ k_max whose window fails, scanning from k = 1.
    pub last_failure: Option<usize>,
    pub first_violation: Option<usize>,
}

/// For each k in `[k0, k_max]`, looks for an index `i ∈ [k, kβ−1]` with
/// ‖tθⁱ‖ ≥ δ₁ (certified lower bound).
pub fn window_escape_check(
    theta: &AlgebraicInteger,
    t: &ZThetaElement,
    k0: Option<usize>,
    k_max: usize,
    diagnostic: bool,
) -> Result<WindowReport> {
    let (delta1, beta, _, ok) = window_constants(theta, diagnostic)?;
    let beta_us = beta as usize;
    let top = (k_max.max(1) * beta_us).saturating_sub(1);
    let seq = pisot_sequence(theta, t, top, 1e-12)?;
    let verdict = |k: usize| {
        let hi = (k * beta_us).saturating_sub(1).max(k);
        let mut witness = None;
        let mut max_dist: f64 = 0.0;
        for i in k..=hi {
            max_dist = max_dist.max(seq.dist(i));
            if witness.is_none() && seq.dist_lower(i) >= delta1 {
                witness = Some(i);
            }
        }
        WindowVerdict { k, witness, max_dist }
    };
    let all: Vec<WindowVerdict> = (1..=k_max).map(verdict).collect();
    let last_failure = all.iter().rev().find(|v| v.witness.is_none()).map(|v| v.k);
    let k_const = last_failure.map_or(0, |k| k + 5);
    let k0 = k0.unwrap_or_else(|| {
        let tv = t.value(&theta.theta_ball(128).expect("θ ball")).mid_f64().abs();
        let t2 = theta.conjugate_moduli().first().copied().unwrap_or(1.0);
        let lead = if tv > 1.0 && t2 > 1.0 {
            (theta.degree() as f64 * tv.ln() / t2.ln()).ceil() as usize
        } else {
            0
        };
        lead + k_const + 1
    });
    let windows: Vec<WindowVerdict> = if k0 == 0 {
        std::iter::once(verdict(0)).chain(all.iter().cloned()).collect()
    } else {
        all.into_iter().filter(|v| v.k >= k0).collect()
    };
    let first_violation = windows.iter().find(|v| v.witness.is_none()).map(|v| v.k);
    Ok(WindowReport {
        delta1,
        beta,
        k_const,
        k0,
        hypothesis_violated: !ok,
        windows,
        last_failure,
        first_violation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EkConstants {
    pub rho: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub theta_list: Vec<(f64, f64)>,
    pub vandermonde_norm: f64,
    pub vandermonde_inv_norm: f64,
    /// θ₁‖Θ‖∞‖Θ⁻¹‖∞.
    pub kappa: f64,
    /// Companion prediction row `(ΘDiag[θ]Θ⁻¹)_{m,·}`.
    pub step_row: Vec<Complex64>,
}

impl EkConstants {
    /// `log(2L^{m+1}k) / (k log|θ_{m−q}|)`.
    pub fn hausdorff_bound(&self, k: u64, theta_mq_modulus: f64) -> f64 {
        let m = self.theta_list.len() as f64;
        ((2.0f64).ln() + (m + 1.0) * (self.l as f64).ln() + (k as f64).ln()) / (k as f64 * theta_mq_modulus.ln())
    }
}

fn cinv(a: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].norm().partial_cmp(&m[y][c].norm()).unwrap())?;
        if m[p][c].norm() == 0.0 {
            return None;
        }
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != Complex64::new(0.0, 0.0) {
                    for j in 0..2 * n {
                        let t = m[c][j];
                        m[r][j] -= f * t;
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn norm_inf(a: &[Vec<Complex64>]) -> f64 {
    a.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// ρ and L from the Vandermonde matrix of the eigenvalues, θ₁ first.
pub fn ek_constants(theta_list: &[Complex64]) -> Result<EkConstants> {
    let m = theta_list.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty eigenvalue list".into()));
    }
    for (i, a) in theta_list.iter().enumerate() {
        if a.norm() == 0.0 {
            return Err(Error::ZeroEigenvalue);
        }
        for b in &theta_list[i + 1..] {
            if (a - b).norm() <= 1e-12 * a.norm().max(1.0) {
                return Err(Error::RepeatedEigenvalue);
            }
        }
    }
    let vand: Vec<Vec<Complex64>> = (0..m).map(|i| theta_list.iter().map(|t| t.powi(i as i32)).collect()).collect();
    let inv = cinv(&vand).ok_or(Error::RepeatedEigenvalue)?;
    let nv = norm_inf(&vand);
    let ni = norm_inf(&inv);
    let theta1 = theta_list[0].norm();
    let kappa = theta1 * nv * ni;
    let rho = 0.5 / (1.0 + kappa);
    let l = (2.0 + kappa).floor() as u64;
    let step_row = (0..m)
        .map(|j| (0..m).map(|i| vand[m - 1][i] * theta_list[i] * inv[i][j]).sum())
        .collect();
    Ok(EkConstants {
        rho,
        l,
        theta_list: theta_list.iter().map(|z| (z.re, z.im)).collect(),
        vandermonde_norm: nv,
        vandermonde_inv_norm: ni,
        kappa,
        step_row,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StepPrediction {
    /// `(ΘDiag[θ]Θ⁻¹K⃗_n)_m`.
    pub center: f64,
    /// The integer nearest the center; the next K when all ε are below ρ.
    pub unique: i64,
    /// Every integer within `(1+θ₁‖Θ‖‖Θ⁻¹‖)/2` of the center.
    pub candidates: Vec<i64>,
}

/// Candidates for `K_{n+m}` given `K_n, …, K_{n+m−1}`.
pub fn ek_step_predict(window: &[i64], consts: &EkConstants, err: f64) -> Result<StepPrediction> {
    let m = consts.step_row.len();
    if window.len() != m {
        return Err(Error::InvalidArgument(format!("window must hold {m} values")));
    }
    let mut center = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (c, &k) in consts.step_row.iter().zip(window) {
        center += c * k as f64;
        scale += c.norm() * (k as f64).abs();
    }
    // rounding error of the center, relative to its terms
    if scale * 1e-13 > err {
        return Err(Error::precision("Erdős–Kahane step prediction", 53));
    }
    let c = center.re;
    let half = 0.5 * (1.0 + consts.kappa);
    let lo = (c - half).ceil() as i64;
    let hi = (c + half).floor() as i64;
    Ok(StepPrediction { center: c, unique: c.round() as i64, candidates: (lo..=hi).collect() })
}

#[derive(Clone, Debug, Serialize)]
pub struct EkFrequency {
    pub count: usize,
    pub n: usize,
    pub dists: Vec<f64>,
}

/// `#{n ∈ [1,N] : ‖ωΣⱼaⱼθⱼⁿ‖ ≥ ρ}` with ball arithmetic on the exact
/// dyadic inputs.
pub fn ek_frequency(theta_list: &[Complex64], a: &[Complex64], omega: f64, n: usize, rho: f64) -> Result<EkFrequency> {
    if theta_list.len() != a.len() || a.is_empty() {
        return Err(Error::InvalidArgument("coefficient and eigenvalue lists must match".into()));
    }
    if (a[0] - Complex64::new(1.0, 0.0)).norm() != 0.0 {
        return Err(Error::InvalidArgument("a₁ must equal 1".into()));
    }
    for (i, t) in theta_list.iter().enumerate() {
        if t.im != 0.0 {
            let partner = theta_list.iter().position(|u| *u == t.conj());
            match partner {
                Some(j) if a[j] == a[i].conj() => {}
                _ => return Err(Error::InvalidArgument("coefficients must respect conjugate pairs".into())),
            }
        }
    }
    let th1 = theta_list.iter().map(|t| t.norm()).fold(1.0, f64::max);
    let extra: u32 = theta_list
        .iter()
        .chain(a)
        .flat_map(|z| [z.re, z.im])
        .chain([omega])
        .map(crate::riesz::exact_bits)
        .max()
        .unwrap_or(0);
    let mut prec = ((n as f64 * th1.log2()).ceil() as u32 + 96 + extra).min(PREC_CAP);
    'outer: loop {
        let w = Ball::from_f64(omega, prec);
        let th: Vec<CBall> = theta_list.iter().map(|z| CBall::from_f64(z.re, z.im, prec)).collect();
        let mut terms: Vec<CBall> = a.iter().map(|z| CBall::from_f64(z.re, z.im, prec)).collect();
        let mut count = 0;
        let mut dists = Vec::with_capacity(n);
        for _ in 1..=n {
            for (x, t) in terms.iter_mut().zip(&th) {
                *x = x.mul(t);
            }
            let sum = terms.iter().skip(1).fold(terms[0].clone(), |acc, x| acc.add(x));
            let v = sum.re.mul(&w);
            let lo = v.dist_int_lower();
            let hi = v.dist_int_upper();
            if lo >= rho {
                count += 1;
            } else if hi >= rho {
                if prec >= PREC_CAP {
                    return Err(Error::precision("Erdős–Kahane frequency", PREC_CAP));
                }
                prec = prec.saturating_mul(2).min(PREC_CAP);
                continue 'outer;
            }
            dists.push(0.5 * (lo + hi));
        }
        return Ok(EkFrequency { count, n, dists });
    }
}

/// Classification guard shared by callers that need a non-PV θ.
pub fn require_conjugate_outside(theta: &AlgebraicInteger) -> Result<()> {
    let c = classify(theta)?;
    if c.kind != ClassKind::HasConjugateOutside {
        return Err(Error::WrongClass(format!(
            "θ must have a conjugate outside the unit circle, got {:?}",
            c.kind
        )));
    }
    Ok(())
}
