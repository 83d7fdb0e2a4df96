//! Estimators and certificates for spectral measures of substitution
//! systems: twisted Birkhoff sums, G_N, Fejér ball bounds, product bounds
//! driven by a return word, Hölder exponents, the eigenvalue series, local
//! dimension from Lyapunov growth, and Birkhoff-sum exponents at ω = 0.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::diophantine::least_squares_slope;
use crate::error::{Error, Result};
use crate::num::{Ball, Cdd, Dd};
use crate::riesz::{cmat_identity, cmat_mul, exact_bits, phase_turns, CMat, RieszEngine};
use crate::substitution::{
    abelianization, lengths_at, perron_data, substitution_matrix, transpose, FixedPoint, Letter, Substitution,
};

/// Radius of the largest admissible enclosure of ω·length.
const DIST_TOL: f64 = 1e-30;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralBound {
    pub omega: f64,
    pub r: f64,
    pub upper: f64,
    pub n: u64,
    pub exponent: Option<f64>,
    /// Set when the bound exceeds the total mass and says nothing.
    pub vacuous: bool,
}

/// `N = ⌊(2r)⁻¹⌋`.
pub fn radius_to_n(r: f64) -> Result<u64> {
    if !(r > 0.0) || r > 0.5 {
        return Err(Error::RadiusTooLarge(r));
    }
    Ok((0.5 / r).floor() as u64)
}

/// `(π²/(4N))·G`, an upper bound for σ_f(B(ω, r)) when N = ⌊(2r)⁻¹⌋.
pub fn fejer_ball_bound(g_value: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    Ok(std::f64::consts::PI.powi(2) / (4.0 * n as f64) * g_value)
}

/// Ball bound at radius `r` from a value of G_N, flagged against the mass.
pub fn spectral_bound(omega: f64, r: f64, g_value: f64, total_mass: f64) -> Result<SpectralBound> {
    let n = radius_to_n(r)?;
    let upper = fejer_ball_bound(g_value, n)?;
    Ok(SpectralBound { omega, r, upper, n, exponent: None, vacuous: upper > total_mass })
}

/// `β = −2ε log_θ(1 − c₁δ²)`.
pub fn holder_exponent(theta: f64, c1: f64, delta: f64, epsilon: f64) -> f64 {
    -2.0 * epsilon * (1.0 - c1 * delta * delta).ln() / theta.ln()
}

/// Twisted Birkhoff sums over windows of a fixed point, assembled from the
/// prefix-suffix decomposition and the Riesz products of each level. With a
/// roof, phases use tiling lengths (tile start times).
#[derive(Clone, Debug)]
pub struct TwistedSums {
    pub fp: FixedPoint,
    engine: RieszEngine,
}

impl TwistedSums {
    /// Supports windows ending before `max_end`.
    pub fn new(z: &Substitution, max_end: u64) -> Result<Self> {
        let fp = FixedPoint::new(z)?;
        let depth = Self::depth(&fp.zeta, max_end);
        let engine = RieszEngine::discrete(&fp.zeta, depth);
        Ok(TwistedSums { fp, engine })
    }

    /// Suspension variant with roof `s` (indexed by letter).
    pub fn with_roof(z: &Substitution, roof: Vec<Ball>, max_end: u64) -> Result<Self> {
        let fp = FixedPoint::new(z)?;
        let depth = Self::depth(&fp.zeta, max_end);
        let engine = RieszEngine::suspension(&fp.zeta, roof, depth)?;
        Ok(TwistedSums { fp, engine })
    }

    fn depth(z: &Substitution, max_end: u64) -> usize {
        let mut lens = vec![1u128; z.m()];
        let mut h = 0;
        while lens.iter().copied().min().unwrap() < 2 * max_end as u128 + 2 {
            lens = z.images().iter().map(|w| w.iter().map(|&c| lens[c as usize]).sum()).collect();
            h += 1;
        }
        h
    }

    pub fn substitution(&self) -> &Substitution {
        &self.fp.zeta
    }

    pub fn engine(&self) -> &RieszEngine {
        &self.engine
    }

    /// Letters `[0, n)` of the fixed point.
    pub fn prefix(&self, n: usize) -> Vec<Letter> {
        self.fp.prefix(n)
    }

    /// `Σ_{start≤k<start+N} e(−ω·τ_k) f(x_k)` for each window `(start, N)`,
    /// with `f = Σ d_a 1_[a]` and τ_k the position (or start time) of x_k
    /// relative to x_start.
    pub fn sums(&mut self, d: &[Complex64], windows: &[(u64, u64)], omega: f64) -> Result<Vec<Complex64>> {
        let m = self.fp.zeta.m();
        if d.len() != m {
            return Err(Error::InvalidArgument("one coefficient per letter expected".into()));
        }
        let decs = windows
            .iter()
            .map(|&(s, n)| if n == 0 { Ok(None) } else { self.fp.decompose(s, n).map(Some) })
            .collect::<Result<Vec<_>>>()?;
        let depth = decs.iter().flatten().map(|x| x.n).max().unwrap_or(0);
        if depth > self.engine.max_level() {
            return Err(Error::InvalidArgument("window beyond precomputed range".into()));
        }
        // (Π_j d)_b for each level j
        let dv: CMat = d.iter().map(|z| vec![Cdd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }]).collect();
        let mut prod = cmat_identity(m);
        let mut level_vals = Vec::with_capacity(depth + 1);
        for j in 0..=depth {
            level_vals.push(cmat_mul(&prod, &dv).into_iter().map(|r| r[0].to_c64()).collect::<Vec<_>>());
            if j < depth {
                let mj = self.engine.transfer(j, omega)?.entries;
                prod = cmat_mul(&mj, &prod);
            }
        }
        let prec = self.engine.level_lengths(0)[0].prec().max(exact_bits(omega));
        let wb = Ball::from_f64(omega, prec);
        let mut out = Vec::with_capacity(windows.len());
        for dec in decs {
            let Some(dec) = dec else {
                out.push(Complex64::new(0.0, 0.0));
                continue;
            };
            let mut off = Ball::zero(prec);
            let mut first = true;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, w) in dec.pieces() {
                let lens = self.engine.level_lengths(j);
                for &b in w {
                    if first {
                        acc += level_vals[j][b as usize];
                        first = false;
                    } else {
                        let ph = phase_turns(&wb, &off)?;
                        acc += level_vals[j][b as usize] * Cdd::expi_neg_turns(ph).to_c64();
                    }
                    off = off.add(&lens[b as usize]);
                }
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// `S_N^x(f, ω)` for the window `x_prefix`, located in the fixed point.
pub fn birkhoff_twisted(z: &Substitution, d: &[Complex64], x_prefix: &[Letter], omega: f64) -> Result<Complex64> {
    let n = x_prefix.len();
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (_, pos, _) = crate::substitution::prefix_suffix_decomposition(z, x_prefix)?;
    let mut ts = TwistedSums::new(z, pos + n as u64)?;
    Ok(ts.sums(d, &[(pos, n as u64)], omega)?[0])
}

#[derive(Clone, Debug, Serialize)]
pub struct GEstimate {
    pub omega: f64,
    pub n: u64,
    /// Mean of N⁻¹|S_N^x|² over the windows.
    pub mean: f64,
    /// Max of N⁻¹|S_N^x|² over the windows.
    pub sup: f64,
    pub spread: f64,
}

/// `count` disjoint consecutive windows of length N (stride N).
pub fn default_windows(n: u64, count: usize) -> Vec<(u64, u64)> {
    (0..count as u64).map(|i| (i * n, n)).collect()
}

/// G_N(f, ω) by averaging over orbit windows.
pub fn g_estimate(ts: &mut TwistedSums, d: &[Complex64], omega: f64, windows: &[(u64, u64)]) -> Result<GEstimate> {
    if windows.is_empty() {
        return Err(Error::InvalidArgument("at least one window is needed".into()));
    }
    let n = windows[0].1;
    if windows.iter().any(|w| w.1 != n) || n == 0 {
        return Err(Error::InvalidArgument("windows must share a positive length".into()));
    }
    let vals: Vec<f64> = ts.sums(d, windows, omega)?.iter().map(|s| s.norm_sqr() / n as f64).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let sup = vals.iter().copied().fold(0.0, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GEstimate { omega, n, mean, sup, spread: sup - lo })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiophConstants {
    pub c1: f64,
    /// C' = c'/c.
    pub c_prime: f64,
    /// C₂ = log_θ(2c') + 2.
    pub c2: f64,
    /// C'' = 4Lc'θC'/(c(θ−1)).
    pub c_double: f64,
    /// c and c' with cθʲ ≤ |ζʲ(b)| ≤ c'θʲ for all j.
    pub c_low: f64,
    pub c_high: f64,
    pub theta: f64,
    pub return_word: Vec<Letter>,
    pub letter: Letter,
    pub max_image_len: usize,
    pub k_max: usize,
    /// Lower bound for c₃ beyond `k_max` from the projective contraction.
    pub tail_c3: f64,
}

impl DiophConstants {
    /// Constants for the suspension with roof `s`.
    pub fn suspension(&self, s: &[f64]) -> SuspensionConstants {
        let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = s.iter().copied().fold(0.0, f64::max);
        let c_block = self.c_prime / smin;
        let chigh = self.c_high * smax;
        let clow = self.c_low * smin;
        let th = self.theta;
        SuspensionConstants {
            c1: self.c1,
            c_block,
            c2: (4.0 * chigh).ln() / th.ln() + 2.0,
            c_flow: smax * 4.0 * self.max_image_len as f64 * chigh * th * c_block / (clow * (th - 1.0)),
            boundary: 2.0 * smax,
            s_min: smin,
            s_max: smax,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuspensionConstants {
    pub c1: f64,
    /// Per-block constant C'/min s.
    pub c_block: f64,
    pub c2: f64,
    pub c_flow: f64,
    /// Additive allowance for the partial tiles at both ends.
    pub boundary: f64,
    pub s_min: f64,
    pub s_max: f64,
}

/// c₁, C', C₂, C'' for a return word `v` with `vc` inside every ζ(b).
pub fn dioph_constants(z: &Substitution, v: &[Letter], k_max: usize) -> Result<DiophConstants> {
    let m = z.m();
    let Some(&c) = v.first() else {
        return Err(Error::InvalidArgument("empty return word".into()));
    };
    if v[1..].contains(&c) {
        return Err(Error::InvalidArgument("return word repeats its first letter".into()));
    }
    let mut vc = v.to_vec();
    vc.push(c);
    for b in 0..m as Letter {
        if !z.image(b).windows(vc.len()).any(|w| w == vc.as_slice()) {
            return Err(Error::InvalidArgument(format!(
                "{} is not a factor of the image of {}; pass to the witnessing power",
                z.display_word(&vc),
                z.display_word(&[b])
            )));
        }
    }
    let s = substitution_matrix(z);
    let st = transpose(&s);
    let pd = perron_data(&s, 128)?;
    let theta = pd.theta_f64();
    let ell = pd.l_f64();
    let emax = st.iter().flatten().copied().max().unwrap_or(1) as f64;
    let c3 = |x: &[f64]| x[c as usize] / (2.0 * m as f64 * emax * x.iter().copied().fold(0.0, f64::max));
    let safety = 1.0 - 1e-12;
    let mut c3_min = f64::INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max: f64 = 0.0;
    let mut x_last = vec![1.0; m];
    for k in 0..=k_max {
        let lens = lengths_at(z, k as u32);
        let x: Vec<f64> = lens.iter().map(|l| l.to_f64().unwrap()).collect();
        c3_min = c3_min.min(c3(&x));
        let tk = theta.powi(k as i32);
        for &xi in &x {
            y_min = y_min.min(xi / tk);
            y_max = y_max.max(xi / tk);
        }
        x_last = x.iter().map(|xi| xi / tk).collect();
    }
    // Hilbert projective distance to ℓ never increases under Sᵗ
    let ratios: Vec<f64> = x_last.iter().zip(&ell).map(|(x, l)| x / l).collect();
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    let lmax = ell.iter().copied().fold(0.0, f64::max);
    let lmin = ell.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_c3 = ell[c as usize] / (2.0 * m as f64 * emax * lmax) * (rmin / rmax);
    let c_low = y_min.min(rmin * lmin) * safety;
    let c_high = y_max.max(rmax * lmax) / safety;
    let c1 = c3_min.min(tail_c3).min((theta - 1.0) / (theta + 1.0)) * safety;
    let c_prime = c_high / c_low;
    let c2 = (2.0 * c_high).ln() / theta.ln() + 2.0;
    let lmax_img = z.max_image_len();
    let c_double = 4.0 * lmax_img as f64 * c_high * theta * c_prime / (c_low * (theta - 1.0));
    Ok(DiophConstants {
        c1,
        c_prime,
        c2,
        c_double,
        c_low,
        c_high,
        theta,
        return_word: v.to_vec(),
        letter: c,
        max_image_len: lmax_img,
        k_max,
        tail_c3,
    })
}

/// Certified lower bounds of ‖ω|ζᵏ(v)|‖ (tiling lengths for a suspension
/// engine), k = 0..n.
pub fn return_word_dists(engine: &RieszEngine, v: &[Letter], omega: f64, n: usize) -> Result<Vec<f64>> {
    if n > engine.max_level() + 1 {
        return Err(Error::InvalidArgument("engine has too few levels".into()));
    }
    let m = engine.substitution().m();
    let pop = abelianization(v, m);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lens = engine.level_lengths(k);
        let p = lens[0].prec().max(exact_bits(omega));
        let w = Ball::from_f64(omega, p);
        let mut len = Ball::zero(p);
        for (cnt, l) in pop.iter().zip(lens) {
            if *cnt != 0 {
                len = len.add(&l.mul_i64(*cnt));
            }
        }
        let x = w.mul(&len);
        if x.rad_f64() > DIST_TOL {
            return Err(Error::PrecisionExhausted { what: "‖ω·|ζᵏ(v)|‖".into(), cap: p });
        }
        out.push(x.dist_int_lower());
    }
    Ok(out)
}

/// `∏_{k<n}(1 − c₁‖ω|ζᵏ(v)|‖²)` from certified distances.
pub fn dioph_factor(dists: &[f64], c1: f64) -> f64 {
    dists.iter().map(|d| 1.0 - c1 * d * d).product()
}

/// Right side of the block inequality: `C'|ζⁿ(b)|∏_{k<n}(…)`, with tiling
/// lengths and C'/min s for a suspension engine.
pub fn dioph_product_bound(
    engine: &RieszEngine,
    consts: &DiophConstants,
    b: Letter,
    omega: f64,
    n: usize,
    roof: Option<&[f64]>,
) -> Result<f64> {
    let dists = return_word_dists(engine, &consts.return_word, omega, n)?;
    let len = engine.level_lengths(n)[b as usize].hi_f64();
    let pre = match roof {
        None => consts.c_prime,
        Some(s) => consts.suspension(s).c_block,
    };
    Ok(pre * len * dioph_factor(&dists, consts.c1))
}

/// Right side of the uniform bound for `|S_N^x(1_[a], ω)|`:
/// `C''N∏_{k=0}^{⌊log_θN − C₂⌋}(…)`.
pub fn dioph_sum_bound(engine: &RieszEngine, consts: &DiophConstants, omega: f64, n: u64) -> Result<f64> {
    let top = (n as f64).ln() / consts.theta.ln() - consts.c2;
    let count = if top < 0.0 { 0 } else { top.floor() as usize + 1 };
    let dists = return_word_dists(engine, &consts.return_word, omega, count)?;
    Ok(consts.c_double * n as f64 * dioph_factor(&dists, consts.c1))
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaProfile {
    pub omega: f64,
    pub delta: f64,
    /// `#{k < n : ‖ω|ζᵏ(v)|‖ ≥ δ}/n` for n = 1..=n_max.
    pub frequencies: Vec<f64>,
    /// Minimum over the second half of the profile.
    pub liminf_estimate: f64,
}

impl GammaProfile {
    /// Empirical membership at level ε; a finite-range statement only.
    pub fn exceeds(&self, epsilon: f64) -> bool {
        self.liminf_estimate > epsilon
    }
}

pub fn gamma_frequency(engine: &RieszEngine, v: &[Letter], omega: f64, delta: f64, n_max: usize) -> Result<GammaProfile> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidArgument("δ must lie in (0, 1/2]".into()));
    }
    let dists = return_word_dists(engine, v, omega, n_max)?;
    let mut hits = 0usize;
    let frequencies: Vec<f64> = dists
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if d >= delta {
                hits += 1;
            }
            hits as f64 / (k + 1) as f64
        })
        .collect();
    let liminf_estimate = frequencies[frequencies.len() / 2..].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GammaProfile { omega, delta, frequencies, liminf_estimate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeriesVerdict {
    Converging,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueTest {
    pub partial_sums: Vec<f64>,
    pub verdict: SeriesVerdict,
}

/// Partial sums of `Σ‖ω|ζᵏ(v)|‖²` with a heuristic tail verdict.
pub fn eigenvalue_test(engine: &RieszEngine, v: &[Letter], omega: f64, n_max: usize) -> Result<EigenvalueTest> {
    let dists = return_word_dists(engine, v, omega, n_max)?;
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = dists
        .iter()
        .map(|d| {
            acc += d * d;
            acc
        })
        .collect();
    let sq: Vec<f64> = dists.iter().map(|d| d * d).collect();
    let half = &sq[sq.len() / 2..];
    let tail: f64 = half.iter().sum();
    let mean_tail = tail / half.len().max(1) as f64;
    let verdict = if tail < 1e-18 {
        SeriesVerdict::Converging
    } else if mean_tail > 1e-3 {
        SeriesVerdict::Diverging
    } else {
        // geometric decay of the terms
        let pts: Vec<(f64, f64)> =
            half.iter().enumerate().filter(|(_, &t)| t > 0.0).map(|(i, &t)| (i as f64, t.ln())).collect();
        if pts.len() >= 4 && least_squares_slope(&pts) < -0.1 {
            SeriesVerdict::Converging
        } else {
            SeriesVerdict::Inconclusive
        }
    };
    Ok(EigenvalueTest { partial_sums, verdict })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimension {
    pub omega: f64,
    pub alpha: f64,
    /// `2 − 2 log_θ α`, clipped to [0, 2].
    pub lower_bound: f64,
    /// ‖Π_n‖∞^{1/n} for n = 1..=n_max.
    pub growth: Vec<f64>,
}

/// α_ω as θ times the largest tail value of `(‖Π_n(ω)‖∞/‖Π_n(0)‖∞)^{1/n}`.
pub fn local_dimension_bound(engine: &RieszEngine, theta: f64, omega: f64, n_max: usize) -> Result<LocalDimension> {
    if n_max < 10 {
        return Err(Error::InvalidArgument("n_max must be at least 10".into()));
    }
    let p = engine.product(n_max, omega)?;
    let z = engine.product(n_max, 0.0)?;
    let lo = (3 * n_max) / 4;
    let mut best: f64 = 0.0;
    let mut growth = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let num = p.partial_norms[n - 1];
        let den = z.partial_norms[n - 1];
        growth.push(num.powf(1.0 / n as f64));
        if n >= lo {
            best = best.max((num / den).powf(1.0 / n as f64));
        }
    }
    let alpha = theta * best.min(1.0);
    let lower_bound = (2.0 - 2.0 * alpha.ln() / theta.ln()).clamp(0.0, 2.0);
    Ok(LocalDimension { omega, alpha, lower_bound, growth })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroExponent {
    /// (N, max over windows |S_N(f, 0)|) on dyadic N.
    pub points: Vec<(u64, f64)>,
    pub fitted_slope: f64,
    /// `log_θ|θ₂|` when |θ₂| > 1.
    pub predicted: Option<f64>,
    /// Slope of max|S_N| against log log N when |θ₂| = 1.
    pub log_fit: Option<f64>,
    pub theta2_modulus: f64,
}

/// Growth exponent of `max_x |S_N^x(f, 0)|` over dyadic N ≤ `n_max`.
pub fn zero_exponent_scan(z: &Substitution, d: &[f64], n_max: u64) -> Result<ZeroExponent> {
    let m = z.m();
    if d.len() != m {
        return Err(Error::InvalidArgument("one coefficient per letter expected".into()));
    }
    let s = substitution_matrix(z);
    let pd = perron_data(&s, 128)?;
    let freq = pd.frequencies();
    let mean: f64 = d.iter().zip(&freq).map(|(a, b)| a * b).sum();
    let scale = d.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    if mean.abs() > 1e-9 * scale {
        return Err(Error::NotMeanZero(mean));
    }
    let fp = FixedPoint::new(z)?;
    let total = (8 * n_max).max(64) as usize;
    let w = fp.prefix(total);
    let mut pref = Vec::with_capacity(total + 1);
    pref.push(0.0);
    for &c in &w {
        pref.push(pref.last().unwrap() + d[c as usize]);
    }
    let mut points = Vec::new();
    let mut n = 1u64;
    while n <= n_max {
        let nn = n as usize;
        let best = (0..=total - nn).map(|o| (pref[o + nn] - pref[o]).abs()).fold(0.0, f64::max);
        points.push((n, best));
        n *= 2;
    }
    let lo = ((n_max as f64).sqrt() as u64).max(4);
    let fit: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 >= lo && p.1 > 0.0).map(|&(n, v)| ((n as f64).ln(), v.ln())).collect();
    let fitted_slope = least_squares_slope(&fit);
    let cp = crate::poly::Poly::charpoly(&s);
    let roots = crate::poly::certify_roots(&cp.squarefree_part(), 128)?;
    let theta = pd.theta_f64();
    let t2 = roots
        .iter()
        .map(|r| r.value_c64().norm())
        .filter(|x| (x - theta).abs() > 1e-9)
        .fold(0.0, f64::max);
    let (predicted, log_fit) = if t2 > 1.0 + 1e-12 {
        (Some(t2.ln() / theta.ln()), None)
    } else if (t2 - 1.0).abs() <= 1e-12 {
        let pts: Vec<(f64, f64)> =
            points.iter().filter(|p| p.0 >= 4).map(|&(n, v)| (((n as f64).ln()).ln(), v.max(1e-300).ln())).collect();
        (None, Some(least_squares_slope(&pts)))
    } else {
        (Some(0.0), None)
    };
    Ok(ZeroExponent { points, fitted_slope, predicted, log_fit, theta2_modulus: t2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz::phi_direct;
    use crate::substitution::find_return_word;

    fn example() -> Substitution {
        Substitution::parse(2, &["1222", "1"]).unwrap()
    }

    #[test]
    fn fejer_examples() {
        assert_eq!(radius_to_n(0.25).unwrap(), 2);
        assert!(matches!(radius_to_n(0.6), Err(Error::RadiusTooLarge(_))));
        let b = fejer_ball_bound(7.0, 7).unwrap();
        assert!((b - std::f64::consts::PI.powi(2) / 4.0).abs() < 1e-15);
        assert_eq!(fejer_ball_bound(0.0, 3).unwrap(), 0.0);
        assert!(spectral_bound(0.1, 1.0 / 14.0, 7.0, 1.0).unwrap().vacuous);
    }

    #[test]
    fn holder_exponent_example() {
        assert!((holder_exponent(2.0, 0.25, 0.5, 0.5) - 0.0931).abs() < 1e-4);
        assert_eq!(holder_exponent(2.0, 0.25, 0.5, 0.0), 0.0);
    }

    #[test]
    fn birkhoff_matches_direct_sum() {
        let z = example();
        let x = crate::substitution::parse_word("1222111", 2).unwrap();
        let d = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let s = birkhoff_twisted(&z, &d, &x, 0.3).unwrap();
        assert!((s - phi_direct(&x, 0, 0.3)).norm() < 1e-9);
        let mut ts = TwistedSums::new(&z, 5000).unwrap();
        let w = ts.prefix(5000);
        let d2 = [Complex64::new(0.7, 0.1), Complex64::new(-0.2, 0.5)];
        for &(st, n) in &[(0u64, 1u64), (3, 17), (101, 1500), (2222, 2777)] {
            let got = ts.sums(&d2, &[(st, n)], 0.4172).unwrap()[0];
            let win = &w[st as usize..(st + n) as usize];
            let want = d2[0] * phi_direct(win, 0, 0.4172) + d2[1] * phi_direct(win, 1, 0.4172);
            assert!((got - want).norm() < 1e-9, "{st} {n}");
        }
    }

    #[test]
    fn constants_for_single_letter() {
        let z = Substitution::parse(1, &["11"]).unwrap();
        let c = dioph_constants(&z, &[0], 10).unwrap();
        assert!((c.c1 - 0.25).abs() < 1e-9);
    }

    #[test]
    fn constants_for_example() {
        let z = example();
        let rw = find_return_word(&z, 8).unwrap();
        let zp = z.power(rw.power).unwrap();
        let c = dioph_constants(&zp, &rw.v, 30).unwrap();
        assert!(c.c1 > 0.0 && c.c1 < 1.0);
        assert!(c.c1 <= (c.theta - 1.0) / (c.theta + 1.0));
        assert!(c.c_prime >= 1.0);
        let c0 = dioph_constants(&zp, &rw.v, 0).unwrap();
        assert!(c0.c1 <= c.c1 + 1e-15 || c0.tail_c3 <= c.c1);
    }

    #[test]
    fn zero_exponent_examples() {
        let z = Substitution::parse(2, &["1112", "1222"]).unwrap();
        let r = zero_exponent_scan(&z, &[1.0, -1.0], 1 << 12).unwrap();
        assert!((r.predicted.unwrap() - 0.5).abs() < 1e-9);
        assert!((r.fitted_slope - 0.5).abs() < 0.1, "{:?} {}", r.points, r.fitted_slope);
        let tm = Substitution::parse(2, &["12", "21"]).unwrap();
        let r = zero_exponent_scan(&tm, &[1.0, -1.0], 1 << 12).unwrap();
        assert!(r.fitted_slope.abs() < 0.1);
        assert!(matches!(zero_exponent_scan(&tm, &[1.0, 0.0], 64), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn local_dimension_at_zero_is_zero() {
        let z = example();
        let e = RieszEngine::discrete(&z, 60);
        let r = local_dimension_bound(&e, 2.302775637731995, 0.0, 60).unwrap();
        assert_eq!(r.lower_bound, 0.0);
        let r = local_dimension_bound(&e, 2.302775637731995, 0.3, 60).unwrap();
        assert!(r.alpha < 2.302775637731995);
    }
}
