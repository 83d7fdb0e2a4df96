//! Suspension flows over substitutions: roofs, twisted ergodic integrals,
//! product bounds, the log-Hölder certificate, the Hölder cocycle Φ₂⁺ and the
//! zero-frequency experiments built on it.
//!
//! Points of the flow are anchored on the one-sided fixed point: an
//! [`Anchor`] is a tile index plus an offset inside that tile. Times are
//! measured from the start of tile 0.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebraic::{classify, prop_alg_constants, AlgebraicInteger, ClassKind};
use crate::error::{Error, Result};
use crate::num::Ball;
use crate::poly::{certify_roots, Poly};
use crate::riesz::{exact_bits, phase_turns, RieszEngine, PHASE_PREC};
use crate::spectral::{return_word_dists, DiophConstants, TwistedSums};
use crate::substitution::{
    abelianization, ball_kernel_vector, is_primitive, perron_data, substitution_matrix, transpose, FixedPoint,
    IMat, Letter, Substitution,
};

/// PF eigenvector of Sᵗ normalized to Σ sⱼ = 1.
pub fn self_similar_roof(z: &Substitution, precision_bits: u32) -> Result<Vec<Ball>> {
    let s = substitution_matrix(z);
    if is_primitive(&s).is_none() {
        return Err(Error::NotPrimitive);
    }
    let pd = perron_data(&s, precision_bits)?;
    let total = pd.l_vec.iter().fold(Ball::zero(precision_bits), |a, b| a.add(b));
    pd.l_vec
        .iter()
        .map(|x| x.div(&total).ok_or_else(|| Error::precision("roof normalization", precision_bits)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Anchor {
    /// Tile index in the fixed point.
    pub n: u64,
    /// Offset inside tile `n`, in `[0, s_{x_n})`.
    pub u: f64,
}

#[derive(Clone, Debug)]
pub struct SuspensionFlow {
    pub zeta: Substitution,
    pub roof: Vec<f64>,
    pub self_similar: bool,
    roof_balls: Vec<Ball>,
    fp: FixedPoint,
    ilen: Vec<Vec<u128>>,
    tlen: Vec<Vec<Ball>>,
    tlen_f: Vec<Vec<f64>>,
    sums: Option<(u64, TwistedSums)>,
}

impl SuspensionFlow {
    /// Flow under an arbitrary positive roof; `normalize` rescales to Σ sⱼ = 1.
    pub fn new(z: &Substitution, roof: &[f64], normalize: bool) -> Result<Self> {
        if roof.len() != z.m() || !roof.iter().all(|x| x.is_finite() && *x > 0.0) {
            return Err(Error::InvalidArgument("roof must be positive with one entry per letter".into()));
        }
        let total: f64 = roof.iter().sum();
        let r: Vec<f64> = if normalize { roof.iter().map(|x| x / total).collect() } else { roof.to_vec() };
        let p = r.iter().map(|&x| exact_bits(x)).max().unwrap_or(0).max(PHASE_PREC);
        let balls = r.iter().map(|&x| Ball::from_f64(x, p)).collect();
        Self::build(z, balls, false)
    }

    /// Self-similar flow: the roof is the PF eigenvector of Sᵗ.
    pub fn self_similar(z: &Substitution, precision_bits: u32) -> Result<Self> {
        let balls = self_similar_roof(z, precision_bits.max(PHASE_PREC))?;
        Self::build(z, balls, true)
    }

    fn build(z: &Substitution, roof_balls: Vec<Ball>, self_similar: bool) -> Result<Self> {
        if is_primitive(&substitution_matrix(z)).is_none() {
            return Err(Error::NotPrimitive);
        }
        let fp = FixedPoint::new(z)?;
        let roof = roof_balls.iter().map(Ball::mid_f64).collect();
        let ilen = vec![vec![1u128; z.m()]];
        let tlen = vec![roof_balls.clone()];
        let tlen_f = vec![roof_balls.iter().map(Ball::mid_f64).collect()];
        Ok(SuspensionFlow { zeta: z.clone(), roof, self_similar, roof_balls, fp, ilen, tlen, tlen_f, sums: None })
    }

    pub fn roof_balls(&self) -> &[Ball] {
        &self.roof_balls
    }

    /// The substitution ζ^p whose fixed point anchors the flow.
    pub fn anchor_substitution(&self) -> &Substitution {
        &self.fp.zeta
    }

    pub fn fixed_point_power(&self) -> u32 {
        self.fp.power
    }

    pub fn theta(&self) -> f64 {
        perron_data(&substitution_matrix(&self.zeta), 64).map(|p| p.theta_f64()).unwrap_or(f64::NAN)
    }

    fn ensure(&mut self, index: u128, time: f64) {
        let a = self.fp.letter as usize;
        while self.ilen.last().unwrap()[a] <= index || self.tlen_f.last().unwrap()[a] <= time {
            let k = self.ilen.len() - 1;
            let imgs = self.fp.zeta.images();
            let il = imgs.iter().map(|w| w.iter().fold(0u128, |s, &c| s.saturating_add(self.ilen[k][c as usize]))).collect();
            let prec = self.roof_balls[0].prec();
            let tl: Vec<Ball> = imgs
                .iter()
                .map(|w| w.iter().fold(Ball::zero(prec), |s, &c| s.add(&self.tlen[k][c as usize])))
                .collect();
            self.tlen_f.push(tl.iter().map(Ball::mid_f64).collect());
            self.tlen.push(tl);
            self.ilen.push(il);
        }
    }

    /// Letter and start time of tile `n`.
    pub fn tile(&mut self, n: u64) -> (Letter, Ball) {
        self.ensure(n as u128, 0.0);
        let mut h = self.ilen.len() - 1;
        let mut b = self.fp.letter;
        let mut rem = n as u128;
        let mut start = Ball::zero(self.roof_balls[0].prec());
        while h > 0 {
            for &c in self.fp.zeta.image(b) {
                let l = self.ilen[h - 1][c as usize];
                if rem < l {
                    b = c;
                    break;
                }
                rem -= l;
                start = start.add(&self.tlen[h - 1][c as usize]);
            }
            h -= 1;
        }
        (b, start)
    }

    /// Tile containing `time`, its letter and the offset inside it.
    pub fn locate(&mut self, time: f64) -> Result<(Anchor, Letter)> {
        if !(time >= 0.0) || !time.is_finite() {
            return Err(Error::InvalidArgument("times are measured forward from tile 0".into()));
        }
        self.ensure(0, time);
        let mut h = self.tlen_f.len() - 1;
        let mut b = self.fp.letter;
        let mut rem = time;
        let mut idx: u128 = 0;
        while h > 0 {
            let img = self.fp.zeta.image(b);
            let mut next = *img.last().unwrap();
            for (i, &c) in img.iter().enumerate() {
                let l = self.tlen_f[h - 1][c as usize];
                if rem < l || i + 1 == img.len() {
                    next = c;
                    break;
                }
                rem -= l;
                idx += self.ilen[h - 1][c as usize];
            }
            b = next;
            h -= 1;
        }
        let s = self.roof[b as usize];
        if rem >= s * (1.0 - 1e-14) {
            // rounding put us at the very end of the tile
            let n = idx as u64 + 1;
            let (c, _) = self.tile(n);
            return Ok((Anchor { n, u: 0.0 }, c));
        }
        Ok((Anchor { n: idx as u64, u: rem.max(0.0) }, b))
    }

    /// Time of an anchor, measured from the start of tile 0.
    pub fn time_of(&mut self, x: Anchor) -> f64 {
        self.tile(x.n).1.mid_f64() + x.u
    }

    /// `|v|_s`.
    pub fn tiling_length(&self, v: &[Letter]) -> f64 {
        v.iter().map(|&c| self.roof[c as usize]).sum()
    }

    fn twisted_sums(&mut self, end: u64) -> Result<&mut TwistedSums> {
        let rebuild = match &self.sums {
            Some((cap, _)) => *cap < end,
            None => true,
        };
        if rebuild {
            let cap = end.max(1024).next_power_of_two();
            let ts = TwistedSums::with_roof(&self.zeta, self.roof_balls.clone(), cap)?;
            self.sums = Some((cap, ts));
        }
        Ok(&mut self.sums.as_mut().unwrap().1)
    }

    /// Z^p: scales the tiling by θ^p and substitutes, where p is the
    /// fixed-point power.
    pub fn renormalize(&mut self, x: Anchor) -> Result<Anchor> {
        if !self.self_similar {
            return Err(Error::WrongClass("the geometric substitution needs a self-similar roof".into()));
        }
        let (b, _) = self.tile(x.n);
        let np: u128 = if x.n == 0 {
            0
        } else {
            let dec = self.fp.decompose(0, x.n)?;
            self.ensure(0, 0.0);
            while self.ilen.len() < dec.n + 3 {
                let t = self.tlen_f.last().unwrap()[self.fp.letter as usize] * 2.0 + 1.0;
                self.ensure(0, t);
            }
            dec.pieces().iter().map(|(j, w)| w.iter().map(|&c| self.ilen[j + 1][c as usize]).sum::<u128>()).sum()
        };
        let thp = self.theta().powi(self.fp.power as i32);
        let mut rem = thp * x.u;
        let img = self.fp.zeta.image(b).to_vec();
        for (i, &c) in img.iter().enumerate() {
            let s = self.roof[c as usize];
            if rem < s || i + 1 == img.len() {
                return Ok(Anchor { n: (np + i as u128) as u64, u: rem.min(s).max(0.0) });
            }
            rem -= s;
        }
        unreachable!()
    }
}

/// `∫₀^L e^{−2πiωt} dt`.
pub fn segment_integral(omega: f64, len: f64) -> Complex64 {
    let x = 2.0 * std::f64::consts::PI * omega * len;
    if x.abs() < 1e-8 {
        return Complex64::new(len, -len * x / 2.0);
    }
    let h = (x / 2.0).sin();
    Complex64::new(len * x.sin() / x, -len * 2.0 * h * h / x)
}

#[derive(Clone, Debug, Serialize)]
pub struct ErgodicIntegral {
    pub value: Complex64,
    /// Total length of the partial tiles at both ends.
    pub boundary: f64,
    pub full_tiles: u64,
}

/// `S_R^{(x,t)}(1_{𝔛_a}, ω) = ∫₀^R e^{−2πiωτ} 1_{𝔛_a}(h_{t+τ}x) dτ`, with the
/// whole tiles summed through the Riesz products and the two partial tiles
/// integrated exactly.
pub fn twisted_ergodic_integral(
    flow: &mut SuspensionFlow,
    x: Anchor,
    t_offset: f64,
    a: Letter,
    omega: f64,
    r: f64,
) -> Result<ErgodicIntegral> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("R must be positive".into()));
    }
    if a as usize >= flow.zeta.m() {
        return Err(Error::InvalidArgument("letter out of range".into()));
    }
    let p0 = flow.time_of(x) + t_offset;
    let (x0, b0) = flow.locate(p0)?;
    let (x1, b1) = flow.locate(p0 + r)?;
    let sa = flow.roof[a as usize];
    let zero = Complex64::new(0.0, 0.0);
    if x1.n == x0.n {
        let value = if b0 == a { segment_integral(omega, r) } else { zero };
        return Ok(ErgodicIntegral { value, boundary: r, full_tiles: 0 });
    }
    let head = flow.roof[b0 as usize] - x0.u;
    let mut value = if b0 == a { segment_integral(omega, head) } else { zero };
    let n0 = x0.n + 1;
    let shift = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * omega * head);
    let pref = segment_integral(omega, sa);
    if x1.n > n0 {
        let mut d = vec![zero; flow.zeta.m()];
        d[a as usize] = Complex64::new(1.0, 0.0);
        let ts = flow.twisted_sums(x1.n + 1)?;
        let s = ts.sums(&d, &[(n0, x1.n - n0)], omega)?[0];
        value += shift * pref * s;
    }
    if b1 == a && x1.u > 0.0 {
        let diff = flow.tile(x1.n).1.sub(&flow.tile(n0).1);
        let p = diff.prec().max(exact_bits(omega));
        let ph = phase_turns(&Ball::from_f64(omega, p), &diff)?;
        let e = crate::num::Cdd::expi_neg_turns(ph).to_c64();
        value += shift * e * segment_integral(omega, x1.u);
    }
    Ok(ErgodicIntegral { value, boundary: head + x1.u, full_tiles: x1.n - n0 })
}

/// Power substitution and return word used for the flow bounds.
pub fn return_word_setup(z: &Substitution, k_max: usize) -> Result<(Substitution, DiophConstants)> {
    let rw = crate::substitution::find_return_word(z, 64)?;
    let zl = z.power(rw.power)?;
    let consts = crate::spectral::dioph_constants(&zl, &rw.v, k_max)?;
    Ok((zl, consts))
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowBound {
    pub bound: f64,
    pub product: f64,
    pub factors: usize,
}

/// `C''_s R ∏_{k=0}^{⌊log_θR − C₂⌋}(1 − c₁‖ω|ζᵏ(v)|_s‖²) + 2 max s`, where ζ,
/// θ and the constants refer to the power substitution `zl` of `consts`.
pub fn flow_product_bound(
    flow: &SuspensionFlow,
    zl: &Substitution,
    consts: &DiophConstants,
    omega: f64,
    r: f64,
) -> Result<FlowBound> {
    let sc = consts.suspension(&flow.roof);
    let top = r.ln() / consts.theta.ln() - sc.c2;
    let factors = if top < 0.0 { 0 } else { top.floor() as usize + 1 };
    let product = if factors == 0 || omega == 0.0 {
        1.0
    } else {
        let engine = RieszEngine::suspension(zl, flow.roof_balls.clone(), factors)?;
        let d = return_word_dists(&engine, &consts.return_word, omega, factors)?;
        crate::spectral::dioph_factor(&d, consts.c1)
    };
    Ok(FlowBound { bound: sc.c_flow * r * product + sc.boundary, product, factors })
}

#[derive(Clone, Debug, Serialize)]
pub struct LogHolderRow {
    pub omega: f64,
    pub r: f64,
    pub bound: f64,
    pub fejer_bound: f64,
    pub out_of_regime: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogHolderCertificate {
    pub gamma: f64,
    pub c1: f64,
    /// α of θ^ℓ, ℓ the witnessing power of the return word; enters γ.
    pub alpha: f64,
    pub beta: u64,
    /// α of θ itself, for reference.
    pub alpha_theta: f64,
    pub power: u32,
    /// Largest admissible radius `(2R₀)⁻¹`.
    pub r0: f64,
    /// Per ω: the constant C of the variance bound.
    pub c_values: Vec<(f64, f64)>,
    pub rows: Vec<LogHolderRow>,
}

/// Bounds `σ_a([ω−r, ω+r]) ≤ (π²C/4)(log_θ(1/(2r)))^{−γ}` with γ = 2c₁α, next
/// to the direct Fejér bound from `G_R`, R = (2r)⁻¹, averaged over
/// `windows` anchors.
pub fn log_holder_certificate(
    flow: &mut SuspensionFlow,
    a: Letter,
    b_range: f64,
    omegas: &[f64],
    r_grid: &[f64],
    windows: usize,
) -> Result<LogHolderCertificate> {
    if !flow.self_similar {
        return Err(Error::WrongClass("the log-Hölder bound needs a self-similar roof".into()));
    }
    if !(b_range > 1.0) {
        return Err(Error::InvalidArgument("B must exceed 1".into()));
    }
    let (zl, consts) = return_word_setup(&flow.zeta, 40)?;
    let theta = AlgebraicInteger::perron_of(&substitution_matrix(&zl))?;
    let pa = prop_alg_constants(&theta)?;
    let alpha_theta = prop_alg_constants(&AlgebraicInteger::perron_of(&substitution_matrix(&flow.zeta))?)?.alpha;
    let power = crate::substitution::find_return_word(&flow.zeta, 64)?.power;
    let th = consts.theta;
    let sc = consts.suspension(&flow.roof);
    let c1 = consts.c1;
    let exponent = c1 * pa.alpha;
    let gamma = 2.0 * exponent;
    let log_r0 = (2.0 * sc.c2).max(1.0);
    let r0_len = th.powf(log_r0);
    let r0 = 0.5 / r0_len;
    let r_min = r_grid.iter().copied().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    let n_max = if r_min.is_finite() { ((0.5 / r_min).ln() / th.ln() - sc.c2).floor().max(0.0) as usize + 1 } else { 1 };
    let mut c_values = Vec::new();
    let mut rows = Vec::new();
    for &omega in omegas {
        if !(omega.abs() >= 1.0 / b_range && omega.abs() <= b_range) {
            return Err(Error::InvalidArgument(format!("|ω| = {} outside [1/B, B]", omega.abs())));
        }
        let engine = RieszEngine::suspension(&zl, flow.roof_balls.clone(), n_max)?;
        let d = return_word_dists(&engine, &consts.return_word, omega, n_max)?;
        let mut p = 1.0;
        let mut c_om: f64 = 0.0;
        for (k, dk) in d.iter().enumerate() {
            p *= 1.0 - c1 * dk * dk;
            c_om = c_om.max(p * ((k + 1) as f64).powf(exponent));
        }
        let k_tot = sc.c_flow * c_om * 2f64.powf(exponent) + sc.boundary * log_r0.powf(exponent) / r0_len;
        let c = k_tot * k_tot;
        c_values.push((omega, c));
        for &r in r_grid {
            let rr = 0.5 / r;
            let lg = rr.ln() / th.ln();
            let bound = if lg > 0.0 { std::f64::consts::PI.powi(2) * c / 4.0 * lg.powf(-gamma) } else { f64::INFINITY };
            let fejer_bound = flow_g_estimate(flow, a, omega, rr, windows)? * std::f64::consts::PI.powi(2) / (4.0 * rr);
            rows.push(LogHolderRow { omega, r, bound, fejer_bound, out_of_regime: r > r0 || r <= 0.0 });
        }
    }
    Ok(LogHolderCertificate { gamma, c1, alpha: pa.alpha, beta: pa.beta, alpha_theta, power, r0, c_values, rows })
}

/// `G_R = R⁻¹·mean|S_R|²` over anchors at the starts of evenly spaced tiles.
pub fn flow_g_estimate(flow: &mut SuspensionFlow, a: Letter, omega: f64, r: f64, windows: usize) -> Result<f64> {
    let windows = windows.max(1);
    let smin = flow.roof.iter().copied().fold(f64::INFINITY, f64::min);
    let stride = (r / smin).ceil() as u64 + 1;
    let mut acc = 0.0;
    for i in 0..windows as u64 {
        let s = twisted_ergodic_integral(flow, Anchor { n: i * stride, u: 0.0 }, 0.0, a, omega, r)?;
        acc += s.value.norm_sqr();
    }
    Ok(acc / (windows as f64 * r))
}

/// Eigen-data of the second eigenvalue θ₂ (real, |θ₂| > 1, simple).
#[derive(Clone, Debug, Serialize)]
pub struct SecondEigen {
    pub theta: f64,
    pub theta2: f64,
    /// Eigenvector of S for θ₂, max |component| = 1, first nonzero entry positive.
    pub e2: Vec<f64>,
    /// Eigenvector of Sᵗ for θ₂ with ⟨e₂, e₂*⟩ = 1.
    pub e2_star: Vec<f64>,
    /// `log_θ|θ₂|`.
    pub alpha: f64,
    /// Whether θ > θ₂ > |θ₃| with θ₂ > 1.
    pub strict_order: bool,
}

pub fn second_eigen(z: &Substitution) -> Result<SecondEigen> {
    let s = substitution_matrix(z);
    let pd = perron_data(&s, 128)?;
    let theta = pd.theta_f64();
    let cp = Poly::charpoly(&s);
    let sf = cp.squarefree_part();
    let roots = certify_roots(&sf, 128)?;
    let mut others: Vec<_> = roots.iter().filter(|r| (r.value_c64() - theta).norm() > 1e-9).collect();
    others.sort_by(|a, b| b.value_c64().norm().partial_cmp(&a.value_c64().norm()).unwrap());
    let Some(r2) = others.first() else {
        return Err(Error::WrongClass("no second eigenvalue".into()));
    };
    let t2 = r2.value_c64();
    if !r2.real || t2.norm() <= 1.0 {
        return Err(Error::WrongClass(format!("second eigenvalue {t2} must be real with modulus > 1")));
    }
    let strict_order = t2.re > 1.0 && others.get(1).map_or(true, |r3| r3.value_c64().norm() < t2.re - 1e-9);
    if others.get(1).is_some_and(|r3| (r3.value_c64().norm() - t2.norm()).abs() < 1e-9) {
        return Err(Error::WrongClass("second eigenvalue is not uniquely determined by modulus".into()));
    }
    if cp.degree() != sf.degree() {
        let rest = cp.div_exact(&sf).expect("squarefree part divides");
        if rest.eval_c64(t2).norm() < 1e-6 {
            return Err(Error::RepeatedEigenvalue);
        }
    }
    let t2b = r2.real_ball();
    let kernel = |a: &IMat| -> Result<Vec<f64>> {
        ball_kernel_vector(a, &t2b)
            .map(|v| v.iter().map(Ball::mid_f64).collect())
            .ok_or_else(|| Error::precision("second eigenvector", 128))
    };
    let mut e2 = kernel(&s)?;
    let mx = e2.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let sign = e2.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
    e2.iter_mut().for_each(|x| *x *= sign / mx);
    let mut es = kernel(&transpose(&s))?;
    let dot: f64 = e2.iter().zip(&es).map(|(a, b)| a * b).sum();
    es.iter_mut().for_each(|x| *x /= dot);
    Ok(SecondEigen {
        theta,
        theta2: t2.re,
        e2,
        e2_star: es,
        alpha: t2.norm().ln() / theta.ln(),
        strict_order,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleEvaluation {
    pub x_id: Anchor,
    pub t: f64,
    pub k_used: usize,
    pub value: f64,
    pub error_bound: f64,
}

/// Evaluates Φ₂⁺ on intervals of the anchored tiling.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub eigen: SecondEigen,
    /// Bound for |Φ₂⁺| on any sub-interval of a level-0 tile.
    pub piece_bound: f64,
}

impl Cocycle {
    pub fn new(flow: &SuspensionFlow) -> Result<Self> {
        if !flow.self_similar {
            return Err(Error::WrongClass("the cocycle needs a self-similar roof".into()));
        }
        let eigen = second_eigen(&flow.zeta)?;
        let m = eigen.e2_star.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let l = flow.zeta.max_image_len() as f64;
        let t2 = eigen.theta2.abs();
        let end = (l - 1.0) * m / (t2 - 1.0);
        Ok(Cocycle { eigen, piece_bound: 2.0 * end + l * m })
    }

    /// Φ₂⁺ of `[a, b]` inside a tile of type `j` at subdivision depth `depth`.
    fn partial(&self, flow: &SuspensionFlow, j: Letter, a: f64, b: f64, depth: usize, k_levels: usize, err: &mut f64) -> f64 {
        let s = flow.roof[j as usize];
        let tol = 1e-13 * s;
        let scale = self.eigen.theta2.powi(-(depth as i32));
        if b - a <= 0.0 {
            return 0.0;
        }
        if a <= tol && b >= s - tol {
            return scale * self.eigen.e2_star[j as usize];
        }
        if depth >= k_levels {
            *err += self.piece_bound * scale.abs();
            return 0.0;
        }
        let th = self.eigen.theta;
        let mut q = 0.0;
        let mut acc = 0.0;
        for &c in flow.zeta.image(j) {
            let w = flow.roof[c as usize] / th;
            let lo = a.max(q);
            let hi = b.min(q + w);
            if hi > lo {
                acc += self.partial(flow, c, th * (lo - q), th * (hi - q), depth + 1, k_levels, err);
            }
            q += w;
        }
        acc
    }

    /// `Φ₂⁺_x([0, t])` for t ≥ 0.
    pub fn evaluate(&self, flow: &mut SuspensionFlow, x: Anchor, t: f64, k_levels: usize) -> Result<CocycleEvaluation> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument("t must be nonnegative".into()));
        }
        let mut err = 0.0;
        if t == 0.0 {
            return Ok(CocycleEvaluation { x_id: x, t, k_used: k_levels, value: 0.0, error_bound: 0.0 });
        }
        let p0 = flow.time_of(x);
        let (x0, b0) = flow.locate(p0)?;
        let (x1, b1) = flow.locate(p0 + t)?;
        let value = if x1.n == x0.n {
            self.partial(flow, b0, x0.u, x0.u + t, 0, k_levels, &mut err)
        } else {
            let mut v = self.partial(flow, b0, x0.u, flow.roof[b0 as usize], 0, k_levels, &mut err);
            let n0 = x0.n + 1;
            if x1.n > n0 {
                v += self.whole_tiles(flow, n0, x1.n - n0, &self.eigen.e2_star, self.eigen.theta2)?;
            }
            v + self.partial(flow, b1, 0.0, x1.u, 0, k_levels, &mut err)
        };
        Ok(CocycleEvaluation { x_id: x, t, k_used: k_levels, value, error_bound: err })
    }

    /// `Σ_{start≤k<start+n} w_{x_k}` through the prefix-suffix decomposition,
    /// where a block ζᵖʲ(b) carries `(λᵖ)ʲ w_b` (w an eigenvector of Sᵗ for λ).
    fn whole_tiles(&self, flow: &mut SuspensionFlow, start: u64, n: u64, w: &[f64], lambda: f64) -> Result<f64> {
        let dec = flow.fp.decompose(start, n)?;
        let lp = lambda.powi(flow.fp.power as i32);
        Ok(dec.pieces().iter().map(|(j, ws)| lp.powi(*j as i32) * ws.iter().map(|&c| w[c as usize]).sum::<f64>()).sum())
    }
}

pub fn cocycle_phi2(flow: &mut SuspensionFlow, x: Anchor, t: f64, k_levels: usize) -> Result<CocycleEvaluation> {
    Cocycle::new(flow)?.evaluate(flow, x, t, k_levels)
}

/// A cylindrical function: on a tile of type j, `f = ψⱼ(τ)` with ψⱼ a
/// polynomial in the local time τ ∈ [0, sⱼ] (coefficients low degree first).
#[derive(Clone, Debug, Serialize)]
pub struct Cylindrical {
    pub profiles: Vec<Vec<f64>>,
}

impl Cylindrical {
    pub fn constant(values: &[f64]) -> Self {
        Cylindrical { profiles: values.iter().map(|&v| vec![v]).collect() }
    }

    /// `∫_a^b ψⱼ`.
    pub fn integral(&self, j: Letter, a: f64, b: f64) -> f64 {
        let prim = |x: f64| {
            self.profiles[j as usize].iter().enumerate().rev().fold(0.0, |acc, (i, c)| acc * x + c / (i + 1) as f64) * x
        };
        prim(b) - prim(a)
    }

    pub fn value(&self, j: Letter, tau: f64) -> f64 {
        self.profiles[j as usize].iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    fn tile_integrals(&self, roof: &[f64]) -> Vec<f64> {
        (0..roof.len()).map(|j| self.integral(j as Letter, 0.0, roof[j])).collect()
    }

    fn sup(&self, roof: &[f64]) -> f64 {
        // coarse sup over a fine grid plus endpoints
        (0..roof.len())
            .flat_map(|j| (0..=64).map(move |i| (j, roof[j] * i as f64 / 64.0)))
            .map(|(j, t)| self.value(j as Letter, t).abs())
            .fold(0.0, f64::max)
    }
}

/// `m_{Φ₂⁻}(f) = Σⱼ(e₂)ⱼ∫₀^{sⱼ}ψⱼ`.
pub fn m_phi2_minus(flow: &SuspensionFlow, f: &Cylindrical) -> Result<f64> {
    let e = second_eigen(&flow.zeta)?;
    Ok(e.e2.iter().zip(f.tile_integrals(&flow.roof)).map(|(a, b)| a * b).sum())
}

/// `∫ f dμ̃` up to the normalization Σ rⱼsⱼ, with r the PF frequencies.
pub fn flow_mean(flow: &SuspensionFlow, f: &Cylindrical) -> Result<f64> {
    let pd = perron_data(&substitution_matrix(&flow.zeta), 128)?;
    let r = pd.frequencies();
    let num: f64 = r.iter().zip(f.tile_integrals(&flow.roof)).map(|(a, b)| a * b).sum();
    let den: f64 = r.iter().zip(&flow.roof).map(|(a, b)| a * b).sum();
    Ok(num / den)
}

fn require_mean_zero(flow: &SuspensionFlow, f: &Cylindrical) -> Result<()> {
    if f.profiles.len() != flow.zeta.m() {
        return Err(Error::InvalidArgument("one profile per letter expected".into()));
    }
    let mean = flow_mean(flow, f)?;
    if mean.abs() > 1e-9 * f.sup(&flow.roof).max(1e-300) {
        return Err(Error::NotMeanZero(mean));
    }
    Ok(())
}

/// `S(f, x, t) = ∫₀ᵗ f(h_τ x) dτ`, exactly for polynomial profiles.
pub fn ergodic_integral_zero(flow: &mut SuspensionFlow, f: &Cylindrical, x: Anchor, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("t must be nonnegative".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let p0 = flow.time_of(x);
    let (x0, b0) = flow.locate(p0)?;
    let (x1, b1) = flow.locate(p0 + t)?;
    if x1.n == x0.n {
        return Ok(f.integral(b0, x0.u, x0.u + t));
    }
    let mut v = f.integral(b0, x0.u, flow.roof[b0 as usize]);
    let n0 = x0.n + 1;
    if x1.n > n0 {
        let dec = flow.fp.decompose(n0, x1.n - n0)?;
        let st = transpose(&substitution_matrix(&flow.fp.zeta));
        let mut lvl = vec![f.tile_integrals(&flow.roof)];
        while lvl.len() <= dec.n {
            let prev = lvl.last().unwrap();
            lvl.push(st.iter().map(|row| row.iter().zip(prev).map(|(&k, p)| k as f64 * p).sum()).collect());
        }
        for (j, w) in dec.pieces() {
            v += w.iter().map(|&c| lvl[j][c as usize]).sum::<f64>();
        }
    }
    Ok(v + f.integral(b1, 0.0, x1.u))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionRow {
    pub t: f64,
    pub s: f64,
    pub main: f64,
    pub remainder: f64,
    /// `log|ℛ(t)|/log t`; `None` when ℛ(t) = 0 or t ≤ 1.
    pub exponent: Option<f64>,
    pub cocycle_error: f64,
}

/// `S(f,x,t) = Φ₂⁺_x(t)·m_{Φ₂⁻}(f) + ℛ(t)` along `t_grid`.
pub fn ergodic_decomposition_check(
    flow: &mut SuspensionFlow,
    f: &Cylindrical,
    x: Anchor,
    t_grid: &[f64],
    k_levels: usize,
) -> Result<Vec<DecompositionRow>> {
    let coc = Cocycle::new(flow)?;
    if !coc.eigen.strict_order {
        return Err(Error::WrongClass("needs θ > θ₂ > |θ₃| with θ₂ > 1".into()));
    }
    require_mean_zero(flow, f)?;
    let m = m_phi2_minus(flow, f)?;
    t_grid
        .iter()
        .map(|&t| {
            let s = ergodic_integral_zero(flow, f, x, t)?;
            let c = coc.evaluate(flow, x, t, k_levels)?;
            let main = c.value * m;
            let remainder = s - main;
            let exponent = (remainder != 0.0 && t > 1.0).then(|| remainder.abs().ln() / t.ln());
            Ok(DecompositionRow { t, s, main, remainder, exponent, cocycle_error: c.error_bound * m.abs() })
        })
        .collect()
}

/// Gaussian test profile `ψ(ω) = A·e^{−π(ω/c)²}`, `ψ̂(t) = A·c·e^{−π(ct)²}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianProfile {
    pub fn hat(&self, t: f64) -> f64 {
        self.amplitude * self.width * (-std::f64::consts::PI * (self.width * t).powi(2)).exp()
    }
    /// Half-width (in units of T) beyond which ψ̂ is below 10⁻¹² of its peak.
    pub fn cutoff(&self) -> f64 {
        (12.0 * std::f64::consts::LN_10 / std::f64::consts::PI).sqrt() / self.width
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroScalingRow {
    pub n: u32,
    pub t_scale: f64,
    /// `T⁻²·mean|∫f(h_t x)ψ̂(t/T)dt|²`.
    pub value: f64,
    /// `value / T^{2α−2}`.
    pub ratio: f64,
    pub truncation_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroScaling {
    pub alpha: f64,
    pub m_phi2_minus: f64,
    pub rows: Vec<ZeroScalingRow>,
    /// (max − min)/mean of the ratios.
    pub relative_spread: f64,
}

/// Default base times: anchors for scale T sit at times `T·cᵢ`.
pub fn default_anchor_times(profile: &GaussianProfile, count: usize) -> Vec<f64> {
    let c0 = profile.cutoff() + 1.0;
    (0..count).map(|i| c0 + 0.5 * i as f64 + 0.25).collect()
}

/// Ratios `∫|ψ(θᴺω)|²dσ_f / θ^{N(2α−2)}` computed from the right side of
/// the spectral isometry by averaging over anchors at times `θᴺ·cᵢ`.
pub fn zero_scaling_experiment(
    flow: &mut SuspensionFlow,
    f: &Cylindrical,
    psi: GaussianProfile,
    n_range: std::ops::RangeInclusive<u32>,
    base_times: &[f64],
) -> Result<ZeroScaling> {
    let eig = second_eigen(&flow.zeta)?;
    if !eig.strict_order || !flow.self_similar {
        return Err(Error::WrongClass("needs a self-similar flow with θ > θ₂ > |θ₃|, θ₂ > 1".into()));
    }
    require_mean_zero(flow, f)?;
    let m = m_phi2_minus(flow, f)?;
    if m.abs() < 1e-12 {
        return Err(Error::DegenerateF("m_{Φ₂⁻}(f) = 0".into()));
    }
    let cut = psi.cutoff();
    if base_times.iter().any(|&c| c <= cut) {
        return Err(Error::InvalidArgument("anchor times must exceed the profile cutoff".into()));
    }
    let theta = eig.theta;
    let smin = flow.roof.iter().copied().fold(f64::INFINITY, f64::min);
    let cmax = base_times.iter().copied().fold(0.0, f64::max);
    let tmax = theta.powi(*n_range.end() as i32);
    let total = (((cmax + cut) * tmax) / smin).ceil() as usize + 2;
    let letters = flow.fp.prefix(total);
    let mut starts = Vec::with_capacity(total + 1);
    let mut acc = 0.0;
    starts.push(0.0);
    for &c in &letters {
        acc += flow.roof[c as usize];
        starts.push(acc);
    }
    let fmax = f.sup(&flow.roof);
    // two-point Gauss–Legendre per tile
    let g = 0.5 / 3f64.sqrt();
    let mut rows = Vec::new();
    for n in n_range {
        let t_scale = theta.powi(n as i32);
        let js: Vec<f64> = base_times
            .par_iter()
            .map(|&c| {
                let p = c * t_scale;
                let lo = p - cut * t_scale;
                let hi = p + cut * t_scale;
                let k0 = starts.partition_point(|&s| s <= lo).saturating_sub(1);
                let mut j = 0.0;
                let mut k = k0;
                while k < letters.len() && starts[k] < hi {
                    let b = letters[k];
                    let (s0, s1) = (starts[k].max(lo), starts[k + 1].min(hi));
                    if s1 > s0 {
                        let w = s1 - s0;
                        let mid = 0.5 * (s0 + s1);
                        for tau in [mid - g * w, mid + g * w] {
                            j += 0.5 * w * f.value(b, tau - starts[k]) * psi.hat((tau - p) / t_scale);
                        }
                    }
                    k += 1;
                }
                j
            })
            .collect();
        let mean_sq = js.iter().map(|j| j * j).sum::<f64>() / js.len() as f64;
        let value = mean_sq / (t_scale * t_scale);
        let ratio = value / t_scale.powf(2.0 * eig.alpha - 2.0);
        let y0 = cut * psi.width;
        let tail = 2.0 * fmax * t_scale * psi.amplitude * (-std::f64::consts::PI * y0 * y0).exp() / (2.0 * std::f64::consts::PI * y0);
        rows.push(ZeroScalingRow { n, t_scale, value, ratio, truncation_error: tail / t_scale });
    }
    let rs: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let mean = rs.iter().sum::<f64>() / rs.len().max(1) as f64;
    let spread = (rs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - rs.iter().copied().fold(f64::INFINITY, f64::min)) / mean;
    Ok(ZeroScaling { alpha: eig.alpha, m_phi2_minus: m, rows, relative_spread: spread })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowEkFrequency {
    pub count: usize,
    pub n: usize,
    /// `|ζᵏ(v)|_s`, k = 1..=n.
    pub lengths: Vec<f64>,
    pub dists: Vec<f64>,
}

/// `#{k ∈ [1, N] : ‖ω|ζᵏ(v)|_s‖ ≥ ρ}` from certified tiling lengths.
pub fn flow_ek_frequency(flow: &SuspensionFlow, v: &[Letter], omega: f64, n: usize, rho: f64) -> Result<FlowEkFrequency> {
    let engine = RieszEngine::suspension(&flow.zeta, flow.roof_balls.clone(), n)?;
    let d = return_word_dists(&engine, v, omega, n + 1)?;
    let pop = abelianization(v, flow.zeta.m());
    let lengths: Vec<f64> = (1..=n)
        .map(|k| engine.level_lengths(k).iter().zip(&pop).map(|(l, &c)| l.mid_f64() * c as f64).sum())
        .collect();
    let dists = d[1..].to_vec();
    Ok(FlowEkFrequency { count: dists.iter().filter(|&&x| x >= rho).count(), n, lengths, dists })
}

/// Classification of the PF root of the flow's substitution matrix.
pub fn flow_class(flow: &SuspensionFlow) -> Result<ClassKind> {
    Ok(classify(&AlgebraicInteger::perron_of(&substitution_matrix(&flow.zeta))?)?.kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eigen_sub() -> Substitution {
        Substitution::parse(2, &["1112", "1222"]).unwrap()
    }

    #[test]
    fn roofs() {
        let r = self_similar_roof(&eigen_sub(), 128).unwrap();
        assert!((r[0].mid_f64() - 0.5).abs() < 1e-15 && (r[1].mid_f64() - 0.5).abs() < 1e-15);
        let p = self_similar_roof(&Substitution::parse(2, &["1222", "1"]).unwrap(), 128).unwrap();
        let th = (1.0 + 13f64.sqrt()) / 2.0;
        assert!((p[0].mid_f64() - th / (th + 1.0)).abs() < 1e-14);
        let one = self_similar_roof(&Substitution::parse(1, &["11"]).unwrap(), 128).unwrap();
        assert!((one[0].mid_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn locate_inverts_tile() {
        let mut fl = SuspensionFlow::self_similar(&Substitution::parse(2, &["1222", "1"]).unwrap(), 192).unwrap();
        for n in [0u64, 1, 5, 77, 1234, 99_999] {
            let (b, st) = fl.tile(n);
            let (x, c) = fl.locate(st.mid_f64() + 0.25 * fl.roof[b as usize]).unwrap();
            assert_eq!((x.n, c), (n, b));
        }
    }

    #[test]
    fn cocycle_single_tile_and_zero() {
        let mut fl = SuspensionFlow::self_similar(&eigen_sub(), 192).unwrap();
        let coc = Cocycle::new(&fl).unwrap();
        assert_eq!(coc.evaluate(&mut fl, Anchor { n: 3, u: 0.1 }, 0.0, 10).unwrap().value, 0.0);
        let (b, _) = fl.tile(3);
        let v = coc.evaluate(&mut fl, Anchor { n: 3, u: 0.0 }, 0.5, 0).unwrap();
        assert_eq!(v.value, coc.eigen.e2_star[b as usize]);
        assert_eq!(v.error_bound, 0.0);
    }

    #[test]
    fn m_phi2_examples() {
        let fl = SuspensionFlow::self_similar(&eigen_sub(), 192).unwrap();
        let f = Cylindrical::constant(&[1.0, -1.0]);
        assert!((m_phi2_minus(&fl, &f).unwrap() - 1.0).abs() < 1e-12);
        assert!(m_phi2_minus(&fl, &Cylindrical::constant(&[1.0, 1.0])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn segment_limit() {
        assert_eq!(segment_integral(0.0, 0.7), Complex64::new(0.7, 0.0));
        let v = segment_integral(0.3, 1.1);
        let k = 2.0 * std::f64::consts::PI * 0.3;
        let want = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -k * 1.1)) / Complex64::new(0.0, k);
        assert!((v - want).norm() < 1e-15);
    }
}
