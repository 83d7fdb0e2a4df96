//! Matrix Riesz products: transfer matrices `M_k(ω)`, products
//! `Π_n(ω) = M_{n−1}(ω)···M_0(ω)` and the twisted sums `Φ_a` they encode.
//!
//! Row `b`, column `a` of `Π_n(ω)` is `Φ_a(ζⁿ(b), ω)`. Phases are reduced
//! mod 1 on exact dyadic balls before conversion to double-double, so
//! lengths far beyond 2⁵³ are handled correctly.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::num::{ball_to_dd, Ball, Cdd, Dd};
use crate::substitution::{
    abelianization, lengths_at, substitution_matrix, transpose, IMat, Letter, PerronData, Substitution,
};

pub type CMat = Vec<Vec<Cdd>>;

/// Default working precision (bits after the binary point) for phases.
pub const PHASE_PREC: u32 = 192;

/// Largest admissible phase radius, in turns.
const PHASE_TOL: f64 = 1.0 / (1u64 << 60) as f64;

pub fn cmat_identity(m: usize) -> CMat {
    (0..m).map(|i| (0..m).map(|j| if i == j { Cdd::ONE } else { Cdd::ZERO }).collect()).collect()
}

pub fn cmat_mul(a: &CMat, b: &CMat) -> CMat {
    let m = a.len();
    let k = b.len();
    let n = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Cdd::ZERO; n]; m];
    for i in 0..m {
        for l in 0..k {
            let x = a[i][l];
            if x.re.hi == 0.0 && x.im.hi == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] = out[i][j] + x * b[l][j];
            }
        }
    }
    out
}

/// Operator ∞-norm (maximal row sum of moduli).
pub fn cmat_norm_inf(a: &CMat) -> f64 {
    a.iter().map(|row| row.iter().map(|z| z.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn cmat_to_c64(a: &CMat) -> Vec<Vec<Complex64>> {
    a.iter().map(|row| row.iter().map(|z| z.to_c64()).collect()).collect()
}

/// Fractional bits needed to hold `x` exactly.
pub fn exact_bits(x: f64) -> u32 {
    let (_, e) = crate::num::ball::decompose_f64(x);
    (-e).max(0) as u32
}

/// `ω·len mod 1` in turns, certified to within 2⁻⁶⁰.
pub fn phase_turns(omega: &Ball, len: &Ball) -> Result<Dd> {
    let x = omega.mul(len);
    if x.rad_f64() > PHASE_TOL {
        return Err(Error::PrecisionExhausted { what: "phase ω·length".into(), cap: x.prec() });
    }
    let one = BigInt::from(1) << x.prec();
    let frac = x.mid_raw().mod_floor(&one);
    Ok(ball_to_dd(&Ball::from_parts(frac, BigInt::zero(), x.prec())))
}

/// `Σ_j δ(v_j, a) e^{−2πiωj}` by direct summation.
pub fn phi_direct(v: &[Letter], a: Letter, omega: f64) -> Complex64 {
    let w = Dd::from_f64(omega);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &c) in v.iter().enumerate() {
        if c == a {
            acc += cis_neg(w.mul_f64(j as f64));
        }
    }
    acc
}

/// `e^{−2πix}` for a double-double phase; the reduction mod 1 is exact.
fn cis_neg(x: Dd) -> Complex64 {
    let k = x.hi.floor();
    let r = (x - Dd::from_f64(k)).to_f64();
    let (s, c) = (2.0 * std::f64::consts::PI * r).sin_cos();
    Complex64::new(c, -s)
}

/// `Σ_j δ(v_j, a) e^{−2πiω|v_0…v_j|_s}` by direct summation.
pub fn phi_direct_suspension(v: &[Letter], a: Letter, s: &[f64], omega: f64) -> Complex64 {
    let w = Dd::from_f64(omega);
    let mut len = Dd::ZERO;
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in v {
        len = len + Dd::from_f64(s[c as usize]);
        if c == a {
            acc += cis_neg(w * len);
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub n: usize,
    pub omega: f64,
    pub entries: CMat,
    pub roof: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct TwistedProduct {
    /// Number of factors.
    pub n: usize,
    /// Level of the first factor.
    pub start: usize,
    pub omega: f64,
    pub matrix: CMat,
    /// ‖M_k(ω)‖∞ for each factor, in order of application.
    pub per_step_norms: Vec<f64>,
    /// ‖M_{k}···M_{start}‖∞ after each step.
    pub partial_norms: Vec<f64>,
}

impl TwistedProduct {
    pub fn entry(&self, b: Letter, a: Letter) -> Complex64 {
        self.matrix[b as usize][a as usize].to_c64()
    }
    pub fn norm_inf(&self) -> f64 {
        cmat_norm_inf(&self.matrix)
    }
}

/// Precomputed lengths and prefix offsets for one substitution, discrete
/// or suspended under a roof. Evaluations at different ω share it.
#[derive(Clone, Debug)]
pub struct RieszEngine {
    z: Substitution,
    st: IMat,
    roof: Option<Vec<Ball>>,
    prec: u32,
    /// `lens[k][c]` = |ζᵏ(c)| (or its tiling length).
    lens: Vec<Vec<Ball>>,
    /// Population vector of ζ(b)[..j].
    prefixes: Vec<Vec<Vec<i64>>>,
}

impl RieszEngine {
    /// Discrete system, levels `0..=max_level`.
    pub fn discrete(z: &Substitution, max_level: usize) -> Self {
        Self::build(z, None, max_level, PHASE_PREC)
    }

    /// Suspension with roof vector `s`; the roof may be an enclosure.
    pub fn suspension(z: &Substitution, roof: Vec<Ball>, max_level: usize) -> Result<Self> {
        if roof.len() != z.m() {
            return Err(Error::InvalidArgument("roof dimension must equal alphabet size".into()));
        }
        if !roof.iter().all(Ball::is_positive) {
            return Err(Error::InvalidArgument("roof must be strictly positive".into()));
        }
        let prec = roof.iter().map(Ball::prec).max().unwrap_or(0).max(PHASE_PREC);
        Ok(Self::build(z, Some(roof), max_level, prec))
    }

    /// Suspension with an exactly representable roof.
    pub fn suspension_f64(z: &Substitution, roof: &[f64], max_level: usize) -> Result<Self> {
        let p = roof.iter().map(|&x| exact_bits(x)).max().unwrap_or(0).max(PHASE_PREC);
        let r = roof.iter().map(|&x| Ball::from_f64(x, p)).collect();
        Self::suspension(z, r, max_level)
    }

    fn build(z: &Substitution, roof: Option<Vec<Ball>>, max_level: usize, prec: u32) -> Self {
        let m = z.m();
        let st = transpose(&substitution_matrix(z));
        let mut lens = Vec::with_capacity(max_level + 1);
        match &roof {
            None => {
                let mut cur: Vec<BigInt> = lengths_at(z, 0);
                for _ in 0..=max_level {
                    lens.push(cur.iter().map(|x| Ball::from_int(x, prec)).collect::<Vec<_>>());
                    cur = (0..m)
                        .map(|c| (0..m).map(|d| &cur[d] * st[c][d]).sum())
                        .collect();
                }
            }
            Some(s) => {
                let mut cur: Vec<Ball> = s.iter().map(|b| b.set_prec(prec)).collect();
                for _ in 0..=max_level {
                    lens.push(cur.clone());
                    cur = (0..m)
                        .map(|c| {
                            (0..m).fold(Ball::zero(prec), |acc, d| acc.add(&cur[d].mul_i64(st[c][d])))
                        })
                        .collect();
                }
            }
        }
        let prefixes = (0..m)
            .map(|b| {
                let img = z.image(b as Letter);
                (0..img.len()).map(|j| abelianization(&img[..j], m)).collect()
            })
            .collect();
        RieszEngine { z: z.clone(), st, roof, prec, lens, prefixes }
    }

    pub fn substitution(&self) -> &Substitution {
        &self.z
    }
    pub fn max_level(&self) -> usize {
        self.lens.len() - 1
    }
    pub fn is_suspension(&self) -> bool {
        self.roof.is_some()
    }
    pub fn level_lengths(&self, k: usize) -> &[Ball] {
        &self.lens[k]
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k > self.max_level() {
            return Err(Error::InvalidArgument(format!(
                "level {k} exceeds precomputed maximum {}",
                self.max_level()
            )));
        }
        Ok(())
    }

    fn omega_ball(&self, omega: f64) -> Ball {
        Ball::from_f64(omega, self.prec.max(exact_bits(omega)))
    }

    /// |ζᵏ(ζ(b)[..j])|, discrete or tiling length.
    pub fn offset(&self, k: usize, b: usize, j: usize) -> Ball {
        let pc = &self.prefixes[b][j];
        let mut acc = Ball::zero(self.prec);
        for (c, &cnt) in pc.iter().enumerate() {
            if cnt != 0 {
                acc = acc.add(&self.lens[k][c].mul_i64(cnt));
            }
        }
        acc
    }

    pub fn transfer(&self, k: usize, omega: f64) -> Result<TransferMatrix> {
        self.check_level(k)?;
        let w = self.omega_ball(omega);
        Ok(TransferMatrix {
            n: k,
            omega,
            entries: self.transfer_entries(k, &w)?,
            roof: self.roof.as_ref().map(|r| r.iter().map(Ball::mid_f64).collect()),
        })
    }

    fn transfer_entries(&self, k: usize, w: &Ball) -> Result<CMat> {
        let m = self.z.m();
        let mut out = vec![vec![Cdd::ZERO; m]; m];
        for b in 0..m {
            for (j, &c) in self.z.image(b as Letter).iter().enumerate() {
                let ph = phase_turns(w, &self.offset(k, b, j))?;
                out[b][c as usize] = out[b][c as usize] + Cdd::expi_neg_turns(ph);
            }
        }
        Ok(out)
    }

    /// `M_{start+n−1}(ω)···M_start(ω)`.
    pub fn shifted(&self, start: usize, n: usize, omega: f64) -> Result<TwistedProduct> {
        if n > 0 {
            self.check_level(start + n - 1)?;
        }
        let w = self.omega_ball(omega);
        let mut acc = cmat_identity(self.z.m());
        let mut per_step_norms = Vec::with_capacity(n);
        let mut partial_norms = Vec::with_capacity(n);
        for k in start..start + n {
            let mk = self.transfer_entries(k, &w)?;
            per_step_norms.push(cmat_norm_inf(&mk));
            acc = cmat_mul(&mk, &acc);
            partial_norms.push(cmat_norm_inf(&acc));
        }
        Ok(TwistedProduct { n, start, omega, matrix: acc, per_step_norms, partial_norms })
    }

    pub fn product(&self, n: usize, omega: f64) -> Result<TwistedProduct> {
        self.shifted(0, n, omega)
    }

    /// `Φ_a(ζⁿ(b), ω)` (discrete engine) or the raw product entry with
    /// exclusive tiling-length phases (suspension engine).
    pub fn phi(&self, a: Letter, b: Letter, n: usize, omega: f64) -> Result<Complex64> {
        Ok(self.product(n, omega)?.entry(b, a))
    }

    /// `Φ^s_a(ζⁿ(b), ω) = Σ_j δ e^{−2πiω|v_0…v_j|_s}`. The product carries
    /// phases at the exclusive length |v_0…v_{j−1}|_s; the last tile adds
    /// the factor `e^{−2πiωs_a}`.
    pub fn phi_suspension(&self, a: Letter, b: Letter, n: usize, omega: f64) -> Result<Complex64> {
        let roof = self
            .roof
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("engine has no roof".into()))?;
        let raw = self.phi(a, b, n, omega)?;
        let ph = phase_turns(&self.omega_ball(omega), &roof[a as usize].set_prec(self.prec))?;
        Ok(raw * Cdd::expi_neg_turns(ph).to_c64())
    }

    /// Transposed substitution matrix, the value of every `M_k(0)`.
    pub fn st(&self) -> &IMat {
        &self.st
    }
}

pub fn transfer_matrix(z: &Substitution, n: usize, omega: f64, roof: Option<&[f64]>) -> Result<TransferMatrix> {
    let e = match roof {
        None => RieszEngine::discrete(z, n),
        Some(s) => RieszEngine::suspension_f64(z, s, n)?,
    };
    e.transfer(n, omega)
}

pub fn riesz_product(z: &Substitution, n: usize, omega: f64) -> Result<TwistedProduct> {
    RieszEngine::discrete(z, n).product(n, omega)
}

pub fn shifted_product(z: &Substitution, k: usize, n: usize, omega: f64) -> Result<TwistedProduct> {
    RieszEngine::discrete(z, k + n).shifted(k, n, omega)
}

pub fn phi_recursive(z: &Substitution, a: Letter, b: Letter, n: usize, omega: f64) -> Result<Complex64> {
    RieszEngine::discrete(z, n).phi(a, b, n, omega)
}

pub fn phi_suspension(z: &Substitution, s: &[f64], a: Letter, b: Letter, n: usize, omega: f64) -> Result<Complex64> {
    RieszEngine::suspension_f64(z, s, n)?.phi_suspension(a, b, n, omega)
}

/// `θ⁻ⁿ conj(Π_n* Π_n)(ω) / (⟨r,1⟩⟨1,ℓ⟩)`, a Gram matrix.
pub fn riesz_density(engine: &RieszEngine, pd: &PerronData, n: usize, omega: f64) -> Result<Vec<Vec<Complex64>>> {
    let p = engine.product(n, omega)?;
    let m = engine.substitution().m();
    let r = pd.r_f64();
    let l = pd.l_f64();
    let norm = r.iter().sum::<f64>() * l.iter().sum::<f64>();
    let scale = pd.theta_f64().powi(-(n as i32)) / norm;
    let pi = cmat_to_c64(&p.matrix);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for a in 0..m {
        for b in 0..m {
            let s: Complex64 = (0..m).map(|j| pi[j][a] * pi[j][b].conj()).sum();
            out[a][b] = s * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::iterate_word;

    fn example() -> Substitution {
        Substitution::parse(2, &["1222", "1"]).unwrap()
    }

    #[test]
    fn zero_frequency_gives_transpose() {
        let z = example();
        let e = RieszEngine::discrete(&z, 50);
        for k in [0, 7, 50] {
            let t = e.transfer(k, 0.0).unwrap();
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(t.entries[b][c].to_c64(), Complex64::new(e.st()[b][c] as f64, 0.0));
                }
            }
        }
    }

    #[test]
    fn transfer_entry_matches_closed_form() {
        let z = example();
        let n = 4;
        let w = 0.2371;
        let t = transfer_matrix(&z, n, w, None).unwrap();
        let l = lengths_at(&z, n as u32);
        let (l1, l2) = (l[0].to_string().parse::<f64>().unwrap(), l[1].to_string().parse::<f64>().unwrap());
        let e = |x: f64| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * w * x);
        let want = e(l1) + e(l1 + l2) + e(l1 + 2.0 * l2);
        assert!((t.entries[0][1].to_c64() - want).norm() < 1e-12);
        assert_eq!(t.entries[0][0].to_c64(), Complex64::new(1.0, 0.0));
        assert_eq!(t.entries[1][0].to_c64(), Complex64::new(1.0, 0.0));
        assert_eq!(t.entries[1][1].to_c64(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn product_columns_are_twisted_sums() {
        let z = example();
        let e = RieszEngine::discrete(&z, 8);
        for n in 0..=8 {
            let p = e.product(n, 0.3).unwrap();
            for b in 0..2u8 {
                let w = iterate_word(&z, b, n as u32, 1 << 20).unwrap();
                for a in 0..2u8 {
                    let d = phi_direct(&w, a, 0.3);
                    assert!((p.entry(b, a) - d).norm() < 1e-9, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn direct_sum_examples() {
        let v = vec![0u8, 0];
        let w = 0.17;
        let want = Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * w);
        assert!((phi_direct(&v, 0, w) - want).norm() < 1e-15);
        assert!((phi_direct(&[0, 1], 1, 0.5) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unit_roof_shifts_phase_by_one() {
        let z = example();
        let w = 0.4137;
        let s = [1.0, 1.0];
        for n in 0..6 {
            for a in 0..2u8 {
                let ps = phi_suspension(&z, &s, a, 0, n, w).unwrap();
                let pd = phi_recursive(&z, a, 0, n, w).unwrap();
                let f = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * w);
                assert!((ps - f * pd).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn huge_lengths_keep_exact_phases() {
        // ω = 1/2 and lengths beyond 2^53: phases are exactly 0 or 1/2
        let z = Substitution::parse(2, &["12", "1"]).unwrap();
        let e = RieszEngine::discrete(&z, 120);
        let t = e.transfer(120, 0.5).unwrap();
        for row in &t.entries {
            for x in row {
                let c = x.to_c64();
                assert!((c.re - c.re.round()).abs() < 1e-15 && c.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn density_is_hermitian() {
        let z = example();
        let pd = crate::substitution::perron_data(&substitution_matrix(&z), 128).unwrap();
        let e = RieszEngine::discrete(&z, 6);
        let d = riesz_density(&e, &pd, 6, 0.123).unwrap();
        assert!((d[0][1] - d[1][0].conj()).norm() < 1e-12);
        assert!(d[0][0].re >= 0.0 && d[1][1].re >= 0.0);
        assert!(d[0][0].re * d[1][1].re >= d[0][1].norm_sqr() - 1e-9);
    }
}
