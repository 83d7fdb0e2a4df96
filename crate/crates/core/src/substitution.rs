//! Substitutions on `{1..m}`: words, matrices, Perron–Frobenius data,
//! return words, and prefix-suffix decompositions of fixed-point windows.
//!
//! Letters are stored zero-based (`0..m`) and printed one-based.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Ball;
use crate::poly::{certify_roots, Poly};

pub type Letter = u8;
pub type Word = Vec<Letter>;
pub type IMat = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    m: usize,
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(m: usize, images: Vec<Word>) -> Result<Self> {
        if m == 0 || m > 255 {
            return Err(Error::InvalidSubstitution(format!("alphabet size {m} outside 1..=255")));
        }
        if images.len() != m {
            return Err(Error::InvalidSubstitution(format!("{} images for {} letters", images.len(), m)));
        }
        for (b, w) in images.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::InvalidSubstitution(format!("image of letter {} is empty", b + 1)));
            }
            if let Some(&bad) = w.iter().find(|&&c| c as usize >= m) {
                return Err(Error::InvalidSubstitution(format!("letter {} not in 1..{}", bad as usize + 1, m)));
            }
        }
        Ok(Substitution { m, images })
    }

    /// Parses images written with one-based letters: digits when `m <= 9`,
    /// comma-separated integers otherwise.
    pub fn parse(m: usize, images: &[&str]) -> Result<Self> {
        let words = images.iter().map(|s| parse_word(s, m)).collect::<Result<Vec<_>>>()?;
        Substitution::new(m, words)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn image(&self, b: Letter) -> &[Letter] {
        &self.images[b as usize]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn apply(&self, w: &[Letter]) -> Word {
        w.iter().flat_map(|&c| self.images[c as usize].iter().copied()).collect()
    }

    /// The substitution ζ^k.
    pub fn power(&self, k: u32) -> Result<Substitution> {
        let mut imgs: Vec<Word> = (0..self.m as u8).map(|b| vec![b]).collect();
        for _ in 0..k {
            imgs = imgs.iter().map(|w| self.apply(w)).collect();
            if imgs.iter().any(|w| w.len() > 50_000_000) {
                return Err(Error::BudgetExceeded { predicted: "power image".into(), budget: 50_000_000 });
            }
        }
        Substitution::new(self.m, imgs)
    }

    pub fn display_word(&self, w: &[Letter]) -> String {
        format_word(w, self.m)
    }
}

pub fn parse_word(s: &str, m: usize) -> Result<Word> {
    let s = s.trim();
    let letters: Vec<usize> = if m <= 9 && !s.contains(',') {
        s.chars()
            .map(|ch| ch.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::InvalidSubstitution(format!("bad letter '{ch}'"))))
            .collect::<Result<_>>()?
    } else {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidSubstitution(format!("bad letter '{t}'"))))
            .collect::<Result<_>>()?
    };
    letters
        .into_iter()
        .map(|d| {
            if d == 0 || d > m {
                Err(Error::InvalidSubstitution(format!("letter {d} not in 1..{m}")))
            } else {
                Ok((d - 1) as Letter)
            }
        })
        .collect()
}

pub fn format_word(w: &[Letter], m: usize) -> String {
    if m <= 9 {
        w.iter().map(|&c| char::from(b'1' + c)).collect()
    } else {
        w.iter().map(|&c| (c as usize + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

/// S(i, j) = number of letters i in ζ(j).
pub fn substitution_matrix(z: &Substitution) -> IMat {
    let m = z.m;
    let mut s = vec![vec![0i64; m]; m];
    for (j, w) in z.images.iter().enumerate() {
        for &c in w {
            s[c as usize][j] += 1;
        }
    }
    s
}

pub fn transpose(a: &IMat) -> IMat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

pub fn mat_mul_i64(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                c[i][j] = c[i][j].saturating_add(a[i][k].saturating_mul(b[k][j]));
            }
        }
    }
    c
}

/// Big-integer matrix power.
pub fn mat_pow_big(a: &IMat, k: u32) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let ab: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut acc: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    for _ in 0..k {
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for kk in 0..n {
                if ab[i][kk].is_zero() {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += &ab[i][kk] * &acc[kk][j];
                }
            }
        }
        acc = next;
    }
    acc
}

/// Smallest `n <= (m-1)m + 1` with `S^n > 0`, or `None` if there is none.
pub fn is_primitive(s: &IMat) -> Option<u32> {
    let m = s.len();
    let bound = ((m - 1) * m + 1) as u32;
    let pattern: IMat = s.iter().map(|r| r.iter().map(|&x| (x > 0) as i64).collect()).collect();
    let mut p = pattern.clone();
    for n in 1..=bound {
        if p.iter().all(|r| r.iter().all(|&x| x > 0)) {
            return Some(n);
        }
        p = mat_mul_i64(&p, &pattern);
        for r in p.iter_mut() {
            for x in r.iter_mut() {
                *x = (*x > 0) as i64;
            }
        }
    }
    None
}

/// |ζ^n(b)| for each b, via (S^t)^n applied to the all-ones vector.
pub fn lengths_at(z: &Substitution, n: u32) -> Vec<BigInt> {
    let st = transpose(&substitution_matrix(z));
    let mut x: Vec<BigInt> = vec![BigInt::one(); z.m];
    for _ in 0..n {
        x = st.iter().map(|row| row.iter().zip(&x).map(|(&a, v)| v * a).sum()).collect();
    }
    x
}

/// Table `t[k][b] = |ζ^k(b)|` for `k <= n`, saturating at `u128::MAX`.
pub fn length_table(z: &Substitution, n: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![1u128; z.m]];
    for k in 0..n {
        let row: Vec<u128> = z
            .images
            .iter()
            .map(|w| w.iter().fold(0u128, |acc, &c| acc.saturating_add(t[k][c as usize])))
            .collect();
        t.push(row);
    }
    t
}

pub fn iterate_word(z: &Substitution, a: Letter, n: u32, max_len: u64) -> Result<Word> {
    let len = &lengths_at(z, n)[a as usize];
    if len > &BigInt::from(max_len) {
        return Err(Error::BudgetExceeded { predicted: len.to_string(), budget: max_len });
    }
    let mut w = vec![a];
    for _ in 0..n {
        w = z.apply(&w);
    }
    Ok(w)
}

pub fn abelianization(v: &[Letter], m: usize) -> Vec<i64> {
    let mut c = vec![0i64; m];
    for &x in v {
        c[x as usize] += 1;
    }
    c
}

pub fn tiling_length(v: &[Letter], s: &[f64]) -> f64 {
    abelianization(v, s.len()).iter().zip(s).map(|(&k, &x)| k as f64 * x).sum()
}

/// Perron–Frobenius data with certified enclosures.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub s: IMat,
    pub theta: Ball,
    /// Right eigenvector of S, normalized to sum 1.
    pub r_vec: Vec<Ball>,
    /// Right eigenvector of S^t, scaled so that <r, l> = 1.
    pub l_vec: Vec<Ball>,
    pub normalized: bool,
    pub charpoly: Poly,
}

impl PerronData {
    pub fn theta_f64(&self) -> f64 {
        self.theta.mid_f64()
    }
    pub fn r_f64(&self) -> Vec<f64> {
        self.r_vec.iter().map(Ball::mid_f64).collect()
    }
    pub fn l_f64(&self) -> Vec<f64> {
        self.l_vec.iter().map(Ball::mid_f64).collect()
    }
    /// Letter frequencies μ[a] = r_a / Σ r.
    pub fn frequencies(&self) -> Vec<f64> {
        self.r_f64()
    }
}

/// Solves `(θI − A) x = 0` with the last coordinate fixed to 1.
pub fn ball_kernel_vector(a: &IMat, theta: &Ball) -> Option<Vec<Ball>> {
    let m = a.len();
    let p = theta.prec();
    if m == 1 {
        return Some(vec![Ball::from_i64(1, p)]);
    }
    let k = m - 1;
    // rows 0..k, columns 0..k, rhs = a[i][k]
    let mut mat: Vec<Vec<Ball>> = (0..k)
        .map(|i| {
            let mut row: Vec<Ball> = (0..k)
                .map(|j| {
                    let v = Ball::from_i64(-a[i][j], p);
                    if i == j {
                        v.add(theta)
                    } else {
                        v
                    }
                })
                .collect();
            row.push(Ball::from_i64(a[i][k], p));
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| mat[x][col].mid_raw().magnitude().cmp(mat[y][col].mid_raw().magnitude()))?;
        if mat[piv][col].contains_zero() {
            return None;
        }
        mat.swap(col, piv);
        for row in (col + 1)..k {
            let f = mat[row][col].div(&mat[col][col])?;
            for j in col..=k {
                let t = f.mul(&mat[col][j]);
                mat[row][j] = mat[row][j].sub(&t);
            }
        }
    }
    let mut x = vec![Ball::zero(p); k];
    for i in (0..k).rev() {
        let mut acc = mat[i][k].clone();
        for j in (i + 1)..k {
            acc = acc.sub(&mat[i][j].mul(&x[j]));
        }
        x[i] = acc.div(&mat[i][i])?;
    }
    x.push(Ball::from_i64(1, p));
    Some(x)
}

pub fn perron_data(s: &IMat, precision_bits: u32) -> Result<PerronData> {
    if is_primitive(s).is_none() {
        return Err(Error::NotPrimitive);
    }
    let cp = Poly::charpoly(s);
    let sf = cp.squarefree_part();
    let mut prec = precision_bits.max(64) + 64;
    loop {
        let roots = certify_roots(&sf, prec)?;
        let top = roots
            .iter()
            .filter(|r| r.real)
            .max_by(|a, b| a.re().partial_cmp(&b.re()).unwrap())
            .ok_or(Error::NotPrimitive)?;
        let work = prec + 64;
        let theta = top.real_ball().set_prec(work);
        let st = transpose(s);
        let (Some(r), Some(l)) = (ball_kernel_vector(s, &theta), ball_kernel_vector(&st, &theta)) else {
            prec *= 2;
            if prec > crate::poly::ROOT_PREC_CAP {
                return Err(Error::precision("Perron eigenvectors", crate::poly::ROOT_PREC_CAP));
            }
            continue;
        };
        let sum_r = r.iter().fold(Ball::zero(work), |acc, x| acc.add(x));
        let r: Vec<Ball> = r.iter().map(|x| x.div(&sum_r)).collect::<Option<_>>().ok_or(Error::NotPrimitive)?;
        let dot = r.iter().zip(&l).fold(Ball::zero(work), |acc, (a, b)| acc.add(&a.mul(b)));
        let l: Vec<Ball> = l.iter().map(|x| x.div(&dot)).collect::<Option<_>>().ok_or(Error::NotPrimitive)?;
        return Ok(PerronData { s: s.clone(), theta, r_vec: r, l_vec: l, normalized: true, charpoly: cp });
    }
}

/// A one-sided fixed point of ζ^power starting with `letter`.
#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub zeta: Substitution,
    pub power: u32,
    pub letter: Letter,
    lens: Vec<Vec<u128>>,
}

impl FixedPoint {
    /// Chooses the smallest power whose image of some letter starts with
    /// that letter and grows; ties go to the smallest letter.
    pub fn new(base: &Substitution) -> Result<Self> {
        let m = base.m();
        for p in 1..=(2 * m as u32 + 2) {
            let zp = base.power(p)?;
            for a in 0..m as Letter {
                let img = zp.image(a);
                if img[0] == a && img.len() >= 2 {
                    let lens = length_table(&zp, 1);
                    return Ok(FixedPoint { zeta: zp, power: p, letter: a, lens });
                }
            }
        }
        Err(Error::NotFound("no growing fixed point".into()))
    }

    fn ensure_levels(&mut self, need: u128) {
        while self.lens.last().unwrap()[self.letter as usize] < need {
            let k = self.lens.len() - 1;
            let row: Vec<u128> = self
                .zeta
                .images()
                .iter()
                .map(|w| w.iter().fold(0u128, |acc, &c| acc.saturating_add(self.lens[k][c as usize])))
                .collect();
            self.lens.push(row);
        }
    }

    pub fn len_at(&self, k: usize, b: Letter) -> u128 {
        self.lens[k][b as usize]
    }

    /// First `n` letters of the fixed point.
    pub fn prefix(&self, n: usize) -> Word {
        let mut w = vec![self.letter];
        while w.len() < n {
            w = self.zeta.apply(&w);
        }
        w.truncate(n);
        w
    }

    /// Decomposes the window `[start, start + n)` of the fixed point.
    pub fn decompose(&mut self, start: u64, n: u64) -> Result<PrefixSuffixDecomposition> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty window".into()));
        }
        let (ws, we) = (start as u128, start as u128 + n as u128);
        self.ensure_levels(we);
        let mut h = self.lens.len() - 1;
        let mut b = self.letter;
        let mut s: u128 = 0;
        loop {
            if ws == s && we == s + self.lens[h][b as usize] {
                let mut d = PrefixSuffixDecomposition::empty(h);
                d.v[h] = vec![b];
                return Ok(d);
            }
            let img = self.zeta.image(b).to_vec();
            let starts = child_starts(&img, &self.lens[h - 1], s);
            let i = locate(&starts, ws);
            let j = locate(&starts, we - 1);
            if i == j {
                s = starts[i];
                b = img[i];
                h -= 1;
                continue;
            }
            let n_top = h - 1;
            let mut d = PrefixSuffixDecomposition::empty(n_top);
            let end_j = starts[j] + self.lens[n_top][img[j] as usize];
            let first_full = if ws == starts[i] { i } else { i + 1 };
            let last_full = if we == end_j { j as isize } else { j as isize - 1 };
            if first_full != i {
                self.left_chain(n_top, img[i], starts[i], ws, &mut d);
            }
            if last_full != j as isize {
                self.right_chain(n_top, img[j], starts[j], we, &mut d);
            }
            if (first_full as isize) <= last_full {
                let w = img[first_full..=last_full as usize].to_vec();
                if first_full == 0 {
                    d.v[n_top] = w;
                } else {
                    d.u[n_top] = w;
                }
            }
            d.trim();
            return Ok(d);
        }
    }

    fn left_chain(&self, level: usize, b: Letter, start: u128, ws: u128, d: &mut PrefixSuffixDecomposition) {
        let (mut g, mut b, mut s) = (level, b, start);
        while g > 0 {
            let img = self.zeta.image(b);
            let starts = child_starts(img, &self.lens[g - 1], s);
            let idx = locate(&starts, ws);
            if ws == starts[idx] {
                d.u[g - 1] = img[idx..].to_vec();
                return;
            }
            d.u[g - 1] = img[idx + 1..].to_vec();
            s = starts[idx];
            b = img[idx];
            g -= 1;
        }
    }

    fn right_chain(&self, level: usize, b: Letter, start: u128, we: u128, d: &mut PrefixSuffixDecomposition) {
        let (mut g, mut b, mut s) = (level, b, start);
        while g > 0 {
            let img = self.zeta.image(b);
            let starts = child_starts(img, &self.lens[g - 1], s);
            let idx = locate(&starts, we - 1);
            let end = starts[idx] + self.lens[g - 1][img[idx] as usize];
            if we == end {
                d.v[g - 1] = img[..=idx].to_vec();
                return;
            }
            d.v[g - 1] = img[..idx].to_vec();
            s = starts[idx];
            b = img[idx];
            g -= 1;
        }
    }
}

fn child_starts(img: &[Letter], lens: &[u128], s: u128) -> Vec<u128> {
    let mut v = Vec::with_capacity(img.len());
    let mut pos = s;
    for &c in img {
        v.push(pos);
        pos += lens[c as usize];
    }
    v
}

fn locate(starts: &[u128], pos: u128) -> usize {
    match starts.binary_search(&pos) {
        Ok(i) => i,
        Err(i) => i - 1,
    }
}

/// `x[0, N) = u_0 ζ(u_1) … ζ^n(u_n) ζ^n(v_n) … ζ(v_1) v_0`.
///
/// The `u_k` are proper suffixes of images (or, at the top level, a proper
/// factor), the `v_k` proper prefixes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixSuffixDecomposition {
    pub n: usize,
    pub u: Vec<Word>,
    pub v: Vec<Word>,
}

impl PrefixSuffixDecomposition {
    fn empty(n: usize) -> Self {
        PrefixSuffixDecomposition { n, u: vec![vec![]; n + 1], v: vec![vec![]; n + 1] }
    }

    fn trim(&mut self) {
        while self.n > 0 && self.u[self.n].is_empty() && self.v[self.n].is_empty() {
            self.u.pop();
            self.v.pop();
            self.n -= 1;
        }
    }

    /// Pieces in order of appearance: (level, word).
    pub fn pieces(&self) -> Vec<(usize, &[Letter])> {
        let mut out = Vec::with_capacity(2 * self.n + 2);
        for k in 0..=self.n {
            out.push((k, self.u[k].as_slice()));
        }
        for k in (0..=self.n).rev() {
            out.push((k, self.v[k].as_slice()));
        }
        out
    }

    pub fn reconstruct(&self, z: &Substitution) -> Word {
        let mut out = Word::new();
        for (k, w) in self.pieces() {
            let mut x = w.to_vec();
            for _ in 0..k {
                x = z.apply(&x);
            }
            out.extend(x);
        }
        out
    }
}

/// Decomposition of a legal word, located inside the fixed point.
pub fn prefix_suffix_decomposition(z: &Substitution, x_prefix: &[Letter]) -> Result<(FixedPoint, u64, PrefixSuffixDecomposition)> {
    let mut fp = FixedPoint::new(z)?;
    let n = x_prefix.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    let budget = (64 * n).max(1 << 16);
    let w = fp.prefix(budget);
    let pos = w.windows(n).position(|win| win == x_prefix).ok_or_else(|| Error::NotInLanguage(z.display_word(x_prefix)))?;
    let d = fp.decompose(pos as u64, n as u64)?;
    Ok((fp, pos as u64, d))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnWord {
    pub v: Word,
    pub c: Letter,
    /// Smallest ℓ with `vc` a factor of ζ^ℓ(b) for every b.
    pub power: u32,
}

/// Shortest return word (ties: smallest letter, then lexicographic), with
/// its witnessing power.
pub fn find_return_word(z: &Substitution, budget: usize) -> Result<ReturnWord> {
    let fp = FixedPoint::new(z)?;
    let w = fp.prefix(budget.max(16) * 10);
    let mut cands: BTreeSet<(usize, Letter, Word)> = BTreeSet::new();
    for c in 0..z.m() as Letter {
        let occ: Vec<usize> = w.iter().enumerate().filter(|(_, &x)| x == c).map(|(i, _)| i).collect();
        for pair in occ.windows(2) {
            let v = w[pair[0]..pair[1]].to_vec();
            if v.len() <= budget {
                cands.insert((v.len(), c, v));
            }
        }
    }
    let (_, c, v) = cands.into_iter().next().ok_or_else(|| Error::NotFound("no return word within budget".into()))?;
    let mut vc = v.clone();
    vc.push(c);
    let mut imgs: Vec<Word> = (0..z.m() as Letter).map(|b| vec![b]).collect();
    for power in 1..=64u32 {
        imgs = imgs.iter().map(|x| z.apply(x)).collect();
        if imgs.iter().all(|x| x.windows(vc.len()).any(|win| win == vc.as_slice())) {
            return Ok(ReturnWord { v, c, power });
        }
        if imgs.iter().any(|x| x.len() > 20 * budget.max(1 << 16)) {
            break;
        }
    }
    Err(Error::NotFound("witnessing power exceeds budget".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Aperiodicity {
    Aperiodic,
    PeriodicWitness(usize),
    Unknown,
}

pub fn factor_complexity(w: &[Letter], n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let set: HashSet<&[Letter]> = w.windows(n).collect();
    set.len()
}

pub fn is_aperiodic_heuristic(z: &Substitution, budget: usize) -> Aperiodicity {
    let Ok(fp) = FixedPoint::new(z) else {
        // ζ(a) = a only: the fixed points are constant sequences
        return Aperiodicity::PeriodicWitness(1);
    };
    let w = fp.prefix(budget.max(64));
    let pmax = w.len() / 4;
    let nmax = (w.len() / 32).clamp(2, 64);
    let comp: Vec<usize> = (1..=nmax).map(|n| factor_complexity(&w, n)).collect();
    if let Some(p) = (1..=pmax).find(|&p| (0..w.len() - p).all(|i| w[i] == w[i + p])) {
        if comp.iter().all(|&c| c <= p) {
            return Aperiodicity::PeriodicWitness(p);
        }
    }
    if comp.windows(2).all(|x| x[1] > x[0]) {
        Aperiodicity::Aperiodic
    } else {
        Aperiodicity::Unknown
    }
}

pub fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}
