mod common;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspectra::algebraic::*;
use subspectra::poly::Poly;

use common::roots::{brute_classify, roots, Verdict};

fn big(hi: i64, lo: u64) -> BigInt {
    (BigInt::from(hi) << 64) + BigInt::from(lo)
}

fn non_pv() -> Vec<Vec<i64>> {
    vec![vec![1, -1, -3], vec![1, -2, -4], vec![1, 0, -3, -1], vec![1, -1, -4, 1], vec![1, 0, -4, 0, 1]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplication_by_theta_matches_values(
        which in 0usize..5,
        coords in prop::collection::vec((any::<i64>(), any::<u64>()), 4),
        prec in 256u32..700,
    ) {
        let c = &non_pv()[which];
        let th = AlgebraicInteger::from_high_first(c).unwrap();
        let s = th.degree();
        let x = ZThetaElement { coords: coords[..s].iter().map(|&(h, l)| big(h, l)).collect() };
        let tb = th.theta_ball(prec).unwrap();
        let lhs = zt_mul_theta(&x, th.poly()).value(&tb);
        let rhs = x.value(&tb).mul(&tb);
        prop_assert!(lhs.sub(&rhs).contains_zero());
        prop_assert!(lhs.rad_f64() < lhs.mid_f64().abs() * 1e-30 + 1e-30);
    }

    #[test]
    fn frac_dist_nearest_is_stable(which in 0usize..5, coords in prop::collection::vec(-1000i64..1000, 4)) {
        let c = &non_pv()[which];
        let th = AlgebraicInteger::from_high_first(c).unwrap();
        let x = ZThetaElement::from_i64(&coords[..th.degree()]);
        let mut prev: Option<BigInt> = None;
        for err in [1e-3, 1e-8, 1e-15, 1e-30] {
            let d = frac_dist(&x, &th, err).unwrap();
            prop_assert!(d.dist_upper() - d.dist_lower() <= err + 1e-15);
            if let Some(p) = &prev {
                prop_assert_eq!(p, &d.nearest);
            }
            prev = Some(d.nearest);
        }
    }
}

#[test]
fn named_classifications_agree_with_oracle() {
    let cases: [(&[i64], ClassKind, Verdict); 4] = [
        (&[1, -1, -1], ClassKind::PV, Verdict::PV),
        (&[1, 0, -1, -1], ClassKind::PV, Verdict::PV),
        (&[1, -1, -3], ClassKind::HasConjugateOutside, Verdict::Outside),
        (&[1, -1, -1, -1, 1], ClassKind::Salem, Verdict::Salem),
    ];
    for (c, kind, verdict) in cases {
        let th = AlgebraicInteger::from_high_first(c).unwrap();
        assert_eq!(classify(&th).unwrap().kind, kind, "{c:?}");
        assert_eq!(brute_classify(c), verdict, "{c:?}");
    }
}

#[test]
fn random_corpus_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut tested = 0;
    let mut seen = std::collections::BTreeSet::new();
    while tested < 50 {
        let deg = rng.gen_range(3..=4);
        let mut c = vec![1i64];
        c.extend((0..deg).map(|_| rng.gen_range(-4..=4)));
        if !seen.insert(c.clone()) {
            continue;
        }
        let p = Poly::from_high_first(&c);
        let at = |x: i64| c.iter().fold(0i64, |acc, &a| acc * x + a);
        if at(0) == 0 || at(1) == 0 || at(-1) == 0 || !p.is_squarefree() {
            continue;
        }
        let Ok(th) = AlgebraicInteger::new(p) else { continue };
        let oracle = brute_classify(&c);
        if oracle == Verdict::Unresolved {
            continue;
        }
        let kind = classify(&th).unwrap_or_else(|e| panic!("{c:?}: {e}")).kind;
        let expect = match oracle {
            Verdict::PV => ClassKind::PV,
            Verdict::Salem => ClassKind::Salem,
            _ => ClassKind::HasConjugateOutside,
        };
        assert_eq!(kind, expect, "{c:?}");
        tested += 1;
    }
}

#[test]
fn garsia_bound_below_exhaustive_minimum() {
    for c in non_pv() {
        let th = AlgebraicInteger::from_high_first(&c).unwrap();
        let cl = classify(&th).unwrap();
        let j2 = cl.witness.unwrap();
        let s = th.degree();
        let theta2 = th.roots()[j2].value_c64();
        // cross-check the witness against the oracle roots
        let brute: Vec<Complex64> = roots(&c).iter().map(|r| r.to_c64()).collect();
        assert!(brute.iter().any(|r| (r - theta2).norm() < 1e-9));
        let h = 3i64;
        let mut min = f64::INFINITY;
        let count = (2 * h + 1).pow(s as u32);
        for idx in 0..count {
            let mut k = idx;
            let q: Vec<i64> = (0..s)
                .map(|_| {
                    let d = k % (2 * h + 1);
                    k /= 2 * h + 1;
                    d - h
                })
                .collect();
            let v = q.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * theta2 + a as f64);
            if v.norm() > 1e-9 {
                min = min.min(v.norm());
            }
        }
        let g = garsia_lower_bound(&th, j2, h as u64, s - 1).unwrap();
        assert!(g > 0.0 && g <= min, "{c:?}: {g} vs {min}");
    }
}
