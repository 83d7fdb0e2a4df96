mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspectra::flows::*;
use subspectra::num::Ball;
use subspectra::substitution::*;

use common::*;

const PREC: u32 = 256;

fn anchor(flow: &mut SuspensionFlow, n: u64, frac: f64) -> Anchor {
    let (b, _) = flow.tile(n);
    Anchor { n, u: frac * flow.roof[b as usize] }
}

#[test]
fn self_similar_lengths_scale_by_theta() {
    for z in [example(), symmetric(), fibonacci()] {
        let flow = SuspensionFlow::self_similar(&z, PREC).unwrap();
        let s = flow.roof_balls().to_vec();
        let theta = perron_data(&substitution_matrix(&z), PREC).unwrap().theta;
        let v: Word = vec![0, 1, 1, 0];
        let ab = abelianization(&v, z.m());
        let len_v = v.iter().fold(Ball::zero(PREC), |acc, &c| acc.add(&s[c as usize]));
        let mat = substitution_matrix(&z);
        for n in 0..=60u32 {
            let p = mat_pow_big(&mat, n);
            let counts: Vec<BigInt> = (0..z.m()).map(|i| (0..z.m()).map(|j| &p[i][j] * ab[j]).sum()).collect();
            let by_matrix = counts.iter().zip(&s).fold(Ball::zero(PREC), |acc, (k, x)| acc.add(&x.mul_int(k)));
            let by_scaling = theta.pow(n as u64).mul(&len_v);
            let diff = by_matrix.sub(&by_scaling);
            assert!(diff.contains_zero(), "n={n}");
            assert!(diff.rad_f64() <= 1e-40 * by_matrix.mid_f64(), "n={n} width {}", diff.rad_f64());
        }
    }
}

#[test]
fn roof_is_orthogonal_to_second_eigenvector() {
    for z in [example(), symmetric()] {
        let flow = SuspensionFlow::self_similar(&z, PREC).unwrap();
        let e = second_eigen(&z).unwrap();
        let dot: f64 = e.e2.iter().zip(&flow.roof).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-14, "{dot}");
        // m_{Φ₂⁻} of the constant 1 is ⟨e₂, s⟩
        assert!(m_phi2_minus(&flow, &Cylindrical::constant(&[1.0, 1.0])).unwrap().abs() < 1e-14);
    }
    let e = second_eigen(&symmetric()).unwrap();
    assert!((e.theta - 4.0).abs() < 1e-12 && (e.theta2 - 2.0).abs() < 1e-12);
    assert!((e.alpha - 0.5).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cocycle_renormalizes(which in 0usize..2, n in 0u64..3000, frac in 0.0f64..1.0, t in 0.3f64..80.0) {
        let z = if which == 0 { symmetric() } else { example() };
        let mut flow = SuspensionFlow::self_similar(&z, PREC).unwrap();
        let coc = Cocycle::new(&flow).unwrap();
        let p = flow.fixed_point_power() as i32;
        let x = anchor(&mut flow, n, frac);
        let zx = flow.renormalize(x).unwrap();
        let a = coc.evaluate(&mut flow, x, t, 30).unwrap();
        let b = coc.evaluate(&mut flow, zx, coc.eigen.theta.powi(p) * t, 30).unwrap();
        let lam = coc.eigen.theta2.powi(p);
        let tol = b.error_bound + lam.abs() * a.error_bound + 1e-8 * (1.0 + b.value.abs());
        prop_assert!((b.value - lam * a.value).abs() <= tol, "{} vs {} tol {}", b.value, lam * a.value, tol);
    }
}

#[test]
fn cocycle_growth_constant_holds_out_of_sample() {
    let mut flow = SuspensionFlow::self_similar(&symmetric(), PREC).unwrap();
    let coc = Cocycle::new(&flow).unwrap();
    let alpha = coc.eigen.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sample = |flow: &mut SuspensionFlow, rng: &mut ChaCha8Rng| {
        let x = anchor(flow, rng.gen_range(0..5000), rng.gen());
        let t = 10f64.powf(rng.gen_range(-1.0..4.0));
        let c = coc.evaluate(flow, x, t, 30).unwrap();
        (c.value.abs() + c.error_bound) / t.powf(alpha).max(1.0)
    };
    let fit: Vec<f64> = (0..20).map(|_| sample(&mut flow, &mut rng)).collect();
    let c1 = 2.0 * fit.iter().cloned().fold(0.0, f64::max);
    for i in 0..200 {
        let r = sample(&mut flow, &mut rng);
        assert!(r <= c1, "sample {i}: {r} > C₁ = {c1}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn flow_bound_dominates_integral(omega in 0.05f64..3.0, r in 5.0f64..3000.0, n in 0u64..400, frac in 0.0f64..1.0, letter in 0u8..2) {
        let z = example();
        let mut flow = SuspensionFlow::self_similar(&z, PREC).unwrap();
        let (zl, consts) = return_word_setup(&z, 40).unwrap();
        let x = anchor(&mut flow, n, frac);
        let integral = twisted_ergodic_integral(&mut flow, x, 0.0, letter, omega, r).unwrap();
        let bound = flow_product_bound(&flow, &zl, &consts, omega, r).unwrap();
        prop_assert!(integral.value.norm() <= bound.bound, "|S|={} bound={}", integral.value.norm(), bound.bound);
    }
}
