use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use subspectra::algebraic::*;
use subspectra::diophantine::*;

fn non_pv() -> Vec<Vec<i64>> {
    vec![vec![1, -1, -3], vec![1, -2, -4], vec![1, 0, -3, -1], vec![1, -1, -4, 1], vec![1, 0, -4, 0, 1]]
}

fn theta(c: &[i64]) -> AlgebraicInteger {
    AlgebraicInteger::from_high_first(c).unwrap()
}

fn t_of(th: &AlgebraicInteger, coords: &[i64]) -> ZThetaElement {
    let mut c = coords.to_vec();
    c.resize(th.degree(), 0);
    ZThetaElement::from_i64(&c)
}

fn theta_list(th: &AlgebraicInteger) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = conjugates(th).into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
    c.swap(0, th.root_index());
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequence_satisfies_integer_recurrence(which in 0usize..5, coords in prop::collection::vec(-50i64..50, 4), n in 1usize..300) {
        let th = theta(&non_pv()[which]);
        let t = t_of(&th, &coords);
        let seq = pisot_sequence(&th, &t, n, 1e-12).unwrap();
        prop_assert_eq!(seq.len(), n + 1);
        prop_assert_eq!(seq.recurrence_violation(), None);
        let delta1 = prop_alg_constants(&th).unwrap().delta1;
        prop_assert_eq!(seq.propagation_check(delta1).1, None);
        for k in 0..seq.len() {
            prop_assert!(seq.dist_lower(k) <= seq.dist_upper(k) && seq.dist_upper(k) <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn product_is_nonincreasing(which in 0usize..5, coords in prop::collection::vec(1i64..30, 4), n in 10usize..300) {
        let th = theta(&non_pv()[which]);
        let t = t_of(&th, &coords);
        let p = prop_alg_product(&th, &t, n, false).unwrap();
        prop_assert!(p.monotone);
        prop_assert!(p.log_values.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(p.first_violation, None);
    }

    #[test]
    fn candidates_never_exceed_l(which in 0usize..5, window in prop::collection::vec(-100_000i64..100_000, 4)) {
        let th = theta(&non_pv()[which]);
        let consts = ek_constants(&theta_list(&th)).unwrap();
        let w = &window[..th.degree()];
        let p = ek_step_predict(w, &consts, 1e-6).unwrap();
        prop_assert!(p.candidates.len() as u64 <= consts.l);
        prop_assert!(p.candidates.contains(&p.unique));
    }
}

#[test]
fn small_t_uses_second_branch_late() {
    // t = θ − 2 ∈ (0, 1) for θ² = θ + 3
    let th = theta(&[1, -1, -3]);
    let t = ZThetaElement::from_i64(&[-2, 1]);
    let p = prop_alg_product(&th, &t, 200, false).unwrap();
    let tv = th.theta_f64() - 2.0;
    assert!((p.t_value - tv).abs() < 1e-12);
    let expect = 2 * ((1.0 / tv).ln() / th.theta_f64().ln()).ceil() as usize;
    assert_eq!(p.first_n, expect);
    assert!(p.bound(p.first_n).is_some());
}

#[test]
fn windows_escape_for_non_pv_polynomials() {
    let ts: [&[i64]; 10] = [&[1], &[2], &[3], &[7], &[1, 1], &[0, 1], &[5, 2], &[-1, 3], &[2, 0, 1], &[1, 1, 1]];
    for c in non_pv() {
        let th = theta(&c);
        for t in ts {
            let t = t_of(&th, &t[..t.len().min(th.degree())]);
            if t.value(&th.theta_ball(128).unwrap()).mid_f64() <= 0.0 {
                continue;
            }
            let r = window_escape_check(&th, &t, None, 50, false).unwrap();
            assert_eq!(r.first_violation, None, "{c:?} t={:?}", t.coords);
            // k0 is fitted past the last failing window, so also require none at all
            assert_eq!(r.last_failure, None, "{c:?} t={:?}", t.coords);
            assert!(r.windows.iter().all(|w| w.witness.is_some_and(|i| i >= w.k && i < w.k * r.beta as usize)));
        }
    }
}

#[test]
fn pv_windows_need_diagnostic() {
    let phi = theta(&[1, -1, -1]);
    let one = ZThetaElement::from_i64(&[1, 0]);
    assert!(matches!(window_escape_check(&phi, &one, None, 20, false), Err(subspectra::Error::WrongClass(_))));
    let r = window_escape_check(&phi, &one, None, 20, true).unwrap();
    assert!(r.hypothesis_violated);
    // golden-ratio powers approach integers, so late windows fail
    assert_eq!(r.last_failure, Some(20));
    assert!(r.k0 > 20);
    let s = pisot_sequence(&phi, &one, 0, 1e-12).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.k[0].to_i64(), Some(1));
}

#[test]
fn ek_frequency_counts_from_certified_distances() {
    let th = theta(&[1, -1, -3]);
    let list = theta_list(&th);
    let consts = ek_constants(&list).unwrap();
    let f = ek_frequency(&list, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], 0.75, 60, consts.rho).unwrap();
    assert_eq!(f.dists.len(), 60);
    assert_eq!(f.count, f.dists.iter().filter(|&&d| d >= consts.rho).count());
    // independent: 0.75·θⁿ mod 1 from exact integer traces θⁿ + θ₂ⁿ;
    // kept to n where the f64 rounding of θ moves θⁿ by well under 1e-6
    let t2 = list[1].re;
    let (mut a, mut b) = (2i128, 1i128);
    for n in 1..=18usize {
        let x = 0.75 * (b as f64 - t2.powi(n as i32));
        let d = (x - x.round()).abs();
        assert!((d - f.dists[n - 1]).abs() < 1e-6, "n={n}");
        let c = b + 3 * a;
        a = b;
        b = c;
    }
}
