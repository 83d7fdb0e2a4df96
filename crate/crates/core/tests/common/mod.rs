#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use subspectra::substitution::{is_primitive, substitution_matrix, Letter, Substitution};

/// ζ(1) = 1222, ζ(2) = 1; matrix [[1,1],[3,0]].
pub fn example() -> Substitution {
    Substitution::parse(2, &["1222", "1"]).unwrap()
}

pub fn fibonacci() -> Substitution {
    Substitution::parse(2, &["12", "1"]).unwrap()
}

/// Matrix [[3,1],[1,3]]: θ = 4, θ₂ = 2.
pub fn symmetric() -> Substitution {
    Substitution::parse(2, &["1112", "1222"]).unwrap()
}

pub fn primitive_substitution() -> impl Strategy<Value = Substitution> {
    (2usize..=3)
        .prop_flat_map(|m| prop::collection::vec(prop::collection::vec(0..m as Letter, 1..=4), m).prop_map(move |imgs| (m, imgs)))
        .prop_filter_map("primitive", |(m, imgs)| {
            let z = Substitution::new(m, imgs).ok()?;
            is_primitive(&substitution_matrix(&z))?;
            Some(z)
        })
}

/// Σ_{j : v_j = a} e^{−2πiωj}, summed term by term.
pub fn naive_phi(v: &[Letter], a: Letter, omega: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (j, &c) in v.iter().enumerate() {
        if c == a {
            let x = (omega * j as f64).rem_euclid(1.0);
            s += Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * x);
        }
    }
    s
}

/// Σ_{j<N} e^{−2πiωj} d(v_j).
pub fn naive_sum(v: &[Letter], d: &[f64], omega: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (j, &c) in v.iter().enumerate() {
        let x = (omega * j as f64).rem_euclid(1.0);
        s += d[c as usize] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * x);
    }
    s
}

pub mod roots;
