pub mod ball;
pub mod cball;
pub mod dd;

pub use ball::Ball;
pub use cball::CBall;
pub use dd::{Cdd, Dd};

/// Midpoint of a ball rounded to double-double.
pub fn ball_to_dd(b: &Ball) -> Dd {
    let hi = b.mid_f64();
    let hib = Ball::from_f64(hi, b.prec());
    let rest = b.mid_only().sub(&hib);
    Dd::new(hi, rest.mid_f64())
}

/// Exact `x mod 1` for a dyadic `x` times an integer, returned as a phase in
/// turns. `omega` is exact as an f64, so `omega * len` is an exact dyadic.
pub fn dyadic_phase(omega: f64, len: &num_bigint::BigInt) -> Dd {
    use num_integer::Integer;
    let (m, e) = ball::decompose_f64(omega);
    let prod = m * len;
    if e >= 0 {
        return Dd::ZERO;
    }
    let den = num_bigint::BigInt::from(1) << ((-e) as u32);
    let r = prod.mod_floor(&den);
    let p = (-e) as u32;
    let b = Ball::from_parts(r, num_bigint::BigInt::from(0), p);
    ball_to_dd(&b)
}
