//! Thin helpers over `astro_float::BigFloat`: a thread-local constants cache,
//! the inverse-tangent quadrant fixup, and f64 extraction for diagnostics.
//!
//! All rounding is to-even. Functions that need the constants cache (pi,
//! exp, ln, trig) go through the thread-local `Consts`; everything stays
//! pure from the caller's point of view.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use std::cell::RefCell;

pub const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache allocation"));
}

pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

pub fn exp(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.exp(p, RM, cc))
}

pub fn ln(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.ln(p, RM, cc))
}

pub fn sin(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.sin(p, RM, cc))
}

pub fn cos(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.cos(p, RM, cc))
}

pub fn atan(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.atan(p, RM, cc))
}

pub fn sqrt(x: &BigFloat, p: usize) -> BigFloat {
    x.sqrt(p, RM)
}

/// Principal-value `atan2(y, x)` with the usual quadrant conventions.
pub fn atan2(y: &BigFloat, x: &BigFloat, p: usize) -> BigFloat {
    let zero = BigFloat::from_i64(0, p);
    if x.is_zero() {
        if y.is_zero() {
            return zero;
        }
        let mut half_pi = pi(p);
        half_pi.set_exponent(half_pi.exponent().unwrap() - 1);
        return if y.is_negative() { half_pi.neg() } else { half_pi };
    }
    let base = atan(&y.div(x, p, RM), p);
    if x.is_positive() {
        base
    } else if y.is_negative() {
        base.sub(&pi(p), p, RM)
    } else {
        base.add(&pi(p), p, RM)
    }
}

/// Nearest-double approximation, for step control and report summaries only.
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    let (words, _n, s, e, _) = x.as_raw_parts().expect("finite raw parts");
    // words are little-endian: the most significant word is last
    let k = words.len();
    let mut v = 0.0f64;
    for i in 0..k.min(2) {
        v += (words[k - 1 - i] as f64) * (2f64).powi(-64 * (i as i32 + 1));
    }
    let v = v * (2f64).powi(e);
    match s {
        Sign::Neg => -v,
        Sign::Pos => v,
    }
}

/// log2 of |x| (f64, for cancellation estimates); -inf for zero.
pub fn log2_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    match x.exponent() {
        Some(e) => {
            // mantissa is in [0.5, 1), so |x| in [2^(e-1), 2^e)
            let (words, _n, _s, _e, _) = x.as_raw_parts().expect("finite");
            let top = *words.last().unwrap() as f64 / 2f64.powi(64);
            e as f64 + top.log2()
        }
        None => f64::NAN,
    }
}

pub fn parse(s: &str, p: usize) -> Option<BigFloat> {
    let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, p, RM, cc));
    if v.is_nan() && s.trim().to_lowercase() != "nan" {
        None
    } else {
        Some(v)
    }
}

pub fn format(x: &BigFloat) -> String {
    with_consts(|cc| x.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "nan".to_string())
}

/// 2^k as a BigFloat (exact).
pub fn pow2(k: i64, p: usize) -> BigFloat {
    let mut one = BigFloat::from_i64(1, p);
    one.set_exponent((k + 1) as astro_float::Exponent);
    one
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn to_f64_roundtrip() {
        for &v in &[1.0, -2.5, 0.3333333333333333, 1e-20, 7.25e18, -9.9e-7] {
            let x = BigFloat::from_f64(v, 192);
            let back = to_f64(&x);
            assert!((back - v).abs() <= v.abs() * 1e-15, "{v} -> {back}");
        }
    }

    #[test]
    fn atan2_quadrants() {
        let p = 192;
        let one = BigFloat::from_i64(1, p);
        let neg = one.neg();
        let q1 = atan2(&one, &one, p);
        let q2 = atan2(&one, &neg, p);
        let q3 = atan2(&neg, &neg, p);
        let q4 = atan2(&neg, &one, p);
        let pi_v = to_f64(&pi(p));
        assert!((to_f64(&q1) - pi_v / 4.0).abs() < 1e-15);
        assert!((to_f64(&q2) - 3.0 * pi_v / 4.0).abs() < 1e-15);
        assert!((to_f64(&q3) + 3.0 * pi_v / 4.0).abs() < 1e-15);
        assert!((to_f64(&q4) + pi_v / 4.0).abs() < 1e-15);
    }

    #[test]
    fn pow2_exact() {
        assert_eq!(to_f64(&pow2(-10, 128)), 2f64.powi(-10));
        assert_eq!(to_f64(&pow2(3, 128)), 8.0);
    }

    #[test]
    fn log2_abs_sane() {
        let x = BigFloat::from_f64(0.75, 128);
        assert!((log2_abs(&x) - 0.75f64.log2()).abs() < 1e-9);
    }
}
