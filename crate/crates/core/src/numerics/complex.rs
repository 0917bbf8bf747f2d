//! Arbitrary-precision complex scalars.
//!
//! A `BigComplex` owns its two real components together with the significand
//! width `precision_bits` of each. Binary operations produce results at the
//! minimum precision of their operands; composite operations (division,
//! modulus, exp, log, sqrt) run with 32 guard bits internally and round once
//! at the end. Principal branches everywhere; multivaluedness across paths is
//! the business of the continuation engine, never of scalar evaluation.

use astro_float::BigFloat;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::real::{self, RM};
use crate::error::{Error, Result};

/// Default significand width used by every entry point that does not override it.
pub const DEFAULT_PRECISION: usize = 256;
/// Smallest permitted significand width.
pub const MIN_PRECISION: usize = 64;
/// Guard bits used inside composite scalar operations.
const GUARD: usize = 32;

#[derive(Clone)]
pub struct BigComplex {
    re: BigFloat,
    im: BigFloat,
    precision_bits: usize,
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat, precision_bits: usize) -> Self {
        let p = precision_bits.max(MIN_PRECISION);
        let mut re = re;
        let mut im = im;
        let _ = re.set_precision(p, RM);
        let _ = im.set_precision(p, RM);
        BigComplex { re, im, precision_bits: p }
    }

    pub fn from_f64s(re: f64, im: f64, p: usize) -> Self {
        let p = p.max(MIN_PRECISION);
        Self::new(BigFloat::from_f64(re, p), BigFloat::from_f64(im, p), p)
    }

    pub fn from_i64s(re: i64, im: i64, p: usize) -> Self {
        let p = p.max(MIN_PRECISION);
        Self::new(BigFloat::from_i64(re, p), BigFloat::from_i64(im, p), p)
    }

    /// Exact rational re = n/d (d != 0), imaginary part zero.
    pub fn from_ratio(n: i64, d: i64, p: usize) -> Self {
        let p = p.max(MIN_PRECISION);
        let num = BigFloat::from_i64(n, p + GUARD);
        let den = BigFloat::from_i64(d, p + GUARD);
        Self::new(num.div(&den, p + GUARD, RM), BigFloat::from_i64(0, p), p)
    }

    pub fn zero(p: usize) -> Self {
        Self::from_i64s(0, 0, p)
    }

    pub fn one(p: usize) -> Self {
        Self::from_i64s(1, 0, p)
    }

    pub fn i(p: usize) -> Self {
        Self::from_i64s(0, 1, p)
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn precision(&self) -> usize {
        self.precision_bits
    }

    /// Re-rounds both components to `p` bits. Raising precision adds no
    /// information; it only widens the significand for guard-bit computations.
    pub fn with_precision(&self, p: usize) -> Self {
        Self::new(self.re.clone(), self.im.clone(), p)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.im.is_nan() || self.re.is_inf() || self.im.is_inf())
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.re.cmp(&other.re) == Some(0) && self.im.cmp(&other.im) == Some(0)
    }

    fn join(&self, other: &Self) -> usize {
        self.precision_bits.min(other.precision_bits)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Self::new(self.re.add(&rhs.re, p, RM), self.im.add(&rhs.im, p, RM), p)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Self::new(self.re.sub(&rhs.re, p, RM), self.im.sub(&rhs.im, p, RM), p)
    }

    pub fn neg(&self) -> Self {
        BigComplex {
            re: self.re.neg(),
            im: self.im.neg(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: self.im.neg(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        let w = p + GUARD;
        let ac = self.re.mul(&rhs.re, w, RM);
        let bd = self.im.mul(&rhs.im, w, RM);
        let ad = self.re.mul(&rhs.im, w, RM);
        let bc = self.im.mul(&rhs.re, w, RM);
        Self::new(ac.sub(&bd, w, RM), ad.add(&bc, w, RM), p)
    }

    pub fn mul_real(&self, rhs: &BigFloat) -> Self {
        let p = self.precision_bits;
        Self::new(self.re.mul(rhs, p, RM), self.im.mul(rhs, p, RM), p)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul_real(&BigFloat::from_i64(k, self.precision_bits))
    }

    /// Multiplication by i (exact rotation).
    pub fn mul_i(&self) -> Self {
        BigComplex {
            re: self.im.neg(),
            im: self.re.clone(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZeroConstantTerm);
        }
        let p = self.join(rhs);
        let w = p + GUARD;
        let den = rhs
            .re
            .mul(&rhs.re, w, RM)
            .add(&rhs.im.mul(&rhs.im, w, RM), w, RM);
        let ac = self.re.mul(&rhs.re, w, RM);
        let bd = self.im.mul(&rhs.im, w, RM);
        let bc = self.im.mul(&rhs.re, w, RM);
        let ad = self.re.mul(&rhs.im, w, RM);
        Ok(Self::new(
            ac.add(&bd, w, RM).div(&den, w, RM),
            bc.sub(&ad, w, RM).div(&den, w, RM),
            p,
        ))
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one(self.precision_bits).div(self)
    }

    pub fn abs_sq(&self) -> BigFloat {
        let w = self.precision_bits + GUARD;
        self.re
            .mul(&self.re, w, RM)
            .add(&self.im.mul(&self.im, w, RM), w, RM)
    }

    pub fn abs(&self) -> BigFloat {
        let w = self.precision_bits + GUARD;
        let mut r = real::sqrt(&self.abs_sq(), w);
        let _ = r.set_precision(self.precision_bits, RM);
        r
    }

    /// Principal argument in (-pi, pi].
    pub fn arg(&self) -> BigFloat {
        real::atan2(&self.im, &self.re, self.precision_bits + GUARD)
    }

    pub fn exp(&self) -> Self {
        let p = self.precision_bits;
        let w = p + GUARD;
        let r = real::exp(&self.re, w);
        let c = real::cos(&self.im, w);
        let s = real::sin(&self.im, w);
        Self::new(r.mul(&c, w, RM), r.mul(&s, w, RM), p)
    }

    /// Principal logarithm: cut along (-inf, 0].
    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::BranchCutViolation("log"));
        }
        let p = self.precision_bits;
        let w = p + GUARD;
        let mut half_log = real::ln(&self.abs_sq(), w);
        half_log.set_exponent(half_log.exponent().unwrap() - 1);
        Ok(Self::new(half_log, real::atan2(&self.im, &self.re, w), p))
    }

    /// Principal square root: cut along (-inf, 0), with sqrt(x) = i sqrt(|x|)
    /// for negative real x (limit from the upper half-plane).
    pub fn sqrt(&self) -> Self {
        let p = self.precision_bits;
        let w = p + GUARD;
        if self.is_zero() {
            return Self::zero(p);
        }
        let m = real::sqrt(&self.abs_sq(), w);
        // u = sqrt((|z| + re)/2), v = im/(2u) when re >= 0; mirrored otherwise
        if !self.re.is_negative() {
            let mut t = m.add(&self.re, w, RM);
            t.set_exponent(t.exponent().unwrap() - 1);
            let u = real::sqrt(&t, w);
            if u.is_zero() {
                return Self::zero(p);
            }
            let mut v = self.im.div(&u, w, RM);
            v.set_exponent(v.exponent().unwrap() - 1);
            Self::new(u, v, p)
        } else {
            let mut t = m.sub(&self.re, w, RM);
            t.set_exponent(t.exponent().unwrap() - 1);
            let vmag = real::sqrt(&t, w);
            let v = if self.im.is_negative() { vmag.neg() } else { vmag };
            let mut u = self.im.div(&v, w, RM);
            u.set_exponent(u.exponent().unwrap() - 1);
            Self::new(u, v, p)
        }
    }

    /// Exact integer power by repeated squaring.
    pub fn powi(&self, n: i64) -> Result<Self> {
        let p = self.precision_bits;
        if n == 0 {
            return Ok(Self::one(p));
        }
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        base = base.with_precision(p + GUARD);
        let mut e = n.unsigned_abs();
        let mut acc = Self::one(p + GUARD);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc.with_precision(p))
    }

    /// |self - other| as a double, for tolerance checks and reports.
    pub fn dist_f64(&self, other: &Self) -> f64 {
        real::to_f64(&self.sub(other).abs())
    }

    pub fn abs_f64(&self) -> f64 {
        real::to_f64(&self.abs())
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (real::to_f64(&self.re), real::to_f64(&self.im))
    }
}

impl std::fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (re, im) = self.to_f64s();
        write!(f, "({re:e} + {im:e}i; {} bits)", self.precision_bits)
    }
}

impl std::fmt::Display for BigComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}i", real::format(&self.re), real::format(&self.im))
    }
}

/// Parses "a+bi" forms: "1.5", "-2i", "0.2+1.1i", "1e-3-2.5e+1i", "i", "-i".
pub fn parse_complex(s: &str, p: usize) -> Result<BigComplex> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::InvalidInput("empty complex literal".into()));
    }
    let bad = || Error::InvalidInput(format!("cannot parse complex literal `{s}`"));

    // split at the last top-level +/- that is not a leading sign or exponent sign
    let bytes = t.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    let parse_real = |u: &str| -> Result<BigFloat> {
        real::parse(u, p).ok_or_else(bad)
    };
    let parse_imag_part = |u: &str| -> Result<BigFloat> {
        let core = &u[..u.len() - 1]; // strip trailing 'i'
        match core {
            "" | "+" => parse_real("1"),
            "-" => parse_real("-1"),
            _ => parse_real(core),
        }
    };

    if t.ends_with('i') || t.ends_with('I') {
        match split {
            Some(k) if k < t.len() - 1 => {
                let re = parse_real(&t[..k])?;
                let im = parse_imag_part(&t[k..])?;
                Ok(BigComplex::new(re, im, p))
            }
            _ => {
                let im = parse_imag_part(&t)?;
                Ok(BigComplex::new(BigFloat::from_i64(0, p), im, p))
            }
        }
    } else {
        let re = parse_real(&t)?;
        Ok(BigComplex::new(re, BigFloat::from_i64(0, p), p))
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: String,
    im: String,
    precision_bits: usize,
}

impl Serialize for BigComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexJson {
            re: real::format(&self.re),
            im: real::format(&self.im),
            precision_bits: self.precision_bits,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BigComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ComplexJson::deserialize(d)?;
        let re = real::parse(&j.re, j.precision_bits)
            .ok_or_else(|| D::Error::custom("bad decimal in `re`"))?;
        let im = real::parse(&j.im, j.precision_bits)
            .ok_or_else(|| D::Error::custom("bad decimal in `im`"))?;
        Ok(BigComplex::new(re, im, j.precision_bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64s(re, im, 192)
    }

    #[test]
    fn mul_div_roundtrip() {
        let a = c(1.25, -0.75);
        let b = c(-0.5, 2.0);
        let q = a.mul(&b).div(&b).unwrap();
        assert!(q.dist_f64(&a) < 1e-50);
    }

    #[test]
    fn min_precision_carried() {
        let a = BigComplex::from_f64s(1.0, 2.0, 320);
        let b = BigComplex::from_f64s(3.0, 4.0, 256);
        assert_eq!(a.mul(&b).precision(), 256);
        assert_eq!(a.add(&b).precision(), 256);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let a = c(0.4, 1.1);
        let r = a.exp().ln().unwrap();
        assert!(r.dist_f64(&a) < 1e-50);
    }

    #[test]
    fn sqrt_principal() {
        let a = c(-4.0, 0.0);
        let r = a.sqrt();
        let (re, im) = r.to_f64s();
        assert!(re.abs() < 1e-50 && (im - 2.0).abs() < 1e-15);
        let b = c(3.0, -4.0);
        let s = b.sqrt();
        assert!(s.mul(&s).dist_f64(&b) < 1e-50);
        assert!(!s.re().is_negative());
    }

    #[test]
    fn powi_negative() {
        let a = c(1.0, 1.0);
        let r = a.powi(-4).unwrap();
        // (1+i)^4 = -4, so (1+i)^-4 = -1/4
        assert!(r.dist_f64(&c(-0.25, 0.0)) < 1e-50);
    }

    #[test]
    fn parse_forms() {
        let p = 128;
        for (s, re, im) in [
            ("1.5", 1.5, 0.0),
            ("-2i", 0.0, -2.0),
            ("0.2+1.1i", 0.2, 1.1),
            ("1e-3-2.5e+1i", 1e-3, -25.0),
            ("i", 0.0, 1.0),
            ("-i", 0.0, -1.0),
            ("3-4i", 3.0, -4.0),
        ] {
            let z = parse_complex(s, p).unwrap();
            let (r, i) = z.to_f64s();
            assert!((r - re).abs() < 1e-12 && (i - im).abs() < 1e-12, "{s}");
        }
        assert!(parse_complex("zzz", p).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let a = BigComplex::from_f64s(0.1, -2.75, 256);
        let s = serde_json::to_string(&a).unwrap();
        let b: BigComplex = serde_json::from_str(&s).unwrap();
        assert!(a.dist_f64(&b) < 1e-70);
        assert_eq!(b.precision(), 256);
    }
}
