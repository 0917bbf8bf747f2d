//! q-expansions of the classical scalar modular forms and of the modular
//! lambda function.
//!
//! Conventions:
//! - E2, E4, E6, Delta, j expand in q = e^{2 pi i z} with the divisor-sum /
//!   eta-product integer coefficients (E4 = 1 + 240 q + 2160 q^2 + ...,
//!   Delta = q prod (1-q^n)^24, j = E4^3 / Delta).
//! - lambda expands in the half nome u = q^{1/2} = e^{pi i z} as the theta
//!   quotient theta_2^4 / theta_3^4 = 16u - 128u^2 + 704u^3 - ..., so that
//!   lambda(i inf) = 0, lambda(0) = 1, lambda(1) = inf and lambda is
//!   Gamma(2)-invariant.
//!
//! Coefficients are generated once in exact integer arithmetic and cached per
//! (form, truncation); evaluation is a partial sum at working precision with
//! a crude geometric-majorant tail bound. The bound is returned whenever the
//! majorant ratio test passes (always for Im z >= 1/2) and omitted otherwise.
//! Jets come from the termwise derivative (mu n)^k / k! factors, so a jet of
//! order N costs O(T N) scalar operations.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use astro_float::BigFloat;
use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numerics::real;
use crate::numerics::{BigComplex, Jet};
use crate::sampler::{DomainHint, FunctionSampler};

/// Default number of retained q-powers.
pub const DEFAULT_TRUNCATION: usize = 200;
const MAX_TRUNCATION: usize = 24_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum FormName {
    E2,
    E4,
    E6,
    Delta,
    J,
    Lambda,
}

impl FormName {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e2" => Ok(FormName::E2),
            "e4" => Ok(FormName::E4),
            "e6" => Ok(FormName::E6),
            "delta" => Ok(FormName::Delta),
            "j" => Ok(FormName::J),
            "lambda" => Ok(FormName::Lambda),
            other => Err(Error::InvalidInput(format!("unknown form `{other}`"))),
        }
    }

    pub fn weight(&self) -> i64 {
        match self {
            FormName::E2 => 2,
            FormName::E4 => 4,
            FormName::E6 => 6,
            FormName::Delta => 12,
            FormName::J | FormName::Lambda => 0,
        }
    }

    /// Exponent of the leading retained power.
    pub fn valuation(&self) -> i64 {
        match self {
            FormName::Delta | FormName::Lambda => 1,
            FormName::J => -1,
            _ => 0,
        }
    }

    /// True when the expansion variable is the half nome u = e^{pi i z}.
    pub fn half_nome(&self) -> bool {
        matches!(self, FormName::Lambda)
    }

    pub fn label(&self) -> &'static str {
        match self {
            FormName::E2 => "E2",
            FormName::E4 => "E4",
            FormName::E6 => "E6",
            FormName::Delta => "Delta",
            FormName::J => "j",
            FormName::Lambda => "lambda",
        }
    }
}

// ------------------------------------------------------------ integer series

fn series_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::from(0); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.sign() == num_bigint::Sign::NoSign {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn series_pow(a: &[BigInt], mut e: u32, len: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::from(0); len];
    acc[0] = BigInt::from(1);
    let mut sq = a.to_vec();
    sq.resize(len, BigInt::from(0));
    while e > 0 {
        if e & 1 == 1 {
            acc = series_mul(&acc, &sq, len);
        }
        e >>= 1;
        if e > 0 {
            sq = series_mul(&sq, &sq, len);
        }
    }
    acc
}

/// Exact division a / b for a unit series (b[0] = 1).
fn series_div_unit(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    assert!(b[0] == BigInt::from(1));
    let mut out = vec![BigInt::from(0); len];
    for k in 0..len {
        let mut acc = if k < a.len() { a[k].clone() } else { BigInt::from(0) };
        for j in 1..=k.min(b.len() - 1) {
            acc -= &b[j] * &out[k - j];
        }
        out[k] = acc;
    }
    out
}

fn divisor_power_sums(exp: u32, len: usize) -> Vec<BigInt> {
    // sigma_exp(n) for n = 0..len-1 (entry 0 unused)
    let mut s = vec![BigInt::from(0); len];
    for d in 1..len {
        let dp = BigInt::from(d).pow(exp);
        let mut m = d;
        while m < len {
            s[m] += &dp;
            m += d;
        }
    }
    s
}

/// prod_{n>=1} (1 - x^{step n}) via the pentagonal number theorem.
fn euler_product(step: usize, len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::from(0); len];
    out[0] = BigInt::from(1);
    let mut k: i64 = 1;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let mut placed = false;
        for e in [e1, e2] {
            let idx = (e as usize).checked_mul(step);
            if let Some(idx) = idx {
                if idx < len {
                    out[idx] += sign;
                    placed = true;
                }
            }
        }
        if !placed {
            break;
        }
        k += 1;
    }
    out
}

/// Coefficients of the form from its valuation up to exponent `truncation`.
fn generate_coefficients(name: FormName, truncation: usize) -> Vec<BigInt> {
    let len = truncation + 1; // exponents 0..=T in the underlying nome
    match name {
        FormName::E2 | FormName::E4 | FormName::E6 => {
            let (exp, mult) = match name {
                FormName::E2 => (1u32, -24i64),
                FormName::E4 => (3, 240),
                _ => (5, -504),
            };
            let s = divisor_power_sums(exp, len);
            let mut out: Vec<BigInt> = s.into_iter().map(|v| v * mult).collect();
            out[0] = BigInt::from(1);
            out
        }
        FormName::Delta => {
            // Delta / q = prod (1-q^n)^24; retained exponents 1..=T
            let eta = euler_product(1, len);
            let mut v = series_pow(&eta, 24, len);
            v.truncate(truncation.max(1));
            v
        }
        FormName::J => {
            // j = q^{-1} E4^3 / (Delta / q); retained exponents -1..=T
            let e4 = generate_coefficients(FormName::E4, truncation + 1);
            let e4cubed = series_pow(&e4, 3, len + 1);
            // entries of Delta are tau(1).. so they read as the Delta/q series
            let delta_over_q = generate_coefficients(FormName::Delta, truncation + 2);
            series_div_unit(&e4cubed, &delta_over_q, len + 1)
        }
        FormName::Lambda => {
            // theta_2^4 = 16 u (sum_{n>=0} u^{n(n+1)})^4, theta_3 = 1 + 2 sum u^{n^2}
            let mut s2 = vec![BigInt::from(0); len];
            let mut n = 0usize;
            while n * (n + 1) < len {
                s2[n * (n + 1)] += 1;
                n += 1;
            }
            let mut t3 = vec![BigInt::from(0); len];
            t3[0] = BigInt::from(1);
            let mut n = 1usize;
            while n * n < len {
                t3[n * n] += 2;
                n += 1;
            }
            let num = series_pow(&s2, 4, len);
            let den = series_pow(&t3, 4, len);
            let mut q = series_div_unit(&num, &den, len);
            q.truncate(truncation.max(1));
            // multiply by 16; the shift by u^1 is the valuation
            q.into_iter().map(|v| v * 16).collect()
        }
    }
}

struct CoeffTable {
    /// Coefficients for exponents valuation ..= truncation.
    ints: Vec<BigInt>,
    /// log2 |coefficient| (-inf for zeros), same indexing.
    log2: Vec<f64>,
}

fn coeff_table(name: FormName, truncation: usize) -> Arc<CoeffTable> {
    static CACHE: OnceLock<Mutex<HashMap<(FormName, usize), Arc<CoeffTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(name, truncation)) {
        return t.clone();
    }
    let ints = generate_coefficients(name, truncation);
    let log2 = ints
        .iter()
        .map(|v| {
            if v.sign() == num_bigint::Sign::NoSign {
                f64::NEG_INFINITY
            } else {
                let bits = v.bits();
                // refine the leading bits for a tighter estimate
                let mag = v.magnitude();
                let top = if bits > 64 {
                    let shifted = mag >> (bits - 53);
                    shifted.to_u64_digits().first().copied().unwrap_or(0) as f64
                        * 2f64.powi(bits as i32 - 53)
                } else {
                    mag.to_u64_digits().first().copied().unwrap_or(0) as f64
                };
                top.log2()
            }
        })
        .collect();
    let table = Arc::new(CoeffTable { ints, log2 });
    cache
        .lock()
        .unwrap()
        .insert((name, truncation), table.clone());
    table
}

/// Coefficient table lifted to floats at a bucketed working precision.
fn float_table(name: FormName, truncation: usize, wp: usize) -> Arc<Vec<BigFloat>> {
    static CACHE: OnceLock<Mutex<HashMap<(FormName, usize, usize), Arc<Vec<BigFloat>>>>> =
        OnceLock::new();
    let bucket = wp.next_multiple_of(64);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(name, truncation, bucket)) {
        return t.clone();
    }
    let ints = &coeff_table(name, truncation).ints;
    let vals: Vec<BigFloat> = ints
        .iter()
        .map(|v| match i128::try_from(v) {
            Ok(small) => BigFloat::from_i128(small, bucket),
            Err(_) => real::parse(&v.to_string(), bucket).expect("integer decimal"),
        })
        .collect();
    let table = Arc::new(vals);
    cache
        .lock()
        .unwrap()
        .insert((name, truncation, bucket), table.clone());
    table
}

/// Expose exact integer coefficients (exponents valuation ..= truncation).
pub fn coefficients(name: FormName, truncation: usize) -> Vec<BigInt> {
    coeff_table(name, truncation).ints.clone()
}

// --------------------------------------------------------------- tail bounds

enum Majorant {
    /// |a_n| <= c * n^p for all n past the retained range.
    Poly { c: f64, p: f64 },
    /// |a_n| <= c * exp(a sqrt(n)).
    SubExp { c: f64, a: f64 },
}

fn majorant(name: FormName) -> Majorant {
    match name {
        FormName::E2 => Majorant::Poly { c: 24.0, p: 2.0 },
        FormName::E4 => Majorant::Poly { c: 240.0, p: 4.0 },
        FormName::E6 => Majorant::Poly { c: 504.0, p: 6.0 },
        FormName::Delta => Majorant::Poly { c: 1.0, p: 7.0 },
        FormName::J => Majorant::SubExp { c: 1.0, a: 4.0 * std::f64::consts::PI },
        FormName::Lambda => Majorant::SubExp { c: 16.0, a: 4.0 * std::f64::consts::PI },
    }
}

/// log2 of the tail bound for the order-k jet coefficient series
/// sum_{n>T} a_n (mu n)^k / k! x^n, or None when the majorant ratio
/// reaches 1. `log2_x` is log2 |x|, `mu_abs` is |mu| (2 pi or pi).
fn tail_log2(name: FormName, t: usize, log2_x: f64, k: usize, mu_abs: f64) -> Option<f64> {
    if log2_x >= 0.0 {
        return None;
    }
    let ln2 = std::f64::consts::LN_2;
    let t1 = (t + 1) as f64;
    // prefactor (mu (T+1))^k / k!
    let mut pref = 0.0f64;
    for j in 1..=k {
        pref += (mu_abs * t1 / j as f64).log2();
    }
    let (cst, growth, ratio_ln) = match majorant(name) {
        Majorant::Poly { c, p } => (
            c.log2(),
            p * t1.log2(),
            log2_x * ln2 + (p + k as f64) / t1,
        ),
        Majorant::SubExp { c, a } => (
            c.log2(),
            a * t1.sqrt() / ln2,
            log2_x * ln2 + a / (2.0 * t1.sqrt()) + k as f64 / t1,
        ),
    };
    if ratio_ln >= -1e-9 {
        return None;
    }
    let r = ratio_ln.exp();
    Some(cst + growth + pref + t1 * log2_x - (1.0 - r).log2())
}

/// Smallest truncation >= `base` whose tail bound beats `target_log2`.
fn adaptive_truncation(
    name: FormName,
    base: usize,
    log2_x: f64,
    target_log2: f64,
    order: usize,
    mu_abs: f64,
) -> Result<usize> {
    let mut t = base.max(10);
    loop {
        let worst = (0..=order)
            .map(|k| tail_log2(name, t, log2_x, k, mu_abs))
            .try_fold(f64::NEG_INFINITY, |acc, b| b.map(|b| acc.max(b)));
        if let Some(worst) = worst {
            if worst <= target_log2 {
                return Ok(t);
            }
        }
        if t >= MAX_TRUNCATION {
            return Err(Error::SeriesDivergence);
        }
        t = ((t as f64 * 1.4142) as usize + 1).min(MAX_TRUNCATION);
    }
}

// ---------------------------------------------------------------- evaluation

pub struct TailInfo {
    /// log2 of the value tail bound (None when the majorant does not apply).
    pub value_log2: Option<f64>,
    /// Worst log2 tail over all requested jet coefficients.
    pub jet_log2: Option<f64>,
    /// Truncation actually used.
    pub truncation: usize,
}

impl TailInfo {
    pub fn value_bound(&self) -> Option<BigFloat> {
        self.value_log2.map(|b| real::pow2(b.ceil() as i64, 64))
    }
}

/// Jet of the form at z (order 0 = plain value) together with tail data.
/// With `adaptive` set, the requested truncation is raised until the tail
/// sinks below the rounding floor of the working precision; plain partial
/// sums keep the caller's truncation and may come back without a bound.
pub fn eval_jet(
    name: FormName,
    z: &BigComplex,
    truncation: usize,
    order: usize,
    adaptive: bool,
) -> Result<(Jet, TailInfo)> {
    if !z.im().is_positive() || z.im().is_zero() {
        return Err(Error::NotInUpperHalfPlane);
    }
    let p = z.precision();
    let im = real::to_f64(z.im());
    let mu_abs = if name.half_nome() { std::f64::consts::PI } else { 2.0 * std::f64::consts::PI };
    let log2_x = -mu_abs * im / std::f64::consts::LN_2;

    // choose truncation: tail below the rounding floor with margin when possible
    let target = -((p + 32) as f64);
    let t_used = if adaptive {
        match adaptive_truncation(name, truncation, log2_x, target, order, mu_abs) {
            Ok(t) => t,
            Err(_) => MAX_TRUNCATION,
        }
    } else {
        truncation.max(2)
    };

    // cancellation estimate: the largest term over all retained (n, k)
    // against the leading value term; high-order jet coefficients cancel
    // far more than the value does
    let table = coeff_table(name, t_used);
    let val = name.valuation();
    let log2_mu = mu_abs.log2();
    let mut peak = f64::NEG_INFINITY;
    for (i, l2) in table.log2.iter().enumerate() {
        if !l2.is_finite() {
            continue;
        }
        let n = val + i as i64;
        let base = l2 + n as f64 * log2_x;
        peak = peak.max(base);
        if order > 0 && n > 0 {
            // factor (mu n)^k / k! in log2, accumulated over k
            let mut fac = 0.0f64;
            for k in 1..=order {
                fac += log2_mu + (n as f64).log2() - (k as f64).log2();
                peak = peak.max(base + fac);
            }
        }
    }
    let lead = table.log2[0] + val as f64 * log2_x;
    let boost = ((peak - lead.max(0.0)).max(0.0).ceil() as usize).min(768);
    let wp = p + boost + 32;

    let floats = float_table(name, t_used, wp);
    let zw = z.with_precision(wp);
    // mu = i * mu_abs with mu_abs = pi or 2 pi (exact pi at wp)
    let pi = real::pi(wp);
    let mu_im = if name.half_nome() {
        pi
    } else {
        let mut two_pi = pi;
        two_pi.set_exponent(two_pi.exponent().unwrap() + 1);
        two_pi
    };
    let mu = BigComplex::new(BigFloat::from_i64(0, wp), mu_im, wp);
    let w = mu.mul(&zw).exp();

    let mut coeffs = vec![BigComplex::zero(wp); order + 1];
    let mut pw = match val {
        -1 => w.inv()?,
        0 => BigComplex::one(wp),
        1 => w.clone(),
        _ => w.powi(val)?,
    };
    let cutoff = -((wp + 16) as f64);
    for (i, a) in floats.iter().enumerate() {
        let n = val + i as i64;
        if table.log2[i] > f64::NEG_INFINITY {
            // early exit once every remaining term plus the tail is below noise
            let here = table.log2[i] + n as f64 * log2_x;
            if here < cutoff && n > 2 {
                if let Some(rest) = tail_log2(name, (n - 1) as usize, log2_x, order, mu_abs) {
                    if rest < cutoff {
                        break;
                    }
                }
            }
            let base_term = pw.mul_real(a);
            coeffs[0] = coeffs[0].add(&base_term);
            if order > 0 {
                let mun = mu.mul_i64(n);
                let mut acc = base_term;
                for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
                    acc = acc.mul(&mun).mul(&BigComplex::from_ratio(1, k as i64, wp));
                    *c = c.add(&acc);
                }
            }
        }
        if i + 1 < floats.len() {
            pw = pw.mul(&w);
        }
    }

    let jet = Jet::new(
        z.clone(),
        coeffs.into_iter().map(|c| c.with_precision(p)).collect(),
    );
    let value_log2 = tail_log2(name, t_used, log2_x, 0, mu_abs);
    let jet_log2 = (0..=order)
        .map(|k| tail_log2(name, t_used, log2_x, k, mu_abs))
        .try_fold(f64::NEG_INFINITY, |acc, b| b.map(|v| acc.max(v)));
    Ok((
        jet,
        TailInfo { value_log2, jet_log2, truncation: t_used },
    ))
}

/// Partial-sum evaluation: the value and a crude tail bound. The bound is
/// absent (never wrong) when Im z is too small for the majorant.
pub fn eval_form(
    name: FormName,
    z: &BigComplex,
    truncation: usize,
) -> Result<(BigComplex, Option<BigFloat>)> {
    let (jet, tail) = eval_jet(name, z, truncation, 0, false)?;
    Ok((jet.value().clone(), tail.value_bound()))
}

// ------------------------------------------------------------------ samplers

/// A q-expansion form as a black-box analytic function on the upper
/// half-plane.
pub struct QFormSampler {
    pub name: FormName,
    pub truncation: usize,
}

impl QFormSampler {
    pub fn new(name: FormName) -> Self {
        QFormSampler { name, truncation: DEFAULT_TRUNCATION }
    }
}

impl FunctionSampler for QFormSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        Ok(eval_jet(self.name, z, self.truncation, order, true)?.0)
    }

    fn domain_hint(&self) -> DomainHint {
        DomainHint::upper_half_plane()
    }

    fn describe(&self) -> String {
        self.name.label().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION as P;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn classical_coefficients() {
        assert_eq!(coefficients(FormName::E4, 5), ints(&[1, 240, 2160, 6720, 17520, 30240]));
        assert_eq!(coefficients(FormName::E6, 4), ints(&[1, -504, -16632, -122976, -532728]));
        assert_eq!(coefficients(FormName::E2, 5), ints(&[1, -24, -72, -96, -168, -144]));
        assert_eq!(
            coefficients(FormName::Delta, 7),
            ints(&[1, -24, 252, -1472, 4830, -6048, -16744])
        );
        assert_eq!(
            coefficients(FormName::J, 3),
            ints(&[1, 744, 196884, 21493760, 864299970])
        );
        assert_eq!(
            coefficients(FormName::Lambda, 6),
            ints(&[16, -128, 704, -3072, 11488, -38400])
        );
    }

    #[test]
    fn lambda_matches_eta_quotient() {
        // lambda = 16u prod (1-u^n)^8 (1-u^{4n})^16 / (1-u^{2n})^24
        let t = 60usize;
        let len = t + 1;
        let e1 = euler_product(1, len);
        let e2 = euler_product(2, len);
        let e4 = euler_product(4, len);
        let num = series_mul(&series_pow(&e1, 8, len), &series_pow(&e4, 16, len), len);
        let den = series_pow(&e2, 24, len);
        let qt: Vec<BigInt> = series_div_unit(&num, &den, len)
            .into_iter()
            .map(|v| v * 16)
            .collect();
        let direct = coefficients(FormName::Lambda, t);
        assert_eq!(&qt[..len - 1], &direct[..len - 1]);
    }

    #[test]
    fn majorants_hold_on_computable_range() {
        for name in [
            FormName::E2,
            FormName::E4,
            FormName::E6,
            FormName::Delta,
            FormName::J,
            FormName::Lambda,
        ] {
            let t = coeff_table(name, 400);
            for (i, l2) in t.log2.iter().enumerate() {
                let n = name.valuation() + i as i64;
                if n < 1 {
                    continue;
                }
                let bound = match majorant(name) {
                    Majorant::Poly { c, p } => c.log2() + p * (n as f64).log2(),
                    Majorant::SubExp { c, a } => {
                        c.log2() + a * (n as f64).sqrt() / std::f64::consts::LN_2
                    }
                };
                assert!(
                    *l2 <= bound + 1e-9,
                    "{name:?} coefficient {n} exceeds its majorant"
                );
            }
        }
    }

    #[test]
    fn j_at_i_is_1728() {
        let z = BigComplex::i(P);
        let (v, bound) = eval_form(FormName::J, &z, DEFAULT_TRUNCATION).unwrap();
        let expect = BigComplex::from_i64s(1728, 0, P);
        assert!(v.dist_f64(&expect) < 1e-60, "j(i) = {v:?}");
        assert!(real::to_f64(&bound.unwrap()).abs() < 1e-60);
    }

    #[test]
    fn e4_vanishes_at_order_three_point() {
        // z = e^{2 pi i / 3} = -1/2 + i sqrt(3)/2
        let half = BigComplex::from_ratio(-1, 2, P);
        let s3 = BigComplex::from_i64s(3, 0, P).sqrt();
        let z = half.add(&s3.mul(&BigComplex::from_ratio(1, 2, P)).mul_i());
        let (v, _) = eval_form(FormName::E4, &z, DEFAULT_TRUNCATION).unwrap();
        assert!(v.abs_f64() < 1e-60, "E4(zeta_3) = {v:?}");
    }

    #[test]
    fn lambda_at_i_is_half() {
        let z = BigComplex::i(P);
        let (v, _) = eval_form(FormName::Lambda, &z, DEFAULT_TRUNCATION).unwrap();
        assert!(v.dist_f64(&BigComplex::from_ratio(1, 2, P)) < 1e-60, "lambda(i) = {v:?}");
    }

    #[test]
    fn rejects_lower_half_plane() {
        let z = BigComplex::from_f64s(0.0, -1.0, P);
        assert!(matches!(
            eval_form(FormName::J, &z, 100),
            Err(Error::NotInUpperHalfPlane)
        ));
    }

    #[test]
    fn jet_matches_finite_difference_direction() {
        // first derivative of E4 at i against a central difference at lower precision
        let z = BigComplex::i(P);
        let (jet, _) = eval_jet(FormName::E4, &z, DEFAULT_TRUNCATION, 2, false).unwrap();
        let h = BigComplex::from_f64s(1e-8, 0.0, P);
        let zp = z.add(&h);
        let zm = z.sub(&h);
        let (vp, _) = eval_form(FormName::E4, &zp, DEFAULT_TRUNCATION).unwrap();
        let (vm, _) = eval_form(FormName::E4, &zm, DEFAULT_TRUNCATION).unwrap();
        let fd = vp.sub(&vm).div(&h.mul_i64(2)).unwrap();
        assert!(jet.coeff(1).dist_f64(&fd) < 1e-6);
    }

    #[test]
    fn low_im_loses_bound_but_returns_value() {
        let z = BigComplex::from_f64s(0.1, 0.001, P);
        // truncation far too small for convergence contract: majorant fails
        let (_, bound) = eval_form(FormName::E4, &z, 50).unwrap();
        assert!(bound.is_none());
    }
}
