//! Truncated Taylor jets: the carrier of every derivative computed in this
//! crate (Schwarzians, Bol identities, ODE coefficients).
//!
//! A jet of order N at `base` holds coefficients c_0..c_N of
//! sum c_k (z - base)^k + O((z - base)^{N+1}); the k-th derivative at the base
//! is k! c_k. Jets are immutable values. Operations never extend the order:
//! binary operations demand equal base and order, differentiation drops one
//! order, and elementary functions truncate at the operand's order.

use super::complex::BigComplex;
use crate::error::{Error, Result};

/// Default jet order: Schwarzians need 4, Bol at r = 2 needs r + 2; 8 covers
/// every in-scope use with slack.
pub const DEFAULT_JET_ORDER: usize = 8;

#[derive(Clone, Debug)]
pub struct Jet {
    base: BigComplex,
    coeffs: Vec<BigComplex>,
}

impl Jet {
    pub fn new(base: BigComplex, coeffs: Vec<BigComplex>) -> Self {
        assert!(!coeffs.is_empty(), "a jet has at least its constant term");
        Jet { base, coeffs }
    }

    /// Jet of the constant function `value`.
    pub fn constant(base: BigComplex, value: BigComplex, order: usize) -> Self {
        let p = value.precision();
        let mut coeffs = vec![value];
        coeffs.extend((0..order).map(|_| BigComplex::zero(p)));
        Jet { base, coeffs }
    }

    /// Jet of the identity function z at `base`: c_0 = base, c_1 = 1.
    pub fn variable(base: BigComplex, order: usize) -> Self {
        let p = base.precision();
        let mut coeffs = vec![base.clone()];
        if order >= 1 {
            coeffs.push(BigComplex::one(p));
            coeffs.extend((1..order).map(|_| BigComplex::zero(p)));
        }
        Jet { base, coeffs }
    }

    pub fn base(&self) -> &BigComplex {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigComplex {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigComplex] {
        &self.coeffs
    }

    /// Value of the represented function at the base point.
    pub fn value(&self) -> &BigComplex {
        &self.coeffs[0]
    }

    /// k-th derivative at the base: k! c_k.
    pub fn derivative(&self, k: usize) -> BigComplex {
        assert!(k <= self.order());
        let mut fact = self.coeffs[k].clone();
        for j in 2..=k {
            fact = fact.mul_i64(j as i64);
        }
        fact
    }

    pub fn precision(&self) -> usize {
        self.coeffs
            .iter()
            .map(|c| c.precision())
            .chain(std::iter::once(self.base.precision()))
            .min()
            .unwrap()
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "truncation only");
        Jet {
            base: self.base.clone(),
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if !self.base.equals(&rhs.base) {
            return Err(Error::BaseMismatch);
        }
        if self.order() != rhs.order() {
            return Err(Error::OrderMismatch(self.order(), rhs.order()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(Jet {
            base: self.base.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(Jet {
            base: self.base.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Jet {
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, s: &BigComplex) -> Self {
        Jet {
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn add_scalar(&self, s: &BigComplex) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = coeffs[0].add(s);
        Jet { base: self.base.clone(), coeffs }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let n = self.order();
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[0].mul(&rhs.coeffs[k]);
            for j in 1..=k {
                acc = acc.add(&self.coeffs[j].mul(&rhs.coeffs[k - j]));
            }
            coeffs.push(acc);
        }
        Ok(Jet { base: self.base.clone(), coeffs })
    }

    /// Power-series division: c_k = (a_k - sum_{j=1..k} b_j c_{k-j}) / b_0.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        if rhs.coeffs[0].is_zero() {
            return Err(Error::DivisionByZeroConstantTerm);
        }
        let inv_b0 = rhs.coeffs[0].inv()?;
        let n = self.order();
        let mut coeffs: Vec<BigComplex> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc = acc.sub(&rhs.coeffs[j].mul(&coeffs[k - j]));
            }
            coeffs.push(acc.mul(&inv_b0));
        }
        Ok(Jet { base: self.base.clone(), coeffs })
    }

    /// Termwise derivative; the order drops by one.
    pub fn differentiate(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::OrderUnderflow);
        }
        let coeffs = (1..=self.order())
            .map(|k| self.coeffs[k].mul_i64(k as i64))
            .collect();
        Ok(Jet { base: self.base.clone(), coeffs })
    }

    /// exp composed with the jet; principal value at the constant term.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let e0 = self.coeffs[0].exp();
        let p = self.precision();
        let mut e: Vec<BigComplex> = vec![BigComplex::one(p)];
        // e' = u' e with u the zero-constant part
        for k in 1..=n {
            let mut acc = BigComplex::zero(p);
            for j in 1..=k {
                acc = acc.add(&self.coeffs[j].mul_i64(j as i64).mul(&e[k - j]));
            }
            e.push(acc.mul(&BigComplex::from_ratio(1, k as i64, p)));
        }
        Jet {
            base: self.base.clone(),
            coeffs: e.into_iter().map(|c| c.mul(&e0)).collect(),
        }
    }

    fn branch_check(&self, what: &'static str) -> Result<()> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() || (c0.im().is_zero() && c0.re().is_negative()) {
            return Err(Error::BranchCutViolation(what));
        }
        Ok(())
    }

    /// Principal log composed with the jet; the constant term must avoid (-inf, 0].
    pub fn ln(&self) -> Result<Self> {
        self.branch_check("log")?;
        let n = self.order();
        let p = self.precision();
        let l0 = self.coeffs[0].ln()?;
        let inv_c0 = self.coeffs[0].inv()?;
        // v = u / c0, log(1 + v)
        let v: Vec<BigComplex> = (0..=n)
            .map(|k| if k == 0 { BigComplex::zero(p) } else { self.coeffs[k].mul(&inv_c0) })
            .collect();
        let mut l: Vec<BigComplex> = vec![l0];
        for k in 1..=n {
            let mut acc = v[k].mul_i64(k as i64);
            for j in 1..k {
                acc = acc.sub(&l[j].mul_i64(j as i64).mul(&v[k - j]));
            }
            l.push(acc.mul(&BigComplex::from_ratio(1, k as i64, p)));
        }
        Ok(Jet { base: self.base.clone(), coeffs: l })
    }

    /// Principal square root composed with the jet.
    pub fn sqrt(&self) -> Result<Self> {
        self.branch_check("sqrt")?;
        let n = self.order();
        let s0 = self.coeffs[0].sqrt();
        let half_inv_s0 = s0.mul_i64(2).inv()?;
        let mut s: Vec<BigComplex> = vec![s0];
        for k in 1..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc = acc.sub(&s[j].mul(&s[k - j]));
            }
            s.push(acc.mul(&half_inv_s0));
        }
        Ok(Jet { base: self.base.clone(), coeffs: s })
    }

    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::DivisionByZeroConstantTerm);
        }
        Jet::constant(self.base.clone(), BigComplex::one(self.precision()), self.order()).div(self)
    }

    /// Integer power by repeated squaring; negative exponents via reciprocal.
    pub fn powi(&self, n: i64) -> Result<Self> {
        let p = self.precision();
        if n == 0 {
            return Ok(Jet::constant(self.base.clone(), BigComplex::one(p), self.order()));
        }
        let base = if n < 0 { self.reciprocal()? } else { self.clone() };
        let mut acc: Option<Jet> = None;
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq)?,
                });
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc.unwrap())
    }

    /// Composition (outer o inner) as a jet at inner's base. Requires the
    /// inner constant term to coincide with the outer expansion point.
    pub fn compose(outer: &Jet, inner: &Jet) -> Result<Jet> {
        if !inner.coeffs[0].equals(&outer.base) {
            return Err(Error::BaseMismatch);
        }
        let n = inner.order().min(outer.order());
        let p = inner.precision().min(outer.precision());
        let inner = inner.truncate(n);
        // u = inner - inner(0): zero constant term
        let mut u = inner.clone();
        u.coeffs[0] = BigComplex::zero(p);
        let mut acc = Jet::constant(inner.base.clone(), outer.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            acc = acc.mul(&u)?;
            acc.coeffs[0] = acc.coeffs[0].add(&outer.coeffs[k]);
        }
        Ok(acc)
    }

    /// Evaluate the truncated polynomial and its first derivative at base + h.
    pub fn horner(&self, h: &BigComplex) -> (BigComplex, BigComplex) {
        let n = self.order();
        let p = self.precision().min(h.precision());
        let mut v = self.coeffs[n].clone();
        let mut d = BigComplex::zero(p);
        for k in (0..n).rev() {
            d = d.mul(h).add(&v);
            v = v.mul(h).add(&self.coeffs[k]);
        }
        (v, d)
    }
}

/// Pointwise jet arithmetic in the shape of the module's operation table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetArithKind {
    Add,
    Mul,
    Div,
    Differentiate,
}

pub fn jet_arith(kind: JetArithKind, a: &Jet, b: Option<&Jet>) -> Result<Jet> {
    let need_b = || b.ok_or_else(|| Error::InvalidInput("binary jet op needs two jets".into()));
    match kind {
        JetArithKind::Add => a.add(need_b()?),
        JetArithKind::Mul => a.mul(need_b()?),
        JetArithKind::Div => a.div(need_b()?),
        JetArithKind::Differentiate => a.differentiate(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetElementaryKind {
    Exp,
    Log,
    Sqrt,
    Reciprocal,
    IntegerPow,
}

pub fn jet_elementary(kind: JetElementaryKind, a: &Jet, n: Option<i64>) -> Result<Jet> {
    match kind {
        JetElementaryKind::Exp => Ok(a.exp()),
        JetElementaryKind::Log => a.ln(),
        JetElementaryKind::Sqrt => a.sqrt(),
        JetElementaryKind::Reciprocal => a.reciprocal(),
        JetElementaryKind::IntegerPow => {
            let n = n.ok_or_else(|| Error::InvalidInput("integer_pow needs an exponent".into()))?;
            a.powi(n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z0(p: usize) -> BigComplex {
        BigComplex::zero(p)
    }

    fn poly(coeffs: &[i64], order: usize, p: usize) -> Jet {
        let mut v: Vec<BigComplex> = coeffs.iter().map(|&c| BigComplex::from_i64s(c, 0, p)).collect();
        v.resize(order + 1, BigComplex::zero(p));
        Jet::new(z0(p), v)
    }

    #[test]
    fn mul_polynomials() {
        // (1 + x)(1 - x) = 1 - x^2 at order 4
        let p = 192;
        let a = poly(&[1, 1], 4, p);
        let b = poly(&[1, -1], 4, p);
        let m = a.mul(&b).unwrap();
        let expect = [1i64, 0, -1, 0, 0];
        for (k, &e) in expect.iter().enumerate() {
            assert!(m.coeff(k).dist_f64(&BigComplex::from_i64s(e, 0, p)) < 1e-50);
        }
    }

    #[test]
    fn div_geometric() {
        // 1 / (1 - x) = 1 + x + x^2 + x^3 at order 3
        let p = 192;
        let one = poly(&[1], 3, p);
        let den = poly(&[1, -1], 3, p);
        let q = one.div(&den).unwrap();
        for k in 0..=3 {
            assert!(q.coeff(k).dist_f64(&BigComplex::one(p)) < 1e-50);
        }
    }

    #[test]
    fn differentiate_exp_series() {
        // d/dx of sum x^k/k! at order 5 is the same series at order 4
        let p = 192;
        let coeffs: Vec<BigComplex> = (0..=5)
            .map(|k| {
                let mut f = 1i64;
                for j in 2..=k {
                    f *= j;
                }
                BigComplex::from_ratio(1, f, p)
            })
            .collect();
        let e = Jet::new(z0(p), coeffs);
        let d = e.differentiate().unwrap();
        assert_eq!(d.order(), 4);
        for k in 0..=4 {
            assert!(d.coeff(k).dist_f64(e.coeff(k)) < 1e-55, "coeff {k}");
        }
        // derivative extraction: k! c_k = 1
        for k in 0..=4 {
            assert!(d.derivative(k).dist_f64(&BigComplex::one(p)) < 1e-50);
        }
    }

    #[test]
    fn exp_of_x() {
        let p = 192;
        let x = Jet::variable(z0(p), 3);
        let e = x.exp();
        let expect = [(1, 1), (1, 1), (1, 2), (1, 6)];
        for (k, &(n, d)) in expect.iter().enumerate() {
            assert!(e.coeff(k).dist_f64(&BigComplex::from_ratio(n, d, p)) < 1e-50);
        }
    }

    #[test]
    fn sqrt_of_constant_four() {
        let p = 192;
        let four = Jet::constant(z0(p), BigComplex::from_i64s(4, 0, p), 2);
        let s = four.sqrt().unwrap();
        assert!(s.value().dist_f64(&BigComplex::from_i64s(2, 0, p)) < 1e-50);
        assert!(s.coeff(1).is_zero() || s.coeff(1).abs_f64() < 1e-50);
    }

    #[test]
    fn log_of_one_plus_x() {
        let p = 192;
        let a = poly(&[1, 1], 3, p);
        let l = a.ln().unwrap();
        let expect = [(0i64, 1i64), (1, 1), (-1, 2), (1, 3)];
        for (k, &(n, d)) in expect.iter().enumerate() {
            assert!(l.coeff(k).dist_f64(&BigComplex::from_ratio(n, d, p)) < 1e-50, "coeff {k}");
        }
    }

    #[test]
    fn errors_surface() {
        let p = 128;
        let a = poly(&[1, 1], 3, p);
        let b = poly(&[0, 1], 3, p);
        assert!(matches!(a.div(&b), Err(Error::DivisionByZeroConstantTerm)));
        let c = Jet::constant(BigComplex::one(p), BigComplex::one(p), 3);
        assert!(matches!(a.add(&c), Err(Error::BaseMismatch)));
        let d = poly(&[1], 0, p);
        assert!(matches!(d.differentiate(), Err(Error::OrderUnderflow)));
        let neg = poly(&[-2, 1], 3, p);
        assert!(matches!(neg.ln(), Err(Error::BranchCutViolation(_))));
        assert!(matches!(neg.sqrt(), Err(Error::BranchCutViolation(_))));
    }

    #[test]
    fn compose_linear_into_square() {
        // outer(w) = w^2 at w0 = 2; inner(z) = 2 + 3 z at 0; composite (2+3z)^2 = 4 + 12 z + 9 z^2
        let p = 192;
        let w0 = BigComplex::from_i64s(2, 0, p);
        let outer = Jet::new(
            w0.clone(),
            vec![
                BigComplex::from_i64s(4, 0, p),
                BigComplex::from_i64s(4, 0, p),
                BigComplex::one(p),
            ],
        );
        let inner = Jet::new(
            z0(p),
            vec![w0, BigComplex::from_i64s(3, 0, p), BigComplex::zero(p)],
        );
        let comp = Jet::compose(&outer, &inner).unwrap();
        let expect = [4i64, 12, 9];
        for (k, &e) in expect.iter().enumerate() {
            assert!(comp.coeff(k).dist_f64(&BigComplex::from_i64s(e, 0, p)) < 1e-50);
        }
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let p = 192;
        let a = poly(&[2, 1, -1], 5, p);
        let cube = a.mul(&a).unwrap().mul(&a).unwrap();
        let pw = a.powi(3).unwrap();
        for k in 0..=5 {
            assert!(pw.coeff(k).dist_f64(cube.coeff(k)) < 1e-45);
        }
        let inv = a.powi(-2).unwrap();
        let chk = inv.mul(&a).unwrap().mul(&a).unwrap();
        assert!(chk.value().dist_f64(&BigComplex::one(p)) < 1e-45);
    }
}
