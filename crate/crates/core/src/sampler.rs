//! Black-box analytic functions queried through jets.
//!
//! Every meromorphic function the toolkit quantifies over enters through
//! `FunctionSampler`: a map from (point, order) to the Taylor jet there,
//! plus a hint describing where the function is known to be singular. Jets
//! of the requested base and order come back or an error does; repeated
//! queries at the same point agree to working precision.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::moebius::{mobius_jet, ExtPoint, Mat2};
use crate::numerics::{BigComplex, Jet};

/// Where a sampler is known to break down. The continuation engine uses this
/// as its step-radius hint: the usable disk at z has radius
/// min(distance to each singular point, Im z when the natural boundary is
/// the real axis).
#[derive(Clone, Debug, Default)]
pub struct DomainHint {
    pub singular_points: Vec<BigComplex>,
    /// Function lives on the upper half-plane with natural boundary R.
    pub upper_half_plane: bool,
}

impl DomainHint {
    pub fn entire() -> Self {
        DomainHint::default()
    }

    pub fn punctured(points: Vec<BigComplex>) -> Self {
        DomainHint { singular_points: points, upper_half_plane: false }
    }

    pub fn upper_half_plane() -> Self {
        DomainHint { singular_points: Vec::new(), upper_half_plane: true }
    }

    /// Conservative radius of analyticity at z (f64 scale; None = unbounded).
    pub fn radius_at(&self, z: &BigComplex) -> Option<f64> {
        let mut r: Option<f64> = None;
        for s in &self.singular_points {
            let d = z.sub(s).abs_f64();
            r = Some(r.map_or(d, |v: f64| v.min(d)));
        }
        if self.upper_half_plane {
            let d = crate::numerics::real::to_f64(z.im());
            r = Some(r.map_or(d, |v: f64| v.min(d)));
        }
        r
    }
}

/// Which chart a projective jet lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// The jet expands the function itself.
    Direct,
    /// The jet expands 1/f (used across poles of f).
    Inverted,
}

pub trait FunctionSampler: Send + Sync {
    /// Taylor jet at `z` with the exact requested order.
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet>;

    fn describe(&self) -> String {
        "sampler".into()
    }

    fn domain_hint(&self) -> DomainHint {
        DomainHint::entire()
    }

    /// Plain value; poles surface as errors unless `value_ext` is used.
    fn value(&self, z: &BigComplex) -> Result<BigComplex> {
        Ok(self.jet(z, 0)?.value().clone())
    }

    /// Extended-plane value: meromorphic samplers override this so that
    /// poles come back as the point at infinity.
    fn value_ext(&self, z: &BigComplex) -> Result<ExtPoint> {
        Ok(ExtPoint::Finite(self.value(z)?))
    }

    /// Jet in whichever chart is numerically healthy at `z`: samplers with
    /// poles override this to return the expansion of 1/f near a pole of f.
    fn projective_jet(&self, z: &BigComplex, order: usize) -> Result<(Jet, Chart)> {
        Ok((self.jet(z, order)?, Chart::Direct))
    }

    /// Structured samplers (pullbacks through a covering) can produce S(f)
    /// jets without the generic O(order^3) composition; the continuation
    /// engine consults this, everything else uses the direct route.
    fn schwarzian_jet_hook(&self, _z: &BigComplex, _order: usize) -> Option<Result<Jet>> {
        None
    }
}

pub trait VectorSampler: Send + Sync {
    /// Component jets at `z` with the exact requested order.
    fn jets(&self, z: &BigComplex, order: usize) -> Result<[Jet; 2]>;

    fn describe(&self) -> String {
        "vector sampler".into()
    }

    fn domain_hint(&self) -> DomainHint {
        DomainHint::entire()
    }

    fn values(&self, z: &BigComplex) -> Result<[BigComplex; 2]> {
        let [a, b] = self.jets(z, 0)?;
        Ok([a.value().clone(), b.value().clone()])
    }
}

// ---------------------------------------------------------------- samplers

/// The identity function z.
pub struct IdentitySampler;

impl FunctionSampler for IdentitySampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        Ok(Jet::variable(z.clone(), order))
    }

    fn describe(&self) -> String {
        "z".into()
    }
}

/// A constant function.
pub struct ConstSampler(pub BigComplex);

impl FunctionSampler for ConstSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        Ok(Jet::constant(z.clone(), self.0.with_precision(z.precision()), order))
    }

    fn describe(&self) -> String {
        format!("const {:?}", self.0)
    }
}

/// exp(z).
pub struct ExpSampler;

impl FunctionSampler for ExpSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        Ok(Jet::variable(z.clone(), order).exp())
    }

    fn describe(&self) -> String {
        "exp".into()
    }
}

/// Polynomial with the given coefficients (constant first).
pub struct PolySampler(pub Vec<BigComplex>);

impl PolySampler {
    pub fn from_i64s(coeffs: &[i64], p: usize) -> Self {
        PolySampler(coeffs.iter().map(|&c| BigComplex::from_i64s(c, 0, p)).collect())
    }
}

impl FunctionSampler for PolySampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        let zj = Jet::variable(z.clone(), order);
        let p = z.precision();
        let mut acc = Jet::constant(z.clone(), BigComplex::zero(p), order);
        for c in self.0.iter().rev() {
            acc = acc.mul(&zj)?.add_scalar(&c.with_precision(p));
        }
        Ok(acc)
    }

    fn describe(&self) -> String {
        format!("poly[{}]", self.0.len().saturating_sub(1))
    }
}

/// Rational function num(z)/den(z) with declared singular points (the
/// denominator roots are declared by the caller, not discovered).
pub struct RationalSampler {
    pub num: PolySampler,
    pub den: PolySampler,
    pub singular: Vec<BigComplex>,
}

impl RationalSampler {
    pub fn from_i64s(num: &[i64], den: &[i64], singular: Vec<BigComplex>, p: usize) -> Self {
        RationalSampler {
            num: PolySampler::from_i64s(num, p),
            den: PolySampler::from_i64s(den, p),
            singular,
        }
    }
}

impl FunctionSampler for RationalSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        let n = self.num.jet(z, order)?;
        let d = self.den.jet(z, order)?;
        n.div(&d)
    }

    fn domain_hint(&self) -> DomainHint {
        DomainHint::punctured(self.singular.clone())
    }

    fn describe(&self) -> String {
        "rational".into()
    }
}

/// The Moebius map z -> (az+b)/(cz+d).
pub struct MobiusSampler(pub Mat2);

impl FunctionSampler for MobiusSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        mobius_jet(&self.0, z, order)
    }

    fn value_ext(&self, z: &BigComplex) -> Result<ExtPoint> {
        self.0.apply(&ExtPoint::Finite(z.clone()))
    }

    fn projective_jet(&self, z: &BigComplex, order: usize) -> Result<(Jet, Chart)> {
        let den = self.0.factor(z);
        let num = self.0.a.mul(z).add(&self.0.b);
        if den.abs_f64() >= num.abs_f64() {
            Ok((self.jet(z, order)?, Chart::Direct))
        } else {
            // expand 1/f = (cz+d)/(az+b) instead
            let flipped = Mat2::new(
                self.0.c.clone(),
                self.0.d.clone(),
                self.0.a.clone(),
                self.0.b.clone(),
            );
            Ok((mobius_jet(&flipped, z, order)?, Chart::Inverted))
        }
    }

    fn describe(&self) -> String {
        "moebius".into()
    }
}

/// Ratio of two samplers (meromorphic: poles handled projectively).
pub struct RatioSampler {
    pub num: Arc<dyn FunctionSampler>,
    pub den: Arc<dyn FunctionSampler>,
}

impl FunctionSampler for RatioSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        let n = self.num.jet(z, order)?;
        let d = self.den.jet(z, order)?;
        n.div(&d)
    }

    fn value_ext(&self, z: &BigComplex) -> Result<ExtPoint> {
        let n = self.num.jet(z, 0)?;
        let d = self.den.jet(z, 0)?;
        if d.value().is_zero() {
            if n.value().is_zero() {
                return Err(Error::SamplerFailure("0/0 in ratio sampler".into()));
            }
            return Ok(ExtPoint::Infinity);
        }
        Ok(ExtPoint::Finite(n.value().div(d.value())?))
    }

    fn projective_jet(&self, z: &BigComplex, order: usize) -> Result<(Jet, Chart)> {
        let n = self.num.jet(z, order)?;
        let d = self.den.jet(z, order)?;
        if d.value().abs_f64() >= n.value().abs_f64() {
            Ok((n.div(&d)?, Chart::Direct))
        } else {
            Ok((d.div(&n)?, Chart::Inverted))
        }
    }

    fn domain_hint(&self) -> DomainHint {
        let mut h = self.num.domain_hint();
        let d = self.den.domain_hint();
        h.singular_points.extend(d.singular_points);
        h.upper_half_plane |= d.upper_half_plane;
        h
    }

    fn describe(&self) -> String {
        format!("({})/({})", self.num.describe(), self.den.describe())
    }
}

/// Post-composition alpha o f by a Moebius map (used by the projective
/// equivalence tests: S(alpha o f) = S(f)).
pub struct MobiusOfSampler {
    pub alpha: Mat2,
    pub inner: Arc<dyn FunctionSampler>,
}

impl FunctionSampler for MobiusOfSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        let f = self.inner.jet(z, order)?;
        let num = f.scale(&self.alpha.a).add_scalar(&self.alpha.b);
        let den = f.scale(&self.alpha.c).add_scalar(&self.alpha.d);
        num.div(&den)
    }

    fn domain_hint(&self) -> DomainHint {
        self.inner.domain_hint()
    }

    fn describe(&self) -> String {
        format!("moebius({})", self.inner.describe())
    }
}

/// Pre-composition f o gamma by a Moebius map, built by composing the exact
/// Moebius jet of gamma at z into f's jet at gamma z.
pub struct PrecomposedSampler {
    pub gamma: Mat2,
    pub inner: Arc<dyn FunctionSampler>,
}

impl FunctionSampler for PrecomposedSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        let gj = mobius_jet(&self.gamma, z, order)?;
        let f = self.inner.jet(gj.value(), order)?;
        Jet::compose(&f, &gj)
    }

    fn describe(&self) -> String {
        format!("{} o gamma", self.inner.describe())
    }
}

/// Pairs two scalar samplers into a 2-vector sampler.
pub struct PairSampler {
    pub first: Arc<dyn FunctionSampler>,
    pub second: Arc<dyn FunctionSampler>,
}

impl VectorSampler for PairSampler {
    fn jets(&self, z: &BigComplex, order: usize) -> Result<[Jet; 2]> {
        Ok([self.first.jet(z, order)?, self.second.jet(z, order)?])
    }

    fn domain_hint(&self) -> DomainHint {
        let mut h = self.first.domain_hint();
        let d = self.second.domain_hint();
        h.singular_points.extend(d.singular_points);
        h.upper_half_plane |= d.upper_half_plane;
        h
    }

    fn describe(&self) -> String {
        format!("({}, {})", self.first.describe(), self.second.describe())
    }
}

/// Componentwise scalar multiple (f F1, f F2) of a vector sampler: the
/// weight-shift map.
pub struct ScaledVectorSampler {
    pub scalar: Arc<dyn FunctionSampler>,
    pub vector: Arc<dyn VectorSampler>,
}

impl VectorSampler for ScaledVectorSampler {
    fn jets(&self, z: &BigComplex, order: usize) -> Result<[Jet; 2]> {
        let s = self.scalar.jet(z, order)?;
        let [a, b] = self.vector.jets(z, order)?;
        Ok([a.mul(&s)?, b.mul(&s)?])
    }

    fn domain_hint(&self) -> DomainHint {
        self.vector.domain_hint()
    }

    fn describe(&self) -> String {
        format!("{} * {}", self.scalar.describe(), self.vector.describe())
    }
}

/// Left matrix action m F on a vector sampler.
pub struct MatrixVectorSampler {
    pub matrix: Mat2,
    pub vector: Arc<dyn VectorSampler>,
}

impl VectorSampler for MatrixVectorSampler {
    fn jets(&self, z: &BigComplex, order: usize) -> Result<[Jet; 2]> {
        let [f1, f2] = self.vector.jets(z, order)?;
        Ok([
            f1.scale(&self.matrix.a).add(&f2.scale(&self.matrix.b))?,
            f1.scale(&self.matrix.c).add(&f2.scale(&self.matrix.d))?,
        ])
    }

    fn domain_hint(&self) -> DomainHint {
        self.vector.domain_hint()
    }

    fn describe(&self) -> String {
        format!("m * {}", self.vector.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION as P;

    #[test]
    fn poly_jet_values() {
        // f(z) = 1 - 2z + z^3 at z = 2: f = 5, f' = 10, f'' = 12, f''' = 6
        let f = PolySampler::from_i64s(&[1, -2, 0, 1], P);
        let z = BigComplex::from_i64s(2, 0, P);
        let j = f.jet(&z, 3).unwrap();
        for (k, v) in [(0i64, 5i64), (1, 10), (2, 12), (3, 6)].iter().map(|&(k, v)| (k, v)) {
            assert!(
                j.derivative(k as usize).dist_f64(&BigComplex::from_i64s(v, 0, P)) < 1e-60,
                "derivative {k}"
            );
        }
    }

    #[test]
    fn precompose_translation_with_exp() {
        // (exp o gamma)(z) = exp(z + 1)
        let gamma = Mat2::from_i64s(1, 1, 0, 1, P);
        let s = PrecomposedSampler { gamma, inner: Arc::new(ExpSampler) };
        let z = BigComplex::from_f64s(0.3, 0.4, P);
        let j = s.jet(&z, 4).unwrap();
        let direct = z.add(&BigComplex::one(P)).exp();
        assert!(j.value().dist_f64(&direct) < 1e-70);
        assert!(j.coeff(1).dist_f64(&direct) < 1e-70);
    }

    #[test]
    fn ratio_pole_is_infinity() {
        let num = Arc::new(ConstSampler(BigComplex::one(P)));
        let den = Arc::new(PolySampler::from_i64s(&[0, 1], P));
        let r = RatioSampler { num, den };
        let at_zero = r.value_ext(&BigComplex::zero(P)).unwrap();
        assert!(at_zero.is_infinity());
        let (j, chart) = r.projective_jet(&BigComplex::zero(P), 3).unwrap();
        assert_eq!(chart, Chart::Inverted);
        assert!(j.value().is_zero());
    }
}
