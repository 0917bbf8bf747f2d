//! Matrices, the extended plane, the Moebius action and the slash operator.
//!
//! Moebius equality is projective: m and lambda*m act identically for
//! lambda != 0. Projective comparisons normalize the largest-modulus entry
//! to 1 and compare entrywise, which avoids dividing by near-zero entries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{BigComplex, Jet};

/// A point of the Riemann sphere: infinity is first-class, so cross-ratio
/// fitting and pole values stay clean.
#[derive(Clone, Debug)]
pub enum ExtPoint {
    Finite(BigComplex),
    Infinity,
}

impl ExtPoint {
    pub fn finite(z: BigComplex) -> Self {
        ExtPoint::Finite(z)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ExtPoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<&BigComplex> {
        match self {
            ExtPoint::Finite(z) => Some(z),
            ExtPoint::Infinity => None,
        }
    }

    /// Chordal (Riemann-sphere) distance, in which infinity is an ordinary
    /// point: d(w1, w2) = 2|w1 - w2| / sqrt((1+|w1|^2)(1+|w2|^2)).
    pub fn chordal(&self, other: &ExtPoint) -> f64 {
        use crate::numerics::real::to_f64;
        match (self, other) {
            (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
            (ExtPoint::Finite(z), ExtPoint::Infinity) | (ExtPoint::Infinity, ExtPoint::Finite(z)) => {
                let n = to_f64(&z.abs_sq());
                2.0 / (1.0 + n).sqrt()
            }
            (ExtPoint::Finite(a), ExtPoint::Finite(b)) => {
                let na = to_f64(&a.abs_sq());
                let nb = to_f64(&b.abs_sq());
                let d = to_f64(&a.sub(b).abs());
                2.0 * d / ((1.0 + na) * (1.0 + nb)).sqrt()
            }
        }
    }
}

impl From<BigComplex> for ExtPoint {
    fn from(z: BigComplex) -> Self {
        ExtPoint::Finite(z)
    }
}

/// Row-major 2x2 complex matrix.
#[derive(Clone, Debug, Serialize)]
pub struct Mat2 {
    pub a: BigComplex,
    pub b: BigComplex,
    pub c: BigComplex,
    pub d: BigComplex,
}

impl Mat2 {
    pub fn new(a: BigComplex, b: BigComplex, c: BigComplex, d: BigComplex) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(p: usize) -> Self {
        Mat2::new(
            BigComplex::one(p),
            BigComplex::zero(p),
            BigComplex::zero(p),
            BigComplex::one(p),
        )
    }

    pub fn from_i64s(a: i64, b: i64, c: i64, d: i64, p: usize) -> Self {
        Mat2::new(
            BigComplex::from_i64s(a, 0, p),
            BigComplex::from_i64s(b, 0, p),
            BigComplex::from_i64s(c, 0, p),
            BigComplex::from_i64s(d, 0, p),
        )
    }

    pub fn det(&self) -> BigComplex {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn trace(&self) -> BigComplex {
        self.a.add(&self.d)
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a.mul(&rhs.a).add(&self.b.mul(&rhs.c)),
            self.a.mul(&rhs.b).add(&self.b.mul(&rhs.d)),
            self.c.mul(&rhs.a).add(&self.d.mul(&rhs.c)),
            self.c.mul(&rhs.b).add(&self.d.mul(&rhs.d)),
        )
    }

    pub fn scale(&self, s: &BigComplex) -> Mat2 {
        Mat2::new(self.a.mul(s), self.b.mul(s), self.c.mul(s), self.d.mul(s))
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let inv = det.inv()?;
        Ok(Mat2::new(
            self.d.mul(&inv),
            self.b.neg().mul(&inv),
            self.c.neg().mul(&inv),
            self.a.mul(&inv),
        ))
    }

    /// Matrix-vector product on a 2-vector.
    pub fn apply_vec(&self, v: &[BigComplex; 2]) -> [BigComplex; 2] {
        [
            self.a.mul(&v[0]).add(&self.b.mul(&v[1])),
            self.c.mul(&v[0]).add(&self.d.mul(&v[1])),
        ]
    }

    /// Linear fractional action on the extended plane.
    pub fn apply(&self, z: &ExtPoint) -> Result<ExtPoint> {
        if self.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(match z {
            ExtPoint::Infinity => {
                if self.c.is_zero() {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a.div(&self.c)?)
                }
            }
            ExtPoint::Finite(z) => {
                let den = self.c.mul(z).add(&self.d);
                if den.is_zero() {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a.mul(z).add(&self.b).div(&den)?)
                }
            }
        })
    }

    /// Finite-input, finite-output action; errors at the pole.
    pub fn apply_finite(&self, z: &BigComplex) -> Result<BigComplex> {
        match self.apply(&ExtPoint::Finite(z.clone()))? {
            ExtPoint::Finite(w) => Ok(w),
            ExtPoint::Infinity => Err(Error::AutomorphyFactorZero),
        }
    }

    /// The automorphy factor cz + d.
    pub fn factor(&self, z: &BigComplex) -> BigComplex {
        self.c.mul(z).add(&self.d)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a.clone(), self.c.clone(), self.b.clone(), self.d.clone())
    }

    /// Largest entry modulus (as f64, for normalization and comparisons).
    pub fn max_abs(&self) -> f64 {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .map(|e| e.abs_f64())
            .fold(0.0, f64::max)
    }

    /// Normalizes the largest-modulus entry to 1.
    pub fn projective_normalize(&self) -> Result<Mat2> {
        let entries = [&self.a, &self.b, &self.c, &self.d];
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for (i, e) in entries.iter().enumerate() {
            let a = e.abs_f64();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if best_abs == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let inv = entries[best].inv()?;
        Ok(self.scale(&inv))
    }

    /// Entrywise max distance after normalizing each side's largest entry to 1,
    /// minimized over the residual sign; this decides projective equality.
    pub fn projective_distance(&self, other: &Mat2) -> f64 {
        let (na, nb) = match (self.projective_normalize(), other.projective_normalize()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return f64::INFINITY,
        };
        let dist = |x: &Mat2, y: &Mat2| -> f64 {
            [
                x.a.dist_f64(&y.a),
                x.b.dist_f64(&y.b),
                x.c.dist_f64(&y.c),
                x.d.dist_f64(&y.d),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        };
        dist(&na, &nb).min(dist(&na, &nb.scale(&BigComplex::from_i64s(-1, 0, nb.a.precision()))))
    }

    /// Entrywise max distance (non-projective).
    pub fn distance(&self, other: &Mat2) -> f64 {
        [
            self.a.dist_f64(&other.a),
            self.b.dist_f64(&other.b),
            self.c.dist_f64(&other.c),
            self.d.dist_f64(&other.d),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn precision(&self) -> usize {
        self.a
            .precision()
            .min(self.b.precision())
            .min(self.c.precision())
            .min(self.d.precision())
    }

    pub fn to_imat(&self) -> Option<IMat2> {
        let get = |z: &BigComplex| -> Option<i64> {
            if !z.im().is_zero() {
                return None;
            }
            let v = crate::numerics::real::to_f64(z.re());
            let r = v.round();
            // entries of group elements are modest integers; reject anything
            // that does not round-trip exactly through f64
            if (v - r).abs() == 0.0 && r.abs() < 2f64.powi(52) {
                Some(r as i64)
            } else {
                None
            }
        };
        Some(IMat2 {
            a: get(&self.a)?,
            b: get(&self.b)?,
            c: get(&self.c)?,
            d: get(&self.d)?,
        })
    }
}

/// Integer 2x2 matrix: group elements of Gamma(2) and SL2(Z) test matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IMat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IMat2 {
    pub const IDENTITY: IMat2 = IMat2 { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IMat2 { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, r: &IMat2) -> IMat2 {
        IMat2 {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }

    /// Inverse for det = +-1 matrices.
    pub fn inverse_unimodular(&self) -> IMat2 {
        let s = self.det();
        debug_assert!(s == 1 || s == -1);
        IMat2 {
            a: s * self.d,
            b: -s * self.b,
            c: -s * self.c,
            d: s * self.a,
        }
    }

    pub fn neg(&self) -> IMat2 {
        IMat2 { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn pow(&self, n: i64) -> IMat2 {
        let mut base = if n < 0 { self.inverse_unimodular() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = IMat2::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn to_mat(&self, p: usize) -> Mat2 {
        Mat2::from_i64s(self.a, self.b, self.c, self.d, p)
    }

    pub fn apply_finite(&self, z: &BigComplex) -> Result<BigComplex> {
        self.to_mat(z.precision()).apply_finite(z)
    }
}

/// F|_k gamma (z) = (cz+d)^{-k} F(gamma z) for a scalar value already sampled
/// at gamma z. Integer k uses exact integer powers, so there is no branch
/// ambiguity.
pub fn slash_value(value: &BigComplex, k: i64, gamma: &Mat2, z: &BigComplex) -> Result<BigComplex> {
    let j = gamma.factor(z);
    if j.is_zero() {
        return Err(Error::AutomorphyFactorZero);
    }
    Ok(value.mul(&j.powi(-k)?))
}

/// Weight-k slash of a scalar sampler: (cz+d)^{-k} F(gamma z).
pub fn slash_scalar(
    f: &dyn crate::sampler::FunctionSampler,
    k: i64,
    gamma: &Mat2,
    z: &BigComplex,
) -> Result<BigComplex> {
    let gz = gamma.apply_finite(z)?;
    let v = f.value(&gz)?;
    slash_value(&v, k, gamma, z)
}

/// Componentwise weight-k slash of a 2-vector sampler.
pub fn slash_vector(
    f: &dyn crate::sampler::VectorSampler,
    k: i64,
    gamma: &Mat2,
    z: &BigComplex,
) -> Result<[BigComplex; 2]> {
    let gz = gamma.apply_finite(z)?;
    let v = f.values(&gz)?;
    let j = gamma.factor(z);
    if j.is_zero() {
        return Err(Error::AutomorphyFactorZero);
    }
    let w = j.powi(-k)?;
    Ok([v[0].mul(&w), v[1].mul(&w)])
}

/// Jet at `z` of the map w -> (aw+b)/(cw+d). Exact rational expansion, no
/// finite differences.
pub fn mobius_jet(m: &Mat2, z: &BigComplex, order: usize) -> Result<Jet> {
    let zj = Jet::variable(z.clone(), order);
    let num = zj.scale(&m.a).add_scalar(&m.b);
    let den = zj.scale(&m.c).add_scalar(&m.d);
    if den.value().is_zero() {
        return Err(Error::AutomorphyFactorZero);
    }
    num.div(&den)
}

/// Matrix sending (0, 1, infinity) to the given triple; the classical
/// cross-ratio transport. Degenerate triples are rejected by the caller.
fn std_triple_to(points: &[ExtPoint; 3]) -> Result<Mat2> {
    // For finite (z1, z2, z3): M(w) = (z2 - z3) w z1 ... constructed as the
    // inverse of w -> ((w - z1)(z2 - z3)) / ((w - z3)(z2 - z1)), which maps
    // (z1, z2, z3) -> (0, 1, infinity).
    let to_std = cross_ratio_matrix(points)?;
    to_std.inverse()
}

/// Matrix of w -> ((w - z1)(z2 - z3)) / ((w - z3)(z2 - z1)), with the usual
/// limit forms when one of the points is infinity.
fn cross_ratio_matrix(points: &[ExtPoint; 3]) -> Result<Mat2> {
    use ExtPoint::*;
    let p = points
        .iter()
        .filter_map(|q| q.as_finite().map(|z| z.precision()))
        .min()
        .unwrap_or(crate::numerics::DEFAULT_PRECISION);
    let one = BigComplex::one(p);
    let zero = BigComplex::zero(p);
    match points {
        [Finite(z1), Finite(z2), Finite(z3)] => {
            let d23 = z2.sub(z3);
            let d21 = z2.sub(z1);
            Ok(Mat2::new(
                d23.clone(),
                z1.mul(&d23).neg(),
                d21.clone(),
                z3.mul(&d21).neg(),
            ))
        }
        [Infinity, Finite(z2), Finite(z3)] => {
            // (z2 - z3) / (w - z3)
            Ok(Mat2::new(zero, z2.sub(z3), one, z3.neg()))
        }
        [Finite(z1), Infinity, Finite(z3)] => {
            // (w - z1) / (w - z3)
            Ok(Mat2::new(one.clone(), z1.neg(), one, z3.neg()))
        }
        [Finite(z1), Finite(z2), Infinity] => {
            // (w - z1) / (z2 - z1)
            Ok(Mat2::new(one, z1.neg(), zero, z2.sub(z1)))
        }
        _ => Err(Error::DegeneratePoints),
    }
}

fn pairwise_distinct(points: &[ExtPoint; 3]) -> bool {
    for i in 0..3 {
        for j in (i + 1)..3 {
            match (&points[i], &points[j]) {
                (ExtPoint::Infinity, ExtPoint::Infinity) => return false,
                (ExtPoint::Finite(a), ExtPoint::Finite(b)) if a.equals(b) => return false,
                _ => {}
            }
        }
    }
    true
}

/// Unique Moebius map sending the three sources to the three targets,
/// normalized to det = 1 (up to overall sign). Implemented via cross-ratio
/// transport through the standard triple (0, 1, infinity).
pub fn mobius_fit(sources: &[ExtPoint; 3], targets: &[ExtPoint; 3]) -> Result<Mat2> {
    if !pairwise_distinct(sources) || !pairwise_distinct(targets) {
        return Err(Error::DegeneratePoints);
    }
    let src_to_std = cross_ratio_matrix(sources)?;
    let std_to_tgt = std_triple_to(targets)?;
    let m = std_to_tgt.mul(&src_to_std);
    let det = m.det();
    if det.is_zero() {
        return Err(Error::DegeneratePoints);
    }
    // normalize det to 1; the residual sign ambiguity is projectively irrelevant
    let s = det.sqrt().inv()?;
    Ok(m.scale(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION as P;

    #[test]
    fn identity_action() {
        let z = BigComplex::from_f64s(2.0, 3.0, P);
        let id = Mat2::identity(P);
        let w = id.apply_finite(&z).unwrap();
        assert!(w.dist_f64(&z) == 0.0);
    }

    #[test]
    fn inversion_fixes_i() {
        let s = Mat2::from_i64s(0, -1, 1, 0, P);
        let i = BigComplex::i(P);
        let w = s.apply_finite(&i).unwrap();
        assert!(w.dist_f64(&i) < 1e-70);
    }

    #[test]
    fn translation() {
        let t = Mat2::from_i64s(1, 1, 0, 1, P);
        let i = BigComplex::i(P);
        let w = t.apply_finite(&i).unwrap();
        assert!(w.dist_f64(&BigComplex::from_i64s(1, 1, P)) < 1e-70);
    }

    #[test]
    fn infinity_handling() {
        let m = Mat2::from_i64s(2, 1, 1, 1, P);
        match m.apply(&ExtPoint::Infinity).unwrap() {
            ExtPoint::Finite(w) => assert!(w.dist_f64(&BigComplex::from_i64s(2, 0, P)) < 1e-70),
            _ => panic!("expected a/c"),
        }
        let pole = BigComplex::from_i64s(-1, 0, P);
        assert!(m.apply(&ExtPoint::Finite(pole)).unwrap().is_infinity());
    }

    #[test]
    fn projectivity() {
        let m = Mat2::from_i64s(2, 1, 1, 1, P);
        let lam = BigComplex::from_f64s(-0.7, 1.3, P);
        let m2 = m.scale(&lam);
        let z = BigComplex::from_f64s(0.3, 0.9, P);
        let w1 = m.apply_finite(&z).unwrap();
        let w2 = m2.apply_finite(&z).unwrap();
        assert!(w1.dist_f64(&w2) < 1e-70);
        assert!(m.projective_distance(&m2) < 1e-70);
    }

    #[test]
    fn fit_three_fixed_points_is_identity() {
        let zero = ExtPoint::finite(BigComplex::zero(P));
        let one = ExtPoint::finite(BigComplex::one(P));
        let pts = [zero, one, ExtPoint::Infinity];
        let m = mobius_fit(&pts, &pts).unwrap();
        assert!(m.projective_distance(&Mat2::identity(P)) < 1e-70);
    }

    #[test]
    fn fit_three_cycle_reapplies() {
        let zero = ExtPoint::finite(BigComplex::zero(P));
        let one = ExtPoint::finite(BigComplex::one(P));
        let inf = ExtPoint::Infinity;
        let m = mobius_fit(
            &[zero.clone(), one.clone(), inf.clone()],
            &[one.clone(), inf.clone(), zero.clone()],
        )
        .unwrap();
        for (s, t) in [(&zero, &one), (&one, &inf), (&inf, &zero)] {
            let img = m.apply(s).unwrap();
            assert!(img.chordal(t) < 1e-70);
        }
    }

    #[test]
    fn fit_recovers_matrix_projectively() {
        let m0 = Mat2::from_i64s(2, 1, 1, 1, P);
        let zero = ExtPoint::finite(BigComplex::zero(P));
        let one = ExtPoint::finite(BigComplex::one(P));
        let inf = ExtPoint::Infinity;
        let srcs = [zero, one, inf];
        let tgts = [
            m0.apply(&srcs[0]).unwrap(),
            m0.apply(&srcs[1]).unwrap(),
            m0.apply(&srcs[2]).unwrap(),
        ];
        let m = mobius_fit(&srcs, &tgts).unwrap();
        assert!(m.projective_distance(&m0) < 1e-70);
        let det = m.det();
        assert!(det.dist_f64(&BigComplex::one(P)) < 1e-70);
    }

    #[test]
    fn fit_rejects_degenerate() {
        let zero = ExtPoint::finite(BigComplex::zero(P));
        let one = ExtPoint::finite(BigComplex::one(P));
        let pts = [zero.clone(), zero.clone(), one.clone()];
        assert!(matches!(
            mobius_fit(&pts, &[zero, one, ExtPoint::Infinity]),
            Err(Error::DegeneratePoints)
        ));
    }

    #[test]
    fn chordal_metric() {
        let big = ExtPoint::finite(BigComplex::from_f64s(1e12, 0.0, P));
        assert!(big.chordal(&ExtPoint::Infinity) < 1e-11);
        let a = ExtPoint::finite(BigComplex::zero(P));
        assert!((a.chordal(&ExtPoint::Infinity) - 2.0).abs() < 1e-12);
    }
}
