//! 2-dimensional representations given on free generators, extended to words
//! by homomorphism, plus membership reduction for Gamma(2).
//!
//! Gamma(2) mod +-I is free on A = [[1,2],[0,1]] and B = [[1,0],[2,1]].
//! An integer matrix congruent to the identity mod 2 with det 1 is reduced
//! to a word in A, B by the Euclidean/ping-pong descent on its first column:
//! the off-diagonal parity makes every division step strict, so the descent
//! terminates at +-identity.

use std::collections::BTreeMap;

use super::mat::{IMat2, Mat2};
use super::word::GroupWord;
use crate::error::{Error, Result};

pub const GAMMA2_A: IMat2 = IMat2 { a: 1, b: 2, c: 0, d: 1 };
pub const GAMMA2_B: IMat2 = IMat2 { a: 1, b: 0, c: 2, d: 1 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Free,
    Gamma2,
}

/// A representation on named free generators.
#[derive(Clone, Debug)]
pub struct Rep {
    generator_names: Vec<String>,
    images: BTreeMap<String, Mat2>,
    kind: GroupKind,
}

impl Rep {
    pub fn new(generators: Vec<(String, Mat2)>, kind: GroupKind) -> Result<Self> {
        let mut names = Vec::new();
        let mut images = BTreeMap::new();
        for (n, m) in generators {
            if m.det().is_zero() {
                return Err(Error::SingularMatrix);
            }
            names.push(n.clone());
            images.insert(n, m);
        }
        Ok(Rep { generator_names: names, images, kind })
    }

    /// The defining representation of Gamma(2): generators map to themselves.
    pub fn gamma2_defining(p: usize) -> Self {
        Rep::new(
            vec![
                ("A".into(), GAMMA2_A.to_mat(p)),
                ("B".into(), GAMMA2_B.to_mat(p)),
            ],
            GroupKind::Gamma2,
        )
        .expect("defining rep")
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generator_names
    }

    pub fn image(&self, name: &str) -> Result<&Mat2> {
        self.images
            .get(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    /// Conjugate every generator image: g -> m^{-1} g m.
    pub fn conjugate(&self, m: &Mat2) -> Result<Rep> {
        let minv = m.inverse()?;
        let gens = self
            .generator_names
            .iter()
            .map(|n| Ok((n.clone(), minv.mul(self.images.get(n).unwrap()).mul(m))))
            .collect::<Result<Vec<_>>>()?;
        Rep::new(gens, self.kind)
    }

    /// Homomorphic extension to a word.
    pub fn extend_word(&self, w: &GroupWord) -> Result<Mat2> {
        let p = self
            .images
            .values()
            .map(|m| m.precision())
            .min()
            .unwrap_or(crate::numerics::DEFAULT_PRECISION);
        let mut acc = Mat2::identity(p);
        for (name, e) in w.letters() {
            let img = self.image(name)?;
            let pow = if *e >= 0 {
                int_pow(img, *e as u64)
            } else {
                int_pow(&img.inverse()?, e.unsigned_abs())
            };
            acc = acc.mul(&pow);
        }
        Ok(acc)
    }

    /// Extension to a Gamma(2) matrix: the matrix is first decomposed into a
    /// word in A and B (mod +-I), then the word is mapped through the images.
    /// Returns the image together with the witness word.
    pub fn extend_gamma2(&self, gamma: &IMat2) -> Result<(Mat2, GroupWord)> {
        if self.kind != GroupKind::Gamma2 {
            return Err(Error::InvalidInput(
                "matrix extension requires a Gamma(2) representation".into(),
            ));
        }
        let word = gamma2_decompose(gamma)?;
        let img = self.extend_word(&word)?;
        Ok((img, word))
    }
}

fn int_pow(m: &Mat2, mut e: u64) -> Mat2 {
    let p = m.precision();
    let mut acc = Mat2::identity(p);
    let mut sq = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&sq);
        }
        e >>= 1;
        if e > 0 {
            sq = sq.mul(&sq);
        }
    }
    acc
}

/// Expresses gamma (mod +-I) as a reduced word in A, B. Errors with
/// NotInGamma2 when the parity/determinant preconditions fail.
pub fn gamma2_decompose(gamma: &IMat2) -> Result<GroupWord> {
    if gamma.det() != 1 {
        return Err(Error::NotInGamma2(format!("det = {}", gamma.det())));
    }
    if gamma.a.rem_euclid(2) != 1
        || gamma.d.rem_euclid(2) != 1
        || gamma.b.rem_euclid(2) != 0
        || gamma.c.rem_euclid(2) != 0
    {
        return Err(Error::NotInGamma2("not congruent to I mod 2".into()));
    }
    let (mut a, mut b, mut c, mut d) = (
        gamma.a as i128,
        gamma.b as i128,
        gamma.c as i128,
        gamma.d as i128,
    );
    // Left-multiplying by A^-n sends (a, b) -> (a - 2n c, b - 2n d);
    // by B^-n sends (c, d) -> (c - 2n a, d - 2n b). Each step strictly
    // shrinks max(|a|, |c|) because a is odd and c is even.
    let mut prefix: Vec<(&str, i64)> = Vec::new();
    loop {
        if c == 0 {
            break;
        }
        if a.abs() > c.abs() {
            let n = nearest_div(a, 2 * c);
            if n == 0 {
                return Err(Error::NotInGamma2("descent stalled".into()));
            }
            a -= 2 * n * c;
            b -= 2 * n * d;
            prefix.push(("A", n as i64));
        } else {
            let n = nearest_div(c, 2 * a);
            if n == 0 {
                return Err(Error::NotInGamma2("descent stalled".into()));
            }
            c -= 2 * n * a;
            d -= 2 * n * b;
            prefix.push(("B", n as i64));
        }
    }
    // now the matrix is +-[[1, b],[0, 1]] with even b, i.e. +-A^{b/2}
    if a.abs() != 1 || a != d {
        return Err(Error::NotInGamma2("descent did not reach +-unipotent".into()));
    }
    let tail = (a.signum() * b) / 2;
    let mut w = GroupWord::identity();
    for (name, e) in prefix {
        w.push(name, e);
    }
    if tail != 0 {
        if tail.abs() > i64::MAX as i128 {
            return Err(Error::NotInGamma2("entry overflow".into()));
        }
        w.push("A", tail as i64);
    }
    Ok(w)
}

/// Integer nearest to x / y. Exact ties cannot occur in the descent (the
/// off-diagonal parity excludes them), so the tie direction is immaterial.
fn nearest_div(x: i128, y: i128) -> i128 {
    let q = x.div_euclid(y);
    let r = x.rem_euclid(y); // in [0, |y|)
    if 2 * r >= y.abs() {
        if y > 0 {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Multiplies the word out in the concrete generators A, B.
pub fn gamma2_compose(word: &GroupWord) -> Result<IMat2> {
    let mut acc = IMat2::IDENTITY;
    for (name, e) in word.letters() {
        let g = match name.as_str() {
            "A" => GAMMA2_A,
            "B" => GAMMA2_B,
            other => return Err(Error::UnknownGenerator(other.into())),
        };
        acc = acc.mul(&g.pow(*e));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION as P;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn generator_lookup() {
        let rho = Rep::gamma2_defining(P);
        let w = GroupWord::parse("A").unwrap();
        let img = rho.extend_word(&w).unwrap();
        assert!(img.distance(&GAMMA2_A.to_mat(P)) < 1e-70);
    }

    #[test]
    fn identity_matrix_decomposes_empty() {
        let (img, word) = Rep::gamma2_defining(P)
            .extend_gamma2(&IMat2::IDENTITY)
            .unwrap();
        assert!(word.is_identity());
        assert!(img.distance(&Mat2::identity(P)) < 1e-70);
    }

    #[test]
    fn ab_product_decomposes() {
        // A*B = [[5,2],[2,1]]
        let ab = GAMMA2_A.mul(&GAMMA2_B);
        assert_eq!(ab, IMat2::new(5, 2, 2, 1));
        let (img, word) = Rep::gamma2_defining(P).extend_gamma2(&ab).unwrap();
        let recomposed = gamma2_compose(&word).unwrap();
        assert!(recomposed == ab || recomposed == ab.neg());
        let direct = GAMMA2_A.to_mat(P).mul(&GAMMA2_B.to_mat(P));
        assert!(img.projective_distance(&direct) < 1e-70);
    }

    #[test]
    fn random_words_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let len = rng.random_range(1..=12);
            let mut w = GroupWord::identity();
            for _ in 0..len {
                let name = if rng.random_bool(0.5) { "A" } else { "B" };
                let e = if rng.random_bool(0.5) { 1 } else { -1 };
                w.push(name, e);
            }
            let gamma = gamma2_compose(&w).unwrap();
            let word = gamma2_decompose(&gamma).unwrap();
            let back = gamma2_compose(&word).unwrap();
            assert!(back == gamma || back == gamma.neg(), "word {w} gamma {gamma:?}");
        }
    }

    #[test]
    fn rejects_non_members() {
        assert!(matches!(
            gamma2_decompose(&IMat2::new(1, 1, 0, 1)),
            Err(Error::NotInGamma2(_))
        ));
        assert!(matches!(
            gamma2_decompose(&IMat2::new(2, 1, 1, 1)),
            Err(Error::NotInGamma2(_))
        ));
    }

    #[test]
    fn homomorphism_on_random_words() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        // a random representation on two generators
        let m1 = Mat2::new(
            crate::numerics::BigComplex::from_f64s(1.3, -0.2, P),
            crate::numerics::BigComplex::from_f64s(0.4, 0.9, P),
            crate::numerics::BigComplex::from_f64s(-0.5, 0.1, P),
            crate::numerics::BigComplex::from_f64s(0.8, 0.6, P),
        );
        let m2 = Mat2::new(
            crate::numerics::BigComplex::from_f64s(0.2, 1.1, P),
            crate::numerics::BigComplex::from_f64s(-1.0, 0.3, P),
            crate::numerics::BigComplex::from_f64s(0.7, -0.4, P),
            crate::numerics::BigComplex::from_f64s(1.5, 0.0, P),
        );
        let rho = Rep::new(
            vec![("X".into(), m1), ("Y".into(), m2)],
            GroupKind::Free,
        )
        .unwrap();
        for _ in 0..20 {
            let mut w1 = GroupWord::identity();
            let mut w2 = GroupWord::identity();
            for _ in 0..rng.random_range(1..=5) {
                w1.push(if rng.random_bool(0.5) { "X" } else { "Y" }, rng.random_range(-2..=2));
            }
            for _ in 0..rng.random_range(1..=5) {
                w2.push(if rng.random_bool(0.5) { "X" } else { "Y" }, rng.random_range(-2..=2));
            }
            let lhs = rho.extend_word(&w1.concat(&w2)).unwrap();
            let rhs = rho.extend_word(&w1).unwrap().mul(&rho.extend_word(&w2).unwrap());
            assert!(lhs.distance(&rhs) < 1e-60, "{w1} | {w2}");
        }
    }
}
