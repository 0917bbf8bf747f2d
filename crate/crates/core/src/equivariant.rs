//! rho-equivariance and VMF residual checkers, the ratio construction
//! h_F = f1/f2, the weight-shift isomorphism, and the constructive
//! surjectivity round trip.
//!
//! The round trip: given an equivariant candidate h, build g = (1/2) S(h),
//! solve y'' + g y = 0 from the canonical identity system at the base, fit
//! alpha through three probe pairs so that f1/f2 = alpha . h, set
//! F = alpha^{-1} (f1, f2)^t, measure the weight -1 representation rho_1 by
//! continuation along z -> gamma z, and verify alpha^{-1} rho_1 alpha
//! matches rho projectively. All representation comparisons are projective;
//! the scalar of rho_1 relative to rho is recorded, never asserted.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::rep::{gamma2_compose, gamma2_decompose};
use crate::moebius::{slash_vector, ExtPoint, GroupWord, IMat2, Mat2, Rep};
use crate::numerics::{BigComplex, Jet};
use crate::ode::{
    continue_system, solution_jets, FundamentalSystem, OdeCoefficients, PathPolyline,
    TransportConfig,
};
use crate::sampler::{Chart, DomainHint, FunctionSampler, MatrixVectorSampler, ScaledVectorSampler, VectorSampler};
use crate::schwarz::SchwarzianHalfSampler;

/// A candidate rho-equivariant function: a sampler and the group data.
/// Equivariance is the property under test, not an invariant.
pub struct EquivariantCandidate {
    pub h: Arc<dyn FunctionSampler>,
    pub rep: Rep,
    pub note: Option<String>,
}

/// A candidate vector-valued modular form.
pub struct VmfCandidate {
    pub f: Arc<dyn VectorSampler>,
    pub weight: i64,
    pub rep: Rep,
}

/// A group element given either as a word in the generators or as an
/// explicit Gamma(2) matrix.
#[derive(Clone, Debug)]
pub enum GroupElement {
    Word(GroupWord),
    Matrix(IMat2),
}

impl GroupElement {
    pub fn parse(s: &str) -> Result<GroupElement> {
        Ok(GroupElement::Word(GroupWord::parse(s)?))
    }

    /// Resolves to (acting matrix, word) for groups whose generators are the
    /// Gamma(2) pair A, B.
    pub fn resolve(&self) -> Result<(IMat2, GroupWord)> {
        match self {
            GroupElement::Word(w) => Ok((gamma2_compose(w)?, w.clone())),
            GroupElement::Matrix(m) => Ok((*m, gamma2_decompose(m)?)),
        }
    }
}

/// rho(gamma) through the representation for a resolved element.
fn rho_of(rep: &Rep, word: &GroupWord) -> Result<Mat2> {
    rep.extend_word(word)
}

/// True when the matrix is within `tol` of a scalar multiple of the
/// identity (its Moebius action is then trivial; reports note this).
pub fn is_near_scalar(m: &Mat2, tol: f64) -> bool {
    let s = m.max_abs();
    if s == 0.0 {
        return true;
    }
    m.b.abs_f64() / s < tol && m.c.abs_f64() / s < tol && m.a.dist_f64(&m.d) / s < tol
}

/// Chordal distance between h(gamma z) and rho(gamma) . h(z).
pub fn equivariance_residual(
    cand: &EquivariantCandidate,
    gamma: &GroupElement,
    z: &BigComplex,
) -> Result<f64> {
    let (mat, word) = gamma.resolve()?;
    let rho = rho_of(&cand.rep, &word)?;
    let gz = mat.apply_finite(z)?;
    let lhs = cand.h.value_ext(&gz)?;
    let hz = cand.h.value_ext(z)?;
    let rhs = rho.apply(&hz)?;
    Ok(lhs.chordal(&rhs))
}

/// Max-norm of F|_k gamma (z) - rho(gamma) F(z).
pub fn vmf_residual(cand: &VmfCandidate, gamma: &GroupElement, z: &BigComplex) -> Result<f64> {
    let (mat, word) = gamma.resolve()?;
    let rho = rho_of(&cand.rep, &word)?;
    let p = z.precision();
    let gm = mat.to_mat(p);
    let slashed = slash_vector(cand.f.as_ref(), cand.weight, &gm, z)?;
    let fz = cand.f.values(z)?;
    let rf = rho.apply_vec(&fz);
    Ok(slashed[0]
        .sub(&rf[0])
        .abs_f64()
        .max(slashed[1].sub(&rf[1]).abs_f64()))
}

/// The ratio h_F = f1/f2 of a VMF candidate, as an equivariant candidate for
/// the same representation. Degenerate second components are rejected;
/// constant ratios are flagged in the note (equivariance then forces
/// rho(gamma) to fix the constant, which is reported, not asserted).
pub fn ratio_of_vmf(cand: &VmfCandidate, probes: &[BigComplex]) -> Result<EquivariantCandidate> {
    let mut nonzero = 0usize;
    let mut ratios: Vec<ExtPoint> = Vec::new();
    for z in probes {
        let [f1, f2] = cand.f.values(z)?;
        if !f2.is_zero() {
            nonzero += 1;
            ratios.push(ExtPoint::Finite(f1.div(&f2)?));
        }
    }
    if nonzero == 0 {
        return Err(Error::DegenerateVmf);
    }
    let constant = ratios
        .windows(2)
        .all(|w| w[0].chordal(&w[1]) < 1e-40);
    let note = if constant && ratios.len() > 1 {
        Some("ratio is constant at the probe points".to_string())
    } else {
        None
    };
    Ok(EquivariantCandidate {
        h: Arc::new(VectorRatioSampler { v: cand.f.clone() }),
        rep: cand.rep.clone(),
        note,
    })
}

/// f1/f2 of a vector sampler as a scalar sampler with pole charts.
pub struct VectorRatioSampler {
    pub v: Arc<dyn VectorSampler>,
}

impl FunctionSampler for VectorRatioSampler {
    fn jet(&self, z: &BigComplex, order: usize) -> Result<Jet> {
        let [f1, f2] = self.v.jets(z, order)?;
        f1.div(&f2)
    }

    fn projective_jet(&self, z: &BigComplex, order: usize) -> Result<(Jet, Chart)> {
        let [f1, f2] = self.v.jets(z, order)?;
        if f2.value().abs_f64() >= f1.value().abs_f64() {
            Ok((f1.div(&f2)?, Chart::Direct))
        } else {
            Ok((f2.div(&f1)?, Chart::Inverted))
        }
    }

    fn value_ext(&self, z: &BigComplex) -> Result<ExtPoint> {
        let [f1, f2] = self.v.values(z)?;
        if f2.is_zero() {
            if f1.is_zero() {
                return Err(Error::SamplerFailure("0/0 ratio".into()));
            }
            return Ok(ExtPoint::Infinity);
        }
        Ok(ExtPoint::Finite(f1.div(&f2)?))
    }

    fn domain_hint(&self) -> DomainHint {
        self.v.domain_hint()
    }

    fn describe(&self) -> String {
        format!("ratio of {}", self.v.describe())
    }
}

/// Componentwise scalar multiplication (f F1, f F2): an isomorphism from
/// weight w to weight w + m when f is automorphic of weight m for the same
/// group. The ratio f1/f2 is unchanged.
pub fn weight_shift(
    cand: &VmfCandidate,
    f: Arc<dyn FunctionSampler>,
    f_weight: i64,
    probes: &[BigComplex],
) -> Result<VmfCandidate> {
    let mut nonzero = false;
    for z in probes {
        if !f.value(z)?.is_zero() {
            nonzero = true;
            break;
        }
    }
    if !nonzero {
        return Err(Error::DegenerateScalar);
    }
    Ok(VmfCandidate {
        f: Arc::new(ScaledVectorSampler { scalar: f, vector: cand.f.clone() }),
        weight: cand.weight + f_weight,
        rep: cand.rep.clone(),
    })
}

// -------------------------------------------------------------- reconstruct

/// Solutions of y'' + g y = 0 on the upper half-plane as a vector sampler:
/// the canonical system continued from the base along straight segments,
/// with an internal germ cache for nearby queries.
pub struct SolutionPairSampler {
    coeffs: OdeCoefficients,
    base: BigComplex,
    reference: FundamentalSystem,
    cfg: TransportConfig,
    state: Mutex<(BigComplex, FundamentalSystem)>,
}

impl SolutionPairSampler {
    pub fn new(
        coeffs: OdeCoefficients,
        reference: FundamentalSystem,
        cfg: TransportConfig,
    ) -> Self {
        let base = reference.at.clone();
        let state = Mutex::new((base.clone(), reference.clone()));
        SolutionPairSampler { coeffs, base, reference, cfg, state }
    }

    pub fn system_at(&self, z: &BigComplex) -> Result<FundamentalSystem> {
        let mut st = self.state.lock().unwrap();
        let (ref mut z_cur, ref mut sys_cur) = *st;
        let d_cached = z.sub(z_cur).abs_f64();
        let d_base = z.sub(&self.base).abs_f64();
        if d_base < d_cached {
            *z_cur = self.base.clone();
            *sys_cur = self.reference.clone();
        }
        if sys_cur.precision() < z.precision() {
            *sys_cur = sys_cur.with_precision(z.precision());
            *z_cur = z_cur.with_precision(z.precision());
        }
        if !z.equals(z_cur) {
            let path = PathPolyline::open(vec![sys_cur.at.clone(), z.clone()])?;
            let out = continue_system(&self.coeffs, &path, sys_cur, &self.cfg)?;
            *sys_cur = out.system;
            *z_cur = z.clone();
        }
        Ok(sys_cur.clone())
    }
}

impl VectorSampler for SolutionPairSampler {
    fn jets(&self, z: &BigComplex, order: usize) -> Result<[Jet; 2]> {
        let sys = self.system_at(z)?;
        solution_jets(&self.coeffs, &sys, order)
    }

    fn domain_hint(&self) -> DomainHint {
        DomainHint::upper_half_plane()
    }

    fn describe(&self) -> String {
        "normal-form solution pair".into()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    pub generator: String,
    /// projective distance between alpha^{-1} rho_1 alpha and rho.
    pub projective_distance: f64,
    /// the scalar relating the two (recorded, never asserted).
    pub scalar: BigComplex,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionReport {
    /// chordal residual of f1/f2 = alpha . h on the held-out probes.
    pub fit_residual: f64,
    pub fit_probes: usize,
    pub held_out: usize,
    pub conjugation: Vec<ConjugationReport>,
}

pub struct ReconstructionResult {
    pub base: BigComplex,
    pub g_at_base: Jet,
    pub system: FundamentalSystem,
    pub alpha: Mat2,
    pub rho_recovered: Rep,
    pub report: ReconstructionReport,
    /// The recovered weight -1 VMF candidate F = alpha^{-1} (f1, f2)^t with
    /// its measured representation.
    pub vmf: VmfCandidate,
}

/// Tolerance for the held-out fit verification, in bits below the working
/// precision.
const FIT_SLACK_BITS: i32 = 120;

/// The constructive surjectivity round trip.
pub fn reconstruct(
    cand: &EquivariantCandidate,
    base: &BigComplex,
    probes: &[BigComplex],
    cfg: &TransportConfig,
) -> Result<ReconstructionResult> {
    if probes.len() < 4 {
        return Err(Error::InvalidInput("need at least 4 probes (3 fit + holdout)".into()));
    }
    let p = base.precision();
    let g: Arc<dyn FunctionSampler> = Arc::new(SchwarzianHalfSampler { h: cand.h.clone() });
    let g_at_base = g.jet(base, 4)?; // also surfaces CriticalPoint at the base
    let coeffs = OdeCoefficients::normal_form(g, vec![]);
    let reference = FundamentalSystem::identity(base.clone());
    let pair = SolutionPairSampler::new(coeffs.clone(), reference.clone(), cfg.clone());

    // probe values: h, the solution ratio, and |h'| for fit conditioning
    let mut data: Vec<(BigComplex, ExtPoint, ExtPoint, f64)> = Vec::new();
    for z in probes {
        let hj = cand.h.projective_jet(z, 1)?;
        let h_ext = cand.h.value_ext(z)?;
        let sys = pair.system_at(z)?;
        let ratio = {
            let f1 = &sys.values[0][0];
            let f2 = &sys.values[0][1];
            if f2.is_zero() {
                ExtPoint::Infinity
            } else {
                ExtPoint::Finite(f1.div(f2)?)
            }
        };
        let hprime = match hj.1 {
            Chart::Direct => hj.0.coeff(1).abs_f64(),
            Chart::Inverted => hj.0.coeff(1).abs_f64(),
        };
        data.push((z.clone(), h_ext, ratio, hprime));
    }

    // fit alpha on the three best-conditioned probes with distinct values
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data[b].3.partial_cmp(&data[a].3).unwrap_or(std::cmp::Ordering::Equal));
    let mut fit_idx: Vec<usize> = Vec::new();
    for &i in &order {
        let distinct = fit_idx.iter().all(|&j| {
            data[i].1.chordal(&data[j].1) > 1e-30 && data[i].2.chordal(&data[j].2) > 1e-30
        });
        if distinct {
            fit_idx.push(i);
            if fit_idx.len() == 3 {
                break;
            }
        }
    }
    if fit_idx.len() < 3 {
        return Err(Error::DegeneratePoints);
    }
    let srcs = [
        data[fit_idx[0]].1.clone(),
        data[fit_idx[1]].1.clone(),
        data[fit_idx[2]].1.clone(),
    ];
    let tgts = [
        data[fit_idx[0]].2.clone(),
        data[fit_idx[1]].2.clone(),
        data[fit_idx[2]].2.clone(),
    ];
    // alpha . h = f1/f2
    let alpha = crate::moebius::mobius_fit(&srcs, &tgts)?;

    // verify on the held-out probes
    let mut fit_residual = 0.0f64;
    let mut held_out = 0usize;
    for (i, (_, h_ext, ratio, _)) in data.iter().enumerate() {
        if fit_idx.contains(&i) {
            continue;
        }
        held_out += 1;
        let mapped = alpha.apply(h_ext)?;
        fit_residual = fit_residual.max(mapped.chordal(ratio));
    }
    let fit_tol = 2f64.powi(-(p as i32) + FIT_SLACK_BITS);
    if fit_residual > fit_tol {
        return Err(Error::FitFailure { residual: fit_residual });
    }

    // rho_1 on the generators by continuation along z -> gamma z; with the
    // identity reference the weight -1 matrix reads off directly:
    // (f_i |_{-1} gamma)(b) = (c b + d) f_i(gamma b),
    // (f_i |_{-1} gamma)'(b) = c f_i(gamma b) + f_i'(gamma b) / (c b + d)
    let alpha_inv = alpha.inverse()?;
    let mut conj_reports = Vec::new();
    let mut recovered_gens: Vec<(String, Mat2)> = Vec::new();
    for name in cand.rep.generator_names() {
        let word = GroupWord::generator(name, 1);
        let gamma = gamma2_compose(&word)?;
        let gm = gamma.to_mat(p);
        let gb = gm.apply_finite(base)?;
        let sys = pair.system_at(&gb)?;
        let jb = gm.factor(base);
        let mut rho1 = Mat2::identity(p);
        for i in 0..2 {
            let (v, d) = sys.column(i);
            let val = jb.mul(&v);
            let der = gm.c.mul(&v).add(&d.div(&jb)?);
            if i == 0 {
                rho1.a = val;
                rho1.b = der;
            } else {
                rho1.c = val;
                rho1.d = der;
            }
        }
        // rows built above are (value, derivative) in the identity basis:
        // row i of rho_1 is exactly (value_i, derivative_i) transposed
        // against the basis (f1, f2) = (1 + O(..), (z-b) + O(..)):
        // value = coefficient of f1, derivative = coefficient of f2
        let rho1 = Mat2::new(rho1.a, rho1.b, rho1.c, rho1.d);
        let rec = alpha_inv.mul(&rho1).mul(&alpha);
        let target = cand.rep.image(name)?;
        let dist = rec.projective_distance(target);
        // scalar relating them: tr(rec target^{-1}) / 2
        let scalar = rec.mul(&target.inverse()?).trace().mul(&BigComplex::from_ratio(1, 2, p));
        conj_reports.push(ConjugationReport {
            generator: name.clone(),
            projective_distance: dist,
            scalar,
        });
        recovered_gens.push((name.clone(), rec));
    }
    let conj_tol = 2f64.powi(-(p as i32) + FIT_SLACK_BITS);
    for r in &conj_reports {
        if r.projective_distance > conj_tol {
            return Err(Error::ConjugationMismatch {
                detail: format!(
                    "generator {}: projective distance {:e}",
                    r.generator, r.projective_distance
                ),
            });
        }
    }
    let rho_recovered = Rep::new(recovered_gens, cand.rep.kind())?;

    let f_sampler: Arc<dyn VectorSampler> = Arc::new(MatrixVectorSampler {
        matrix: alpha_inv,
        vector: Arc::new(pair),
    });
    let vmf = VmfCandidate {
        f: f_sampler,
        weight: -1,
        rep: rho_recovered.clone(),
    };
    Ok(ReconstructionResult {
        base: base.clone(),
        g_at_base,
        system: reference,
        alpha,
        rho_recovered,
        report: ReconstructionReport {
            fit_residual,
            fit_probes: 3,
            held_out,
            conjugation: conj_reports,
        },
        vmf,
    })
}

// ------------------------------------------------------- candidate builders

/// The trivial equivariant function h0(z) = z with the defining
/// representation of Gamma(2).
pub fn trivial_candidate(p: usize) -> EquivariantCandidate {
    EquivariantCandidate {
        h: Arc::new(crate::sampler::IdentitySampler),
        rep: Rep::gamma2_defining(p),
        note: None,
    }
}

/// h(z) = m . z with the conjugated defining representation
/// rho(gamma) = m gamma m^{-1}.
pub fn moebius_twisted_candidate(m: &Mat2, p: usize) -> Result<EquivariantCandidate> {
    let rep = Rep::gamma2_defining(p).conjugate(&m.inverse()?)?;
    Ok(EquivariantCandidate {
        h: Arc::new(crate::sampler::MobiusSampler(m.clone())),
        rep,
        note: None,
    })
}

/// A corrupted copy: one generator image replaced by the identity. Negative
/// control for the equivariance checker.
pub fn corrupt_rep(rep: &Rep, which: &str) -> Result<Rep> {
    let p = rep.image(which)?.precision();
    let gens: Vec<(String, Mat2)> = rep
        .generator_names()
        .iter()
        .map(|n| {
            let img = if n == which {
                Mat2::identity(p)
            } else {
                rep.image(n).unwrap().clone()
            };
            (n.clone(), img)
        })
        .collect();
    Rep::new(gens, rep.kind())
}

/// Deterministic probe points in the standard sampling band of the upper
/// half-plane.
pub fn probe_points(seed: u64, count: usize, p: usize) -> Vec<BigComplex> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let re: f64 = rng.random_range(-0.45..0.45);
            let im: f64 = rng.random_range(0.75..1.45);
            BigComplex::from_f64s(re, im, p)
        })
        .collect()
}

/// Rep of the deck generators A, B acting through the covering loops.
pub fn deck_rep(cov: &crate::legendre::CoveringData) -> Result<Rep> {
    let a = cov.rho_of_word(&GroupWord::generator("A", 1))?;
    let b = cov.rho_of_word(&GroupWord::generator("B", 1))?;
    Rep::new(
        vec![("A".into(), a), ("B".into(), b)],
        crate::moebius::GroupKind::Gamma2,
    )
}

/// Keyed residual summaries used by reports.
pub type ResidualMap = BTreeMap<String, f64>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION as P;
    use crate::sampler::{ConstSampler, IdentitySampler, PairSampler, PolySampler};

    fn z_at(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64s(re, im, P)
    }

    #[test]
    fn trivial_candidate_is_exactly_equivariant() {
        let cand = trivial_candidate(P);
        let z = z_at(0.3, 1.1);
        for w in ["A", "B", "A B^-1 A"] {
            let g = GroupElement::parse(w).unwrap();
            let r = equivariance_residual(&cand, &g, &z).unwrap();
            assert!(r < 2f64.powi(-(P as i32) + 24), "{w}: {r:e}");
        }
    }

    #[test]
    fn corrupted_rep_fails_loudly() {
        let cand = trivial_candidate(P);
        let bad = EquivariantCandidate {
            h: cand.h.clone(),
            rep: corrupt_rep(&cand.rep, "A").unwrap(),
            note: None,
        };
        let z = z_at(0.2, 0.9);
        let g = GroupElement::parse("A").unwrap();
        let r = equivariance_residual(&bad, &g, &z).unwrap();
        assert!(r > 1e-3, "corrupted residual only {r:e}");
    }

    #[test]
    fn trivial_vmf_weight_minus_one() {
        // F = (z, 1) is an exact weight -1 VMF for the defining rep
        let f: Arc<dyn VectorSampler> = Arc::new(PairSampler {
            first: Arc::new(IdentitySampler),
            second: Arc::new(ConstSampler(BigComplex::one(P))),
        });
        let cand = VmfCandidate { f, weight: -1, rep: Rep::gamma2_defining(P) };
        let z = z_at(-0.2, 1.3);
        for w in ["A", "B", "B A"] {
            let g = GroupElement::parse(w).unwrap();
            let r = vmf_residual(&cand, &g, &z).unwrap();
            assert!(r < 2f64.powi(-(P as i32) + 24), "{w}: {r:e}");
        }
        // its ratio is the trivial equivariant function
        let probes = probe_points(5, 6, P);
        let h = ratio_of_vmf(&cand, &probes).unwrap();
        let r = equivariance_residual(&h, &GroupElement::parse("A").unwrap(), &z).unwrap();
        assert!(r < 2f64.powi(-(P as i32) + 24));
    }

    #[test]
    fn degenerate_and_constant_ratio() {
        let zero: Arc<dyn VectorSampler> = Arc::new(PairSampler {
            first: Arc::new(IdentitySampler),
            second: Arc::new(ConstSampler(BigComplex::zero(P))),
        });
        let cand = VmfCandidate { f: zero, weight: 0, rep: Rep::gamma2_defining(P) };
        let probes = probe_points(7, 5, P);
        assert!(matches!(ratio_of_vmf(&cand, &probes), Err(Error::DegenerateVmf)));

        let same: Arc<dyn VectorSampler> = Arc::new(PairSampler {
            first: Arc::new(PolySampler::from_i64s(&[1, 2], P)),
            second: Arc::new(PolySampler::from_i64s(&[1, 2], P)),
        });
        let cand = VmfCandidate { f: same, weight: 0, rep: Rep::gamma2_defining(P) };
        let h = ratio_of_vmf(&cand, &probes).unwrap();
        assert!(h.note.as_deref().unwrap_or("").contains("constant"));
    }

    #[test]
    fn weight_shift_constant_one_is_identity() {
        let f: Arc<dyn VectorSampler> = Arc::new(PairSampler {
            first: Arc::new(IdentitySampler),
            second: Arc::new(ConstSampler(BigComplex::one(P))),
        });
        let cand = VmfCandidate { f, weight: -1, rep: Rep::gamma2_defining(P) };
        let probes = probe_points(9, 4, P);
        let shifted = weight_shift(
            &cand,
            Arc::new(ConstSampler(BigComplex::one(P))),
            0,
            &probes,
        )
        .unwrap();
        assert_eq!(shifted.weight, -1);
        let z = z_at(0.1, 1.0);
        let a = cand.f.values(&z).unwrap();
        let b = shifted.f.values(&z).unwrap();
        assert!(a[0].dist_f64(&b[0]) < 1e-70 && a[1].dist_f64(&b[1]) < 1e-70);
        // zero scalar is rejected
        assert!(matches!(
            weight_shift(&cand, Arc::new(ConstSampler(BigComplex::zero(P))), 12, &probes),
            Err(Error::DegenerateScalar)
        ));
    }

    #[test]
    fn reconstruct_trivial() {
        let cand = trivial_candidate(P);
        let base = BigComplex::i(P);
        let probes = probe_points(11, 9, P);
        let cfg = TransportConfig::default();
        let out = reconstruct(&cand, &base, &probes, &cfg).unwrap();
        // S(z) = 0 means g = 0
        assert!(out.g_at_base.value().abs_f64() < 2f64.powi(-200));
        assert!(out.report.fit_residual < 2f64.powi(-140));
        for c in &out.report.conjugation {
            assert!(c.projective_distance < 2f64.powi(-140), "{c:?}");
        }
        // recovered F is proportional to (z, 1): check the VMF residual
        let z = z_at(0.15, 1.05);
        for w in ["A", "B"] {
            let r = vmf_residual(&out.vmf, &GroupElement::parse(w).unwrap(), &z).unwrap();
            assert!(r < 2f64.powi(-140), "{w}: {r:e}");
        }
        // and F(z)/(F2) ~ z: alpha maps ratio back to h
        let [f1, f2] = out.vmf.f.values(&z).unwrap();
        let ratio = f1.div(&f2).unwrap();
        assert!(ratio.dist_f64(&z) < 2f64.powi(-140));
    }

    #[test]
    fn reconstruct_moebius_twist() {
        let m = Mat2::from_i64s(2, 1, 1, 1, P);
        let cand = moebius_twisted_candidate(&m, P).unwrap();
        let base = BigComplex::i(P);
        let probes = probe_points(13, 9, P);
        let out = reconstruct(&cand, &base, &probes, &TransportConfig::default()).unwrap();
        assert!(out.report.fit_residual < 2f64.powi(-140));
        for c in &out.report.conjugation {
            assert!(c.projective_distance < 2f64.powi(-140), "{c:?}");
        }
        // the recovered F satisfies h_F = h on fresh points
        let z = z_at(-0.1, 0.95);
        let h_val = cand.h.value(&z).unwrap();
        let [f1, f2] = out.vmf.f.values(&z).unwrap();
        let ratio = f1.div(&f2).unwrap();
        assert!(ratio.dist_f64(&h_val) < 2f64.powi(-140));
        // and its VMF residual at weight -1 is tiny against the measured rep
        let r = vmf_residual(&out.vmf, &GroupElement::parse("B").unwrap(), &z).unwrap();
        assert!(r < 2f64.powi(-140), "residual {r:e}");
    }
}
