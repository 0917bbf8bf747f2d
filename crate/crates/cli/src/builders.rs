//! Shared builders: the CLI-visible function registry, candidate registry,
//! matrix and loop parsing.

use std::sync::Arc;

use equivmod_core::equivariant::{
    deck_rep, moebius_twisted_candidate, trivial_candidate, EquivariantCandidate, VmfCandidate,
};
use equivmod_core::error::{Error, Result};
use equivmod_core::legendre::{CoveringData, LegendrePairSampler, LegendreRatioSampler};
use equivmod_core::moebius::{Mat2, Rep};
use equivmod_core::numerics::{parse_complex, BigComplex};
use equivmod_core::ode::{PathPolyline, TransportConfig};
use equivmod_core::qforms::{FormName, QFormSampler};
use equivmod_core::report::RunConfig;
use equivmod_core::sampler::{
    ConstSampler, ExpSampler, FunctionSampler, IdentitySampler, MobiusSampler, PairSampler,
    PolySampler, RationalSampler, VectorSampler,
};

/// "a,b,c,d" or "[[a,b],[c,d]]" with integer entries.
pub fn parse_mat(s: &str, p: usize) -> Result<Mat2> {
    let cleaned: String = s
        .chars()
        .filter(|c| !matches!(c, '[' | ']' | ' '))
        .collect();
    let parts: Vec<&str> = cleaned.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::InvalidInput(format!("matrix `{s}` needs 4 entries")));
    }
    let mut vals = [0i64; 4];
    for (i, t) in parts.iter().enumerate() {
        vals[i] = t
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad matrix entry `{t}`")))?;
    }
    Ok(Mat2::from_i64s(vals[0], vals[1], vals[2], vals[3], p))
}

/// CLI function registry: exp | z | poly:c0,c1,... | moebius:a,b,c,d |
/// rational:n0,..;d0,.. | e2 | e4 | e6 | delta | j | lambda | legendre-ratio.
pub fn build_function(
    name: &str,
    cfg: &RunConfig,
    covering: &mut Option<Arc<CoveringData>>,
) -> Result<Arc<dyn FunctionSampler>> {
    let p = cfg.precision_bits;
    let lower = name.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("poly:") {
        let coeffs: Vec<i64> = rest
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("bad poly coefficients `{rest}`")))?;
        return Ok(Arc::new(PolySampler::from_i64s(&coeffs, p)));
    }
    if let Some(rest) = lower.strip_prefix("moebius:") {
        return Ok(Arc::new(MobiusSampler(parse_mat(rest, p)?)));
    }
    match lower.as_str() {
        "exp" => Ok(Arc::new(ExpSampler)),
        "z" | "id" | "identity" => Ok(Arc::new(IdentitySampler)),
        "one" => Ok(Arc::new(ConstSampler(BigComplex::one(p)))),
        "e2" | "e4" | "e6" | "delta" | "j" | "lambda" => {
            let mut s = QFormSampler::new(FormName::parse(&lower)?);
            s.truncation = cfg.truncation;
            Ok(Arc::new(s))
        }
        "legendre-ratio" => {
            let cov = covering_of(cfg, covering)?;
            Ok(Arc::new(LegendreRatioSampler::new(cov)))
        }
        other => Err(Error::InvalidInput(format!("unknown function `{other}`"))),
    }
}

pub fn covering_of(
    cfg: &RunConfig,
    covering: &mut Option<Arc<CoveringData>>,
) -> Result<Arc<CoveringData>> {
    if let Some(c) = covering {
        return Ok(c.clone());
    }
    let c = Arc::new(CoveringData::establish(cfg.precision_bits, &cfg.transport())?);
    *covering = Some(c.clone());
    Ok(c)
}

pub fn build_equivariant_candidate(
    name: &str,
    cfg: &RunConfig,
    covering: &mut Option<Arc<CoveringData>>,
) -> Result<EquivariantCandidate> {
    let p = cfg.precision_bits;
    let lower = name.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("moebius:") {
        return moebius_twisted_candidate(&parse_mat(rest, p)?, p);
    }
    match lower.as_str() {
        "trivial" => Ok(trivial_candidate(p)),
        "legendre" => {
            let cov = covering_of(cfg, covering)?;
            Ok(EquivariantCandidate {
                h: Arc::new(LegendreRatioSampler::new(cov.clone())),
                rep: deck_rep(&cov)?,
                note: None,
            })
        }
        other => Err(Error::InvalidInput(format!("unknown candidate `{other}`"))),
    }
}

pub fn build_vmf_candidate(
    name: &str,
    cfg: &RunConfig,
    covering: &mut Option<Arc<CoveringData>>,
) -> Result<VmfCandidate> {
    let p = cfg.precision_bits;
    match name.to_ascii_lowercase().as_str() {
        "trivial" => {
            let f: Arc<dyn VectorSampler> = Arc::new(PairSampler {
                first: Arc::new(IdentitySampler),
                second: Arc::new(ConstSampler(BigComplex::one(p))),
            });
            Ok(VmfCandidate { f, weight: -1, rep: Rep::gamma2_defining(p) })
        }
        "legendre" => {
            let cov = covering_of(cfg, covering)?;
            Ok(VmfCandidate {
                f: Arc::new(LegendrePairSampler::new(cov.clone())),
                weight: 0,
                rep: deck_rep(&cov)?,
            })
        }
        other => Err(Error::InvalidInput(format!("unknown VMF candidate `{other}`"))),
    }
}

pub struct EquationChoice {
    pub coeffs: equivmod_core::ode::OdeCoefficients,
    pub base_default: BigComplex,
    pub reference: equivmod_core::ode::FundamentalSystem,
}

/// --equation legendre | sqrtlog
pub fn build_equation(name: &str, base: &BigComplex, tcfg: &TransportConfig) -> Result<EquationChoice> {
    let p = base.precision();
    match name.to_ascii_lowercase().as_str() {
        "legendre" => {
            let eq = equivmod_core::legendre::LegendreEquation::new(p);
            let reference = equivmod_core::legendre::legendre_fundamental(base, tcfg)?;
            Ok(EquationChoice {
                coeffs: eq.x_coefficients(),
                base_default: base.clone(),
                reference,
            })
        }
        "sqrtlog" => {
            let g = RationalSampler::from_i64s(&[1], &[0, 0, 4], vec![BigComplex::zero(p)], p);
            let coeffs =
                equivmod_core::ode::OdeCoefficients::normal_form(Arc::new(g), vec![BigComplex::zero(p)]);
            Ok(EquationChoice {
                coeffs,
                base_default: base.clone(),
                reference: equivmod_core::ode::FundamentalSystem::identity(base.clone()),
            })
        }
        other => Err(Error::InvalidInput(format!("unknown equation `{other}`"))),
    }
}

/// --loop around0 | around1 | around0:r=0.3 | around1:r=0.7
pub fn build_loop(spec: &str, base: &BigComplex) -> Result<PathPolyline> {
    let p = base.precision();
    let (which, radius) = match spec.split_once(":r=") {
        None => (spec, None),
        Some((w, r)) => {
            let rv: f64 = r
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad loop radius `{r}`")))?;
            (w, Some(rv))
        }
    };
    let center = match which.to_ascii_lowercase().as_str() {
        "around0" => BigComplex::zero(p),
        "around1" => BigComplex::one(p),
        other => return Err(Error::InvalidInput(format!("unknown loop `{other}`"))),
    };
    match radius {
        None => PathPolyline::circle_through(base, &center, 16),
        Some(r) => PathPolyline::circle_through_radius(base, &center, r, 16),
    }
}

pub fn parse_point(s: &str, p: usize) -> Result<BigComplex> {
    parse_complex(s, p)
}
