//! Analytic continuation of second-order linear ODEs by repeated local
//! Taylor solution, fundamental systems, Wronskians, normal-form reduction
//! and monodromy matrices.
//!
//! The engine integrates y'' + P y' + Q y = 0 along polyline paths. The
//! public `transport`/`monodromy` operations take equations already in
//! normal form (P = 0, coefficient g), for which the Wronskian is conserved
//! exactly; the general-P entry points serve the covering-map example, where
//! an Abel weight A with W * A = const supplies the same drift diagnostic.
//!
//! Steps are bounded by `safety_factor` times the distance to the nearest
//! declared singularity and shrunk further by a coefficient-ratio truncation
//! test with a 2x margin, so the local truncation error stays below the
//! rounding floor of the working precision. The local order adapts to the
//! precision unless pinned in the configuration.

mod path;

pub use path::{path_from_f64s, PathPolyline};

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::Mat2;
use crate::numerics::real::to_f64;
use crate::numerics::{BigComplex, Jet};
use crate::sampler::FunctionSampler;

/// Coefficients of y'' + P y' + Q y = 0 with the declared singular set.
/// For the normal form y'' + g y = 0, `p` is None and `q` samples g.
#[derive(Clone)]
pub struct OdeCoefficients {
    pub p: Option<Arc<dyn FunctionSampler>>,
    pub q: Arc<dyn FunctionSampler>,
    pub singular_points: Vec<BigComplex>,
    /// Abel weight A(z) with W(z) A(z) constant along solutions; None means
    /// A = 1 (true for the normal form).
    pub abel_weight: Option<Arc<dyn FunctionSampler>>,
}

impl OdeCoefficients {
    pub fn normal_form(g: Arc<dyn FunctionSampler>, singular_points: Vec<BigComplex>) -> Self {
        OdeCoefficients { p: None, q: g, singular_points, abel_weight: None }
    }

    /// Distance from z to the nearest declared singularity (f64 scale),
    /// intersected with the coefficient samplers' own domain hints.
    pub fn clearance(&self, z: &BigComplex) -> Option<f64> {
        let mut r: Option<f64> = None;
        let mut fold = |d: Option<f64>| {
            if let Some(d) = d {
                r = Some(r.map_or(d, |v: f64| v.min(d)));
            }
        };
        for s in &self.singular_points {
            fold(Some(z.sub(s).abs_f64()));
        }
        fold(self.q.domain_hint().radius_at(z));
        if let Some(p) = &self.p {
            fold(p.domain_hint().radius_at(z));
        }
        r
    }
}

/// Values and first derivatives of two solutions at a point; columns are
/// solutions: [[f1, f2], [f1', f2']].
#[derive(Clone, Debug)]
pub struct FundamentalSystem {
    pub at: BigComplex,
    pub values: [[BigComplex; 2]; 2],
}

impl FundamentalSystem {
    pub fn new(at: BigComplex, values: [[BigComplex; 2]; 2]) -> Self {
        FundamentalSystem { at, values }
    }

    /// The canonical initial system: value matrix = identity.
    pub fn identity(at: BigComplex) -> Self {
        let p = at.precision();
        FundamentalSystem {
            at,
            values: [
                [BigComplex::one(p), BigComplex::zero(p)],
                [BigComplex::zero(p), BigComplex::one(p)],
            ],
        }
    }

    pub fn value_matrix(&self) -> Mat2 {
        Mat2::new(
            self.values[0][0].clone(),
            self.values[0][1].clone(),
            self.values[1][0].clone(),
            self.values[1][1].clone(),
        )
    }

    pub fn from_matrix(at: BigComplex, m: &Mat2) -> Self {
        FundamentalSystem {
            at,
            values: [[m.a.clone(), m.b.clone()], [m.c.clone(), m.d.clone()]],
        }
    }

    pub fn column(&self, i: usize) -> (BigComplex, BigComplex) {
        (self.values[0][i].clone(), self.values[1][i].clone())
    }

    pub fn with_precision(&self, p: usize) -> Self {
        FundamentalSystem {
            at: self.at.with_precision(p),
            values: [
                [self.values[0][0].with_precision(p), self.values[0][1].with_precision(p)],
                [self.values[1][0].with_precision(p), self.values[1][1].with_precision(p)],
            ],
        }
    }

    pub fn precision(&self) -> usize {
        self.at.precision()
    }
}

/// W = f1 f2' - f2 f1'.
pub fn wronskian(sys: &FundamentalSystem) -> BigComplex {
    sys.values[0][0]
        .mul(&sys.values[1][1])
        .sub(&sys.values[0][1].mul(&sys.values[1][0]))
}

#[derive(Clone, Debug)]
pub struct TransportConfig {
    /// Cap on step length relative to the clearance radius.
    pub safety_factor: f64,
    /// Local Taylor order; 0 selects the precision-adapted order.
    pub local_order: usize,
    /// Guard bits added to the working precision during continuation.
    pub guard_bits: usize,
    /// Minimum tolerated clearance to a singular point.
    pub margin_threshold: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            safety_factor: 0.25,
            local_order: 0,
            guard_bits: 64,
            margin_threshold: 0.01,
        }
    }
}

impl TransportConfig {
    fn order_for(&self, wp: usize) -> usize {
        if self.local_order > 0 {
            return self.local_order.max(4);
        }
        // balance steps ~ eps^{-1/(M+1)} against per-step work ~ M^2:
        // the optimum solves (M+1)^2 / M = ln(1/eps) / 2
        let l = (wp as f64 + 8.0) * std::f64::consts::LN_2 / 2.0;
        let m = 0.5 * ((l - 2.0) + ((l - 2.0) * (l - 2.0) - 4.0).max(0.0).sqrt());
        (m as usize).clamp(16, 128)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TransportStats {
    pub steps: usize,
    /// Smallest clearance to the singular set seen along the way.
    pub min_clearance: f64,
    /// |W A (end) - W A (start)| / |W A (start)|.
    pub wronskian_drift: f64,
    pub wall_ms: f64,
}

pub struct TransportOutcome {
    pub system: FundamentalSystem,
    pub stats: TransportStats,
}

fn segment_distance_f64(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    let dx = bx - ax;
    let dy = by - ay;
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    ((px - (ax + t * dx)).powi(2) + (py - (ay + t * dy)).powi(2)).sqrt()
}

fn approx_abs(z: &BigComplex) -> f64 {
    let (re, im) = z.to_f64s();
    re.hypot(im)
}

/// Taylor coefficients of the two solution columns at the expansion point,
/// from jets of the equation coefficients there.
fn local_columns(
    g_jet: &Jet,
    p_jet: Option<&Jet>,
    init: &[[BigComplex; 2]; 2],
    order: usize,
) -> [Vec<BigComplex>; 2] {
    let wp = g_jet.precision();
    let mut cols: [Vec<BigComplex>; 2] = [Vec::with_capacity(order + 1), Vec::with_capacity(order + 1)];
    for (col, out) in cols.iter_mut().enumerate() {
        out.push(init[0][col].clone());
        out.push(init[1][col].clone());
        for n in 0..=order.saturating_sub(2) {
            // (n+1)(n+2) c_{n+2} = -( sum_k g_k c_{n-k} + sum_k p_k (n+1-k) c_{n+1-k} )
            let mut acc = BigComplex::zero(wp);
            for k in 0..=n {
                acc = acc.add(&g_jet.coeff(k).mul(&out[n - k]));
            }
            if let Some(pj) = p_jet {
                for k in 0..=n {
                    acc = acc.add(&pj.coeff(k).mul(&out[n + 1 - k]).mul_i64((n + 1 - k) as i64));
                }
            }
            let den = ((n + 1) * (n + 2)) as i64;
            out.push(acc.neg().mul(&BigComplex::from_ratio(1, den, wp)));
        }
    }
    cols
}

/// Truncation estimate at step h: the last two retained terms with a 2x
/// margin, relative to the local solution scale.
fn step_error_ok(cols: &[Vec<f64>; 2], h: f64, eps: f64) -> bool {
    for c in cols {
        let m = c.len() - 1;
        let tail = 2.0 * (c[m] * h.powi(m as i32) + c[m - 1] * h.powi(m as i32 - 1));
        let scale = (c[0] + c[1] * h).max(1e-300);
        if tail > eps * scale {
            return false;
        }
    }
    true
}

/// Continues a fundamental system along a polyline. Handles general P; the
/// public `transport` wrapper enforces the normal form.
pub fn continue_system(
    coeffs: &OdeCoefficients,
    path: &PathPolyline,
    init: &FundamentalSystem,
    cfg: &TransportConfig,
) -> Result<TransportOutcome> {
    let t0 = std::time::Instant::now();
    if !init.at.equals(path.vertices().first().expect("nonempty path")) {
        return Err(Error::InvalidInput(
            "initial system must sit at the first path vertex".into(),
        ));
    }
    path.check_clearance(&coeffs.singular_points, cfg.margin_threshold)?;

    let p_out = init.precision();
    let wp = p_out + cfg.guard_bits;
    let order = cfg.order_for(wp);
    let eps_step = 2f64.powi(-((wp + 8) as i32));
    let h_min = 2f64.powi(-((wp / 2) as i32));

    let abel_at = |sys: &FundamentalSystem| -> Result<BigComplex> {
        match &coeffs.abel_weight {
            None => Ok(BigComplex::one(wp)),
            Some(a) => a.value(&sys.at),
        }
    };

    let mut sys = init.with_precision(wp);
    let w_start = wronskian(&sys).mul(&abel_at(&sys)?);
    let mut stats = TransportStats { min_clearance: f64::INFINITY, ..Default::default() };

    // next polyline vertex still ahead of the current expansion point
    let verts = path.vertices();
    let mut next_vertex = 1usize;
    while next_vertex < verts.len() {
        let clearance = coeffs.clearance(&sys.at);
        if let Some(c) = clearance {
            if c < cfg.margin_threshold {
                return Err(Error::PathTooCloseToSingularity {
                    margin: c,
                    threshold: cfg.margin_threshold,
                });
            }
            stats.min_clearance = stats.min_clearance.min(c);
        }

        let g_jet = coeffs.q.jet(&sys.at, order.saturating_sub(2))?;
        let p_jet = match &coeffs.p {
            None => None,
            Some(p) => Some(p.jet(&sys.at, order.saturating_sub(2))?),
        };
        let cols = local_columns(&g_jet, p_jet.as_ref(), &sys.values, order);
        let mags: [Vec<f64>; 2] = [
            cols[0].iter().map(approx_abs).collect(),
            cols[1].iter().map(approx_abs).collect(),
        ];

        let h_cap = match clearance {
            Some(c) => cfg.safety_factor * c,
            None => 1.0,
        };

        // consolidate vertices: jump toward the farthest vertex reachable
        // within the step budget whose chord provably bypasses no
        // singularity (sagitta of the skipped vertices stays well inside
        // the chord's clearance, so the cut corner contains no puncture)
        let (cx, cy) = sys.at.to_f64s();
        let mut target_idx = next_vertex;
        'extend: while target_idx + 1 < verts.len() {
            let cand = target_idx + 1;
            let (tx, ty) = verts[cand].to_f64s();
            if ((tx - cx).powi(2) + (ty - cy).powi(2)).sqrt() > h_cap {
                break;
            }
            let mut sagitta = 0.0f64;
            for v in verts.iter().take(cand).skip(next_vertex) {
                let (vx, vy) = v.to_f64s();
                sagitta = sagitta.max(segment_distance_f64(cx, cy, tx, ty, vx, vy));
            }
            for s in &coeffs.singular_points {
                let (sx, sy) = s.to_f64s();
                if segment_distance_f64(cx, cy, tx, ty, sx, sy) <= 2.0 * sagitta {
                    break 'extend;
                }
            }
            target_idx = cand;
        }
        let target = verts[target_idx].with_precision(wp);
        let delta = target.sub(&sys.at);
        let remaining = approx_abs(&delta);
        if remaining == 0.0 {
            next_vertex = target_idx + 1;
            continue;
        }

        let mut h = remaining.min(h_cap);
        while !step_error_ok(&mags, h, eps_step) {
            h *= 0.7;
            if h < h_min {
                return Err(Error::StepUnderflow);
            }
        }

        let step = if h >= remaining {
            next_vertex = target_idx + 1;
            delta
        } else {
            // commit to the consolidated target: en-route positions stay on
            // the validated chord, and the planner never looks backward
            next_vertex = target_idx;
            delta.mul_real(&astro_float::BigFloat::from_f64(h / remaining, wp))
        };
        let next = sys.at.add(&step);

        let mut values = [
            [BigComplex::zero(wp), BigComplex::zero(wp)],
            [BigComplex::zero(wp), BigComplex::zero(wp)],
        ];
        for col in 0..2 {
            let jet = Jet::new(sys.at.clone(), cols[col].clone());
            let (v, d) = jet.horner(&step);
            values[0][col] = v;
            values[1][col] = d;
        }
        sys = FundamentalSystem::new(next, values);
        stats.steps += 1;
        if stats.steps > 200_000 {
            return Err(Error::StepUnderflow);
        }
    }

    let w_end = wronskian(&sys).mul(&abel_at(&sys)?);
    let denom = w_start.abs_f64().max(1e-300);
    stats.wronskian_drift = to_f64(&w_end.sub(&w_start).abs()) / denom;
    stats.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(TransportOutcome {
        system: sys.with_precision(p_out),
        stats,
    })
}

/// Normal-form transport: continues both solution columns of y'' + g y = 0
/// along the path. P must be absent.
pub fn transport(
    coeffs: &OdeCoefficients,
    path: &PathPolyline,
    init: &FundamentalSystem,
    cfg: &TransportConfig,
) -> Result<TransportOutcome> {
    if coeffs.p.is_some() {
        return Err(Error::InvalidInput(
            "transport requires the normal form (P = 0); use continue_system".into(),
        ));
    }
    continue_system(coeffs, path, init, cfg)
}

pub struct MonodromyOutcome {
    /// Matrix M with (continued f_i) = sum_j M_ij f_j in the reference basis,
    /// so concatenating loops ell_1 then ell_2 gives M(ell_1) M(ell_2).
    pub matrix: Mat2,
    pub stats: TransportStats,
}

/// Monodromy of a closed loop in the basis of the caller's reference system.
pub fn monodromy_general(
    coeffs: &OdeCoefficients,
    loop_path: &PathPolyline,
    reference: &FundamentalSystem,
    cfg: &TransportConfig,
) -> Result<MonodromyOutcome> {
    if !loop_path.is_closed() {
        return Err(Error::NotClosed);
    }
    let out = continue_system(coeffs, loop_path, reference, cfg)?;
    let v_ref = reference.value_matrix();
    let v_end = out.system.value_matrix();
    let m = v_ref.inverse()?.mul(&v_end).transpose();
    Ok(MonodromyOutcome { matrix: m, stats: out.stats })
}

/// Normal-form monodromy (P = 0).
pub fn monodromy(
    coeffs: &OdeCoefficients,
    loop_path: &PathPolyline,
    reference: &FundamentalSystem,
    cfg: &TransportConfig,
) -> Result<MonodromyOutcome> {
    if coeffs.p.is_some() {
        return Err(Error::InvalidInput(
            "monodromy requires the normal form (P = 0); use monodromy_general".into(),
        ));
    }
    monodromy_general(coeffs, loop_path, reference, cfg)
}

/// Normal-form reduction g = Q - P'/2 - P^2/4 as a jet at z.
pub fn normalize(
    p: Option<&dyn FunctionSampler>,
    q: &dyn FunctionSampler,
    z: &BigComplex,
    order: usize,
) -> Result<Jet> {
    let mut declared = q.domain_hint().singular_points;
    if let Some(p) = p {
        declared.extend(p.domain_hint().singular_points);
    }
    if declared.iter().any(|s| s.equals(z)) {
        return Err(Error::SingularPoint);
    }
    let q_jet = q.jet(z, order)?;
    match p {
        None => Ok(q_jet),
        Some(p) => {
            let wp = z.precision();
            let p_jet = p.jet(z, order + 1)?;
            let p_prime = p_jet.differentiate()?; // order
            let p_sq = p_jet.truncate(order).mul(&p_jet.truncate(order))?;
            let m_half = BigComplex::from_ratio(-1, 2, wp);
            let m_quarter = BigComplex::from_ratio(-1, 4, wp);
            q_jet
                .add(&p_prime.scale(&m_half))?
                .add(&p_sq.scale(&m_quarter))
        }
    }
}

/// Jets (order given) of the two solution columns of the local system at
/// `sys.at`, from the equation's coefficient jets there. This is how ratio
/// samplers and residual checks obtain higher derivatives of solutions.
pub fn solution_jets(
    coeffs: &OdeCoefficients,
    sys: &FundamentalSystem,
    order: usize,
) -> Result<[Jet; 2]> {
    let g_jet = coeffs.q.jet(&sys.at, order.saturating_sub(2))?;
    let p_jet = match &coeffs.p {
        None => None,
        Some(p) => Some(p.jet(&sys.at, order.saturating_sub(2))?),
    };
    let cols = local_columns(&g_jet, p_jet.as_ref(), &sys.values, order);
    let [c0, c1] = cols;
    Ok([
        Jet::new(sys.at.clone(), c0),
        Jet::new(sys.at.clone(), c1),
    ])
}

/// Named loops with their monodromy matrices over a common basepoint.
#[derive(Clone)]
pub struct MonodromyData {
    pub base: BigComplex,
    pub loops: Vec<(String, PathPolyline)>,
    pub matrices: Vec<(String, Mat2)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PRECISION as P;
    use crate::sampler::{ConstSampler, PolySampler, RationalSampler};

    fn zero_g() -> OdeCoefficients {
        OdeCoefficients::normal_form(Arc::new(ConstSampler(BigComplex::zero(P))), vec![])
    }

    #[test]
    fn g_zero_exact_solutions() {
        // solutions 1 and z: transport identity from 0 to 1+i
        let coeffs = zero_g();
        let end = BigComplex::from_i64s(1, 1, P);
        let path = PathPolyline::open(vec![BigComplex::zero(P), end.clone()]).unwrap();
        let init = FundamentalSystem::identity(BigComplex::zero(P));
        let out = transport(&coeffs, &path, &init, &TransportConfig::default()).unwrap();
        assert!(out.system.values[0][0].dist_f64(&BigComplex::one(P)) < 1e-70);
        assert!(out.system.values[0][1].dist_f64(&end) < 1e-70);
        assert!(out.system.values[1][0].abs_f64() < 1e-70);
        assert!(out.system.values[1][1].dist_f64(&BigComplex::one(P)) < 1e-70);
        assert!(wronskian(&out.system).dist_f64(&BigComplex::one(P)) < 1e-70);
    }

    #[test]
    fn g_one_cos_sin() {
        // y'' + y = 0 from 0 to pi: value matrix [[-1, 0], [0, -1]]
        let coeffs = OdeCoefficients::normal_form(
            Arc::new(ConstSampler(BigComplex::one(P))),
            vec![],
        );
        let pi = crate::numerics::real::pi(P);
        let end = BigComplex::new(pi, astro_float::BigFloat::from_i64(0, P), P);
        let path = PathPolyline::open(vec![BigComplex::zero(P), end]).unwrap();
        let init = FundamentalSystem::identity(BigComplex::zero(P));
        let out = transport(&coeffs, &path, &init, &TransportConfig::default()).unwrap();
        let tol = 2f64.powi(-200);
        assert!(out.system.values[0][0].dist_f64(&BigComplex::from_i64s(-1, 0, P)) < tol);
        assert!(out.system.values[0][1].abs_f64() < tol);
        assert!(out.system.values[1][0].abs_f64() < tol);
        assert!(out.system.values[1][1].dist_f64(&BigComplex::from_i64s(-1, 0, P)) < tol);
        assert!(out.stats.wronskian_drift < 2f64.powi(-216));
    }

    #[test]
    fn monodromy_trivial_for_entire_g() {
        let coeffs = OdeCoefficients::normal_form(
            Arc::new(PolySampler::from_i64s(&[0, 1], P)),
            vec![],
        );
        let base = BigComplex::zero(P);
        let lp =
            PathPolyline::circle_through_radius(&base, &BigComplex::from_f64s(0.3, 0.2, P), 0.9, 16)
                .unwrap();
        let init = FundamentalSystem::identity(base);
        let out = monodromy(&coeffs, &lp, &init, &TransportConfig::default()).unwrap();
        assert!(out.matrix.distance(&Mat2::identity(P)) < 2f64.powi(-200));
    }

    #[test]
    fn sqrt_log_monodromy() {
        // g = 1/(4 z^2): solutions sqrt(z), sqrt(z) log z; a positive loop
        // around 0 gives trace -2, det 1, and (M + I)^2 = 0
        let g = RationalSampler::from_i64s(&[1], &[0, 0, 4], vec![BigComplex::zero(P)], P);
        let coeffs = OdeCoefficients::normal_form(Arc::new(g), vec![BigComplex::zero(P)]);
        let base = BigComplex::one(P);
        let lp = PathPolyline::circle_through(&base, &BigComplex::zero(P), 16).unwrap();
        let init = FundamentalSystem::identity(base);
        let out = monodromy(&coeffs, &lp, &init, &TransportConfig::default()).unwrap();
        let m = &out.matrix;
        let tol = 2f64.powi(-180);
        assert!(m.trace().dist_f64(&BigComplex::from_i64s(-2, 0, P)) < tol, "trace");
        assert!(m.det().dist_f64(&BigComplex::one(P)) < tol, "det");
        let mi = Mat2::new(
            m.a.add(&BigComplex::one(P)),
            m.b.clone(),
            m.c.clone(),
            m.d.add(&BigComplex::one(P)),
        );
        let sq = mi.mul(&mi);
        assert!(sq.max_abs() < tol, "unipotent up to sign");
        assert!(out.stats.wronskian_drift < 2f64.powi(-216));
    }

    #[test]
    fn composition_convention_covariant() {
        // two singular points so the generators do not commute
        let g = RationalSampler::from_i64s(
            &[1, -2, 2],
            &[0, 0, 4, -8, 4],
            vec![BigComplex::zero(P), BigComplex::one(P)],
            P,
        );
        let sing = vec![BigComplex::zero(P), BigComplex::one(P)];
        let coeffs = OdeCoefficients::normal_form(Arc::new(g), sing);
        let base = BigComplex::from_ratio(1, 2, P);
        let l0 = PathPolyline::circle_through(&base, &BigComplex::zero(P), 16).unwrap();
        let l1 = PathPolyline::circle_through(&base, &BigComplex::one(P), 16).unwrap();
        let init = FundamentalSystem::identity(base);
        let cfg = TransportConfig::default();
        let m0 = monodromy(&coeffs, &l0, &init, &cfg).unwrap().matrix;
        let m1 = monodromy(&coeffs, &l1, &init, &cfg).unwrap().matrix;
        let cat = l0.concat(&l1).unwrap();
        let mc = monodromy(&coeffs, &cat, &init, &cfg).unwrap().matrix;
        assert!(mc.distance(&m0.mul(&m1)) < 2f64.powi(-170), "covariant composition");
        // sanity: they genuinely do not commute
        assert!(m0.mul(&m1).distance(&m1.mul(&m0)) > 1e-3);
    }

    #[test]
    fn homotopic_loops_agree() {
        let g = RationalSampler::from_i64s(&[-1], &[0, 0, 4], vec![BigComplex::zero(P)], P);
        let coeffs = OdeCoefficients::normal_form(Arc::new(g), vec![BigComplex::zero(P)]);
        let base = BigComplex::one(P);
        let small = PathPolyline::circle_through_radius(&base, &BigComplex::zero(P), 0.3, 16).unwrap();
        let big = PathPolyline::circle_through_radius(&base, &BigComplex::zero(P), 0.7, 16).unwrap();
        let init = FundamentalSystem::identity(base);
        let cfg = TransportConfig::default();
        let ms = monodromy(&coeffs, &small, &init, &cfg).unwrap().matrix;
        let mb = monodromy(&coeffs, &big, &init, &cfg).unwrap().matrix;
        assert!(ms.distance(&mb) < 2f64.powi(-150));
    }

    #[test]
    fn step_halving_consistency() {
        let g = RationalSampler::from_i64s(&[-1], &[0, 0, 4], vec![BigComplex::zero(P)], P);
        let coeffs = OdeCoefficients::normal_form(Arc::new(g), vec![BigComplex::zero(P)]);
        let path = PathPolyline::open(vec![
            BigComplex::one(P),
            BigComplex::from_f64s(0.5, 0.8, P),
            BigComplex::from_f64s(-0.9, 0.4, P),
        ])
        .unwrap();
        let init = FundamentalSystem::identity(BigComplex::one(P));
        let a = transport(&coeffs, &path, &init, &TransportConfig::default()).unwrap();
        let halved = TransportConfig { safety_factor: 0.125, ..Default::default() };
        let b = transport(&coeffs, &path, &init, &halved).unwrap();
        let shift = a.system.value_matrix().distance(&b.system.value_matrix());
        assert!(shift < 2f64.powi(-200), "step-halving shift {shift:e}");
    }

    #[test]
    fn too_close_path_rejected() {
        let g = RationalSampler::from_i64s(&[-1], &[0, 0, 4], vec![BigComplex::zero(P)], P);
        let coeffs = OdeCoefficients::normal_form(Arc::new(g), vec![BigComplex::zero(P)]);
        let path = PathPolyline::open(vec![
            BigComplex::one(P),
            BigComplex::from_f64s(0.001, 0.0, P),
        ])
        .unwrap();
        let init = FundamentalSystem::identity(BigComplex::one(P));
        assert!(matches!(
            transport(&coeffs, &path, &init, &TransportConfig::default()),
            Err(Error::PathTooCloseToSingularity { .. })
        ));
    }

    #[test]
    fn normalize_degenerate_cases() {
        // P = 0 -> g = Q
        let q: Arc<dyn FunctionSampler> = Arc::new(PolySampler::from_i64s(&[3, 1], P));
        let z = BigComplex::from_f64s(0.3, 0.4, P);
        let g = normalize(None, q.as_ref(), &z, 4).unwrap();
        let direct = q.jet(&z, 4).unwrap();
        assert!(g.value().dist_f64(direct.value()) < 1e-70);
        // P = 2, Q = 0 -> g = -1
        let p2 = ConstSampler(BigComplex::from_i64s(2, 0, P));
        let q0 = ConstSampler(BigComplex::zero(P));
        let g = normalize(Some(&p2), &q0, &z, 4).unwrap();
        assert!(g.value().dist_f64(&BigComplex::from_i64s(-1, 0, P)) < 1e-70);
        for k in 1..=4 {
            assert!(g.coeff(k).abs_f64() < 1e-70);
        }
    }

    #[test]
    fn solution_jets_satisfy_equation() {
        // for g = z the jets must satisfy c_{n+2} relation, i.e. y'' = -g y
        let coeffs = OdeCoefficients::normal_form(
            Arc::new(PolySampler::from_i64s(&[0, 1], P)),
            vec![],
        );
        let at = BigComplex::from_f64s(0.3, 0.1, P);
        let sys = FundamentalSystem::identity(at.clone());
        let [j1, _] = solution_jets(&coeffs, &sys, 6).unwrap();
        let ypp = j1.differentiate().unwrap().differentiate().unwrap();
        let g = PolySampler::from_i64s(&[0, 1], P).jet(&at, 4).unwrap();
        let resid = ypp.add(&g.mul(&j1.truncate(4)).unwrap()).unwrap();
        for k in 0..=4 {
            assert!(resid.coeff(k).abs_f64() < 1e-70);
        }
    }
}
