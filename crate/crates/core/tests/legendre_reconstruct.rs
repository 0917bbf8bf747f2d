//! End-to-end round trip on the covering-map example: the pulled-back
//! Legendre ratio reconstructs to a weight -1 VMF whose ratio matches h and
//! whose measured representation conjugates onto the deck representation.

use std::sync::Arc;
use std::time::Instant;

use equivmod_core::equivariant::{
    deck_rep, equivariance_residual, probe_points, reconstruct, vmf_residual,
    EquivariantCandidate, GroupElement,
};
use equivmod_core::legendre::{CoveringData, LegendreRatioSampler};
use equivmod_core::numerics::{BigComplex, DEFAULT_PRECISION as P};
use equivmod_core::ode::TransportConfig;

#[test]
fn legendre_ratio_round_trip() {
    let t0 = Instant::now();
    let cfg = TransportConfig::default();
    let cov = Arc::new(CoveringData::establish(P, &cfg).expect("covering"));
    println!("covering established: {:.1}s", t0.elapsed().as_secs_f64());

    let cand = EquivariantCandidate {
        h: Arc::new(LegendreRatioSampler::new(cov.clone())),
        rep: deck_rep(&cov).expect("deck rep"),
        note: None,
    };

    // the candidate is equivariant in the first place
    let t1 = Instant::now();
    let z = BigComplex::from_f64s(0.1, 1.3, P);
    let r = equivariance_residual(&cand, &GroupElement::parse("A").unwrap(), &z).unwrap();
    println!("equivariance A: {r:e} ({:.1}s)", t1.elapsed().as_secs_f64());
    assert!(r < 2f64.powi(-(P as i32) + 60), "h not equivariant: {r:e}");

    let t2 = Instant::now();
    let base = BigComplex::i(P);
    let probes = probe_points(42, 9, P);
    let out = reconstruct(&cand, &base, &probes, &cfg).expect("reconstruct");
    println!(
        "reconstruct: fit {:e}, {:.1}s",
        out.report.fit_residual,
        t2.elapsed().as_secs_f64()
    );
    assert!(out.report.fit_residual < 2f64.powi(-140));
    for c in &out.report.conjugation {
        println!("conjugation {}: {:e} scalar {:?}", c.generator, c.projective_distance, c.scalar);
        assert!(c.projective_distance < 2f64.powi(-140), "{c:?}");
    }

    let t3 = Instant::now();
    let zt = BigComplex::from_f64s(-0.2, 1.1, P);
    let rv = vmf_residual(&out.vmf, &GroupElement::parse("A").unwrap(), &zt).unwrap();
    println!("vmf weight -1 residual A: {rv:e} ({:.1}s)", t3.elapsed().as_secs_f64());
    assert!(rv < 2f64.powi(-140), "vmf residual {rv:e}");

    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
