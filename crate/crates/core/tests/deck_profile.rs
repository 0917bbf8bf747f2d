use equivmod_core::legendre::CoveringData;
use equivmod_core::moebius::GroupWord;
use equivmod_core::numerics::{BigComplex, DEFAULT_PRECISION as P};
use equivmod_core::ode::TransportConfig;
use std::time::Instant;

#[test]
fn profile_deck() {
    let t0 = Instant::now();
    let cov = CoveringData::establish(P, &TransportConfig::default()).unwrap();
    println!("establish: {:.1}s", t0.elapsed().as_secs_f64());
    for (re, im) in [(0.44, 0.72), (-0.44, 1.38), (0.0, 1.0)] {
        let z = BigComplex::from_f64s(re, im, P);
        let t = Instant::now();
        let r = cov.deck_check(&GroupWord::generator("A", 1), &z).unwrap();
        println!("A at ({re},{im}): {:.1}s route {:?} res {:e}", t.elapsed().as_secs_f64(), r.route, r.vector_residual);
        let t = Instant::now();
        let r = cov.deck_check(&GroupWord::generator("B", 1), &z).unwrap();
        println!("B at ({re},{im}): {:.1}s route {:?} res {:e}", t.elapsed().as_secs_f64(), r.route, r.vector_residual);
    }
    let t = Instant::now();
    let w = GroupWord::parse("A B^-1 A B").unwrap();
    let z = BigComplex::from_f64s(0.1, 1.0, P);
    let r = cov.deck_check(&w, &z).unwrap();
    println!("word ABAB^-1-ish: {:.1}s route {:?} res {:e}", t.elapsed().as_secs_f64(), r.route, r.vector_residual);
}
