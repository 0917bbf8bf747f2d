//! Arbitrary-precision complex scalars and truncated Taylor-jet arithmetic:
//! the computational substrate for every other module.

pub mod complex;
pub mod jet;
pub mod real;

pub use complex::{parse_complex, BigComplex, DEFAULT_PRECISION, MIN_PRECISION};
pub use jet::{jet_arith, jet_elementary, Jet, JetArithKind, JetElementaryKind, DEFAULT_JET_ORDER};
