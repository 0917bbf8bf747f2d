//! High-precision toolkit for the correspondence between rho-equivariant
//! functions and 2-dimensional vector-valued modular forms: Schwarzian
//! calculus, slash operators, Bol's identity, normal-form reduction of
//! second-order ODEs, analytic continuation and monodromy, and the
//! constructive surjectivity round trip, with the hypergeometric/Legendre
//! monodromy example as the flagship end-to-end demonstration.

pub mod equivariant;
pub mod error;
pub mod legendre;
pub mod moebius;
pub mod numerics;
pub mod ode;
pub mod qforms;
pub mod report;
pub mod schwarz;
pub mod suite;
pub mod sampler;

pub use error::{Error, Result};
