//! 2x2 complex matrices, the Moebius action on the Riemann sphere, the
//! weight-k slash operator, cross-ratio fitting, and representations of
//! free groups with word extension.

pub mod mat;
pub mod rep;
pub mod word;

pub use mat::{mobius_fit, mobius_jet, slash_scalar, slash_vector, ExtPoint, IMat2, Mat2};
pub use rep::{GroupKind, Rep};
pub use word::GroupWord;
