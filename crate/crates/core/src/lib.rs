//! Exact flag-algebra calculus on small graphs and a verifier for
//! semidefinite commonality certificates.
//!
//! All arithmetic in the verification path is exact: coefficients are
//! arbitrary-precision rationals and positive semidefiniteness is decided
//! by rational symmetric elimination. The main entry points are
//! [`certificate::load_certificate`] and [`certificate::verify`].

pub mod algebra;
pub mod certificate;
pub mod density;
pub mod flag;
pub mod graph;
pub mod matrix;
pub mod rational;

pub use algebra::{AlgebraElement, AlgebraError, QuadraticFormSpec};
pub use certificate::{Certificate, CertificateError, VerificationReport};
pub use flag::{Flag, FlagType, LabelSet};
pub use graph::{CanonicalKey, GraphError, ModelTable, SmallGraph};
pub use matrix::{PsdClass, RationalMatrix};
pub use rational::Rational;
