//! Graded nilpotent quotients of finitely presented multigraded Lie rings.

mod algebra;
pub(crate) mod arith;
mod build;
mod presentation;

pub use algebra::{BasisElement, Definition, GradedLieAlgebra, LieElement};
pub(crate) use build::TailSpace;
pub use build::{build, build_with_progress};
pub use presentation::Presentation;
