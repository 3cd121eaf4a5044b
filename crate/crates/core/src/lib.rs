//! Graded nilpotent quotients of multigraded Lie rings with Engel relations.

pub mod engelgen;
pub mod error;
pub mod exactalg;
pub mod freelie;
pub mod nqcore;
pub mod wreath3;

pub use engelgen::{EngelMode, ExperimentCase, RelationMatrix};
pub use error::{Error, Result};
pub use exactalg::{Ring, Scalar, SnfResult, SparseRow};
pub use freelie::{HallWord, MultiDegree, TruncationSpec};
pub use nqcore::{build, BasisElement, Definition, GradedLieAlgebra, LieElement, Presentation};
pub use wreath3::{AGen, WreathElement, WreathMonomial};
