//! Exact and numerical computation on graded nilpotent Lie groups.
//!
//! The exact side (rational structure constants, group law, invariant
//! differential operators, coadjoint strata) uses `BigRational` throughout.
//! The numerical side works on uniform grids in exponential coordinates,
//! where Haar measure is Lebesgue measure.

pub mod acceptance;
pub mod coadjoint;
pub mod error;
pub mod group_file;
pub mod group_law;
pub mod groupoid;
pub mod invariant_ops;
pub mod lie;
pub mod linalg;
pub mod numeric;
pub mod poly;

pub use error::{FormatError, LieError, NumericError};
pub use group_law::GroupLaw;
pub use lie::{GradedLieAlgebra, MultiIndex, Violation};
pub use poly::{MultiPoly, PolyVec};

pub type Rational = num_rational::BigRational;
