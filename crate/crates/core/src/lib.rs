//! Integral solvability and asymptotic point counts for norm equations
//! `N(x + y·ω) = m` over the maximal order of a real quadratic field.
//!
//! The pipeline:
//!
//! * [`quadfield`] computes the fundamental unit and the minimal norm-one unit.
//! * [`classgroup`] builds the narrow class group as proper-equivalence classes
//!   of indefinite binary quadratic forms, with Frobenius classes, the sign
//!   class and the full character group.
//! * [`census`] evaluates the character sum `c_m`, decides solvability and
//!   predicts the slope of `N(X, T)` against `log T`.
//! * [`counting`] provides the ground truth: brute-force and orbit-based exact
//!   counts of integral points.
//! * [`localdata`] handles `p`-adic solvability, congruence densities and the
//!   archimedean volume of the hyperbola.
//! * [`hassewitt`] covers Hasse–Witt invariants of rational quadratic spaces
//!   and the `c_n(a)` constant for symmetric determinant equations.

// NaN-rejecting guards and matrix index loops read better as written.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod arith;
pub mod census;
pub mod classgroup;
pub mod counting;
pub mod cyclotomic;
pub mod error;
pub mod hassewitt;
pub mod localdata;
pub mod quadfield;

pub use census::{CensusVerdict, EquationSpec, PrimeCategory, PrimeClassification};
pub use classgroup::{Character, ClassId, Form, NarrowClassGroup};
pub use counting::{ExactSlope, SolutionOrbits};
pub use cyclotomic::CycloInt;
pub use error::{Error, Result};
pub use hassewitt::{CnaReport, QuadraticSpace};
pub use quadfield::{FieldData, QuadElem};
