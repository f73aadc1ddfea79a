//! Numerical toolkit for fractional Orlicz-Sobolev spaces.
//!
//! N-function calculus, Luxemburg and Amemiya norms, the fractional
//! modular and Gagliardo seminorm with kernel |x−y|^s M⁻¹(|x−y|^N), the
//! fractional M-Laplacian, a descent solver for the Dirichlet problem and
//! numerical checks of the inequalities relating all of these.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod fracspace;
pub mod nfunction;
pub mod operator;
pub mod orlicz;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use domain::{Domain, Extension, GridFunction, QuadratureRule};
pub use error::{DivergenceReport, Error, Result};
pub use nfunction::{Family, NFunctionSpec};
