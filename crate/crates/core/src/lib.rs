//! Intersection numbers of twisted cocycles computed exactly in the ground
//! field, without algebraic extensions.
//!
//! The pipeline fibres the integration variables one at a time. At each
//! level the coefficients of a form in the current basis are reduced to
//! simple poles and paired through a univariate global residue on the
//! numerator of the determinant of the connection matrix.

pub mod algebra;
pub mod cohomology;
pub mod error;
pub mod feynman;
pub mod intersect;
pub mod oracle;
pub mod par;
pub mod residue;

pub use error::{Error, Result};
