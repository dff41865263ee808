//! Exact multivariate polynomials and rational functions over Q, with the
//! univariate tools used by the recursion.

mod expr;
mod gcd;
mod linalg;
mod monomial;
mod poly;
mod ratfunc;
mod registry;
mod univariate;

pub use expr::{parse_poly, parse_ratfunc, Affine};
pub use gcd::gcd as gcd_poly;
pub use linalg::RatMatrix;
pub use monomial::Monomial;
pub use poly::{q, qr, MultiPoly, Q};
pub use ratfunc::RatFunc;
pub use registry::{Registry, VarRegistry};
pub use univariate::{
    content_in, coprime_basis, primitive_in_vars, infinity_order, leading_at, multiplicity, partial_fractions,
    pole_data, poly_divmod, primitive_in, squarefree_factor, FracTerm, PoleData, UniPoly, UniView,
};


/// Normalize `num/den` into canonical form.
pub fn ratfunc_normalize(num: MultiPoly, den: MultiPoly) -> crate::Result<RatFunc> {
    RatFunc::new(num, den)
}

pub fn derivative(f: &RatFunc, var: usize) -> RatFunc {
    f.derivative(var)
}
