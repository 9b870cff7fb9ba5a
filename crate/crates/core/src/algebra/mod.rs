//! Normal-ordered polynomials in one bosonic mode and their adjoint towers.

mod classify;
mod parse;
mod polynomial;

pub use classify::{
    adjoint_power, classify_pair, Classification, NilpotencyReport, DEFAULT_ADJOINT_CAP,
};
pub use parse::parse_operator;
pub use polynomial::{LadderPolynomial, DEFAULT_MAX_DEGREE};

use crate::error::Result;
use crate::scalar::Real;

/// Canonical form of `a·b`.
pub fn normal_order_product<T: Real>(
    a: &LadderPolynomial<T>,
    b: &LadderPolynomial<T>,
) -> Result<LadderPolynomial<T>> {
    a.product(b)
}

/// Canonical form of `a·b − b·a`.
pub fn commutator<T: Real>(
    a: &LadderPolynomial<T>,
    b: &LadderPolynomial<T>,
) -> Result<LadderPolynomial<T>> {
    a.commutator(b)
}

pub fn is_hermitian<T: Real>(a: &LadderPolynomial<T>) -> bool {
    a.is_hermitian()
}
