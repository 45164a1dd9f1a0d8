//! Sparse multivariate polynomials, graded-lex monomial bases and the
//! square-monomial expansions behind closed-form trace certificates.

mod basis;
mod expand;
mod monomial;
mod polynomial;
pub mod text;

pub use basis::{basis_size, build_basis, MonomialBasis};
pub use expand::{expand_lambda_series, expand_one_plus_weighted_norm_pow, square_coefficients};
pub use monomial::Monomial;
pub use polynomial::Polynomial;
pub use text::parse_polynomial;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("basis size C(n+d, n) with n={n}, d={d} is too large")]
    SizeOverflow { n: usize, d: usize },
    #[error("polynomial syntax: {0}")]
    Parse(String),
}
