//! Nested-commutator structure of bosonic encoding protocols and the
//! Fisher-information scaling it produces.
//!
//! The algebra, generator and Gaussian layers are generic over [`Real`]
//! (`f32` or `f64`); the truncated Fock-space oracle runs in `f64`.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli_io;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod generator;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Poly = algebra::LadderPolynomial<f64>;
pub type Poly32 = algebra::LadderPolynomial<f32>;
pub type Protocol = generator::EncodingProtocol<f64>;
pub type Protocol32 = generator::EncodingProtocol<f32>;
pub type Probe = generator::ProbeDescriptor<f64>;
pub type Gaussian = gaussian::GaussianState<f64>;
pub type Gaussian32 = gaussian::GaussianState<f32>;
