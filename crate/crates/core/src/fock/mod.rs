//! Brute-force truncated Fock-space oracle.
//!
//! Everything here runs in `f64` on dense matrices. Operators are the
//! projections of the exact ladder polynomials onto the lowest `dim` number
//! states; evolutions go through [`Spectrum`].

mod dv;
mod qfi;
mod spectral;
mod state;
mod switch;

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::LadderPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use dv::{dv_bound_check, DvBoundReport, DvBoundRow};
pub use qfi::{pure_state_qfi, qfi_numeric, qfi_numeric_converged, QfiEstimate, DEFAULT_STEP};
pub use spectral::Spectrum;
pub use state::FockVector;
pub use switch::{switch_protocol, SwitchEngine, SwitchQfi, SwitchState};

/// Default truncation for desk-scale squeezing workloads.
pub const DEFAULT_DIM: usize = 80;
/// Population allowed in any of the top [`EDGE_LEVELS`] levels of a trusted state.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
/// Levels at the truncation edge watched for leakage.
pub const EDGE_LEVELS: usize = 4;
/// Largest truncation the oracle will build.
pub const MAX_DIM: usize = 1024;

/// Dense complex matrix in the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    m: DMatrix<Complex64>,
}

impl MatrixOperator {
    pub fn new(m: DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator matrix must be square");
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m.adjoint())
    }

    /// `max |M - M†|`
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        Self::new(&self.m * &rhs.m - &rhs.m * &self.m)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(&self.m * c)
    }

    /// Leading `k × k` block.
    pub fn block(&self, k: usize) -> DMatrix<Complex64> {
        let k = k.min(self.dim());
        self.m.view((0, 0), (k, k)).into_owned()
    }

    /// Largest entry-wise deviation on the common leading `k × k` block.
    pub fn block_distance(&self, other: &Self, k: usize) -> f64 {
        let k = k.min(self.dim()).min(other.dim());
        let mut worst = 0.0f64;
        for j in 0..k {
            for i in 0..k {
                worst = worst.max((self.m[(i, j)] - other.m[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.m * v
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(self)
    }
}

impl Mul for &MatrixOperator {
    type Output = MatrixOperator;

    fn mul(self, rhs: Self) -> MatrixOperator {
        MatrixOperator::new(&self.m * &rhs.m)
    }
}

/// `⟨r| (a†)^m a^n |c⟩` on the infinite ladder, for `r = c - n + m`.
fn ladder_element(m: u32, n: u32, c: usize) -> f64 {
    let (m, n) = (m as usize, n as usize);
    let mid = c - n;
    // one square root of the integer product keeps a†a and friends exact
    let down: f64 = ((mid + 1)..=c).map(|k| k as f64).product();
    let up: f64 = ((mid + 1)..=(mid + m)).map(|k| k as f64).product();
    (down * up).sqrt()
}

/// Projects a ladder polynomial onto the lowest `dim` number states.
pub fn matrix_of<T: Real>(poly: &LadderPolynomial<T>, dim: usize) -> MatrixOperator {
    assert!(dim >= 1, "matrix_of needs dim ≥ 1");
    let mut m = DMatrix::zeros(dim, dim);
    for ((cre, ann), c) in poly.terms() {
        let c = Complex64::new(c.re.to_f64_lossy(), c.im.to_f64_lossy());
        for col in (ann as usize)..dim {
            let row = col - ann as usize + cre as usize;
            if row >= dim {
                break;
            }
            m[(row, col)] += c * ladder_element(cre, ann, col);
        }
    }
    MatrixOperator::new(m)
}

/// `exp(-i t H) |ψ⟩` with the leakage check on the top level.
pub fn evolve_unitary(state: &FockVector, ham: &MatrixOperator, t: f64) -> Result<FockVector> {
    if ham.dim() != state.dim() {
        return Err(Error::Domain(format!(
            "operator dim {} vs state dim {}",
            ham.dim(),
            state.dim()
        )));
    }
    let spec = ham.spectrum()?;
    let out = FockVector::from_amplitudes_unchecked(spec.apply(t, state.amplitudes()));
    out.check_leakage()?;
    Ok(out)
}
