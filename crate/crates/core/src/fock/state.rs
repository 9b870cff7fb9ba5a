use nalgebra::DVector;
use num_complex::Complex64;

use super::{MatrixOperator, EDGE_LEVELS, LEAKAGE_LIMIT};
use crate::error::{Error, Result};
use crate::generator::ProbeDescriptor;
use crate::scalar::Real;

const NORM_TOL: f64 = 1e-10;

/// Pure state in the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<Complex64>,
}

impl FockVector {
    pub(crate) fn from_amplitudes_unchecked(amps: DVector<Complex64>) -> Self {
        Self { amps }
    }

    /// Normalized amplitudes, checked to 1e-10.
    pub fn from_amplitudes(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    pub fn vacuum(dim: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// `|α⟩ = e^{-|α|²/2} Σ αⁿ/√n! |n⟩`, truncated and leakage-checked.
    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        let mut amps = DVector::zeros(dim);
        let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..dim {
            if n > 0 {
                c = c * alpha / (n as f64).sqrt();
            }
            amps[n] = c;
        }
        Self::truncated(amps)
    }

    /// `S(ζ)|0⟩` with `S(ζ) = exp((ζ* a² − ζ a†²)/2)`, `ζ = r e^{iφ}`.
    pub fn squeezed_vacuum(r: f64, phi: f64, dim: usize) -> Result<Self> {
        let mut amps = DVector::zeros(dim);
        let ratio = -Complex64::from_polar(r.tanh(), phi);
        let mut c = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
        let mut n = 0usize;
        while 2 * n < dim {
            if n > 0 {
                // √((2n)!)/(2ⁿ n!) from the previous term
                let k = n as f64;
                c = c * ratio * ((2.0 * k - 1.0) * 2.0 * k).sqrt() / (2.0 * k);
            }
            amps[2 * n] = c;
            n += 1;
        }
        Self::truncated(amps)
    }

    fn truncated(amps: DVector<Complex64>) -> Result<Self> {
        let state = Self { amps };
        state.check_leakage()?;
        let norm = state.amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Leakage {
                population: 1.0 - norm * norm,
                level: state.dim(),
                limit: LEAKAGE_LIMIT,
            });
        }
        Ok(state)
    }

    pub fn from_probe<T: Real>(probe: &ProbeDescriptor<T>, dim: usize) -> Result<Self> {
        match probe {
            ProbeDescriptor::Vacuum => Ok(Self::vacuum(dim)),
            ProbeDescriptor::Coherent { alpha } => Self::coherent(
                Complex64::new(alpha.re.to_f64_lossy(), alpha.im.to_f64_lossy()),
                dim,
            ),
            ProbeDescriptor::SqueezedVacuum { r, phi } => {
                Self::squeezed_vacuum(r.to_f64_lossy(), phi.to_f64_lossy(), dim)
            }
            ProbeDescriptor::FockBasisVector { amplitudes } => {
                if amplitudes.len() > dim {
                    return Err(Error::Domain(format!(
                        "probe has {} amplitudes, truncation is {dim}",
                        amplitudes.len()
                    )));
                }
                let mut amps = DVector::zeros(dim);
                for (i, a) in amplitudes.iter().enumerate() {
                    amps[i] = Complex64::new(a.re.to_f64_lossy(), a.im.to_f64_lossy());
                }
                Self::from_amplitudes(amps)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Largest population among the top [`EDGE_LEVELS`] retained levels, and its level.
    /// A single top level is blind to parity-preserving evolution, which
    /// leaves every other level empty.
    pub fn edge_population(&self) -> (f64, usize) {
        let d = self.dim();
        (d.saturating_sub(EDGE_LEVELS)..d)
            .map(|i| (self.amps[i].norm_sqr(), i))
            .fold((0.0, d - 1), |best, cur| if cur.0 > best.0 { cur } else { best })
    }

    pub fn leakage(&self) -> f64 {
        self.edge_population().0
    }

    pub fn check_leakage(&self) -> Result<()> {
        let (population, level) = self.edge_population();
        if population > LEAKAGE_LIMIT {
            return Err(Error::Leakage {
                population,
                level,
                limit: LEAKAGE_LIMIT,
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn expectation(&self, op: &MatrixOperator) -> Complex64 {
        self.amps.dotc(&op.apply(&self.amps))
    }

    /// `⟨O²⟩ − ⟨O⟩²` for Hermitian `O`, via `‖Oψ‖²`.
    pub fn variance(&self, op: &MatrixOperator) -> f64 {
        let v = op.apply(&self.amps);
        let mean = self.amps.dotc(&v);
        v.norm_squared() - mean.norm_sqr()
    }
}
