use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{matrix_of, FockVector, MAX_DIM};
use crate::error::{Error, Result};
use crate::generator::EncodingProtocol;

/// Central-difference step in the estimated parameter.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Coarse/fine disagreement that marks an estimate as flagged.
const FLAG_REL: f64 = 5e-3;
/// Coarse/fine disagreement that is reported as an error.
const FAIL_REL: f64 = 5e-2;
/// Relative change under doubling of the truncation that is still trusted.
const TRUNCATION_REL: f64 = 5e-3;

/// Numerical QFI with its finite-difference diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiEstimate {
    /// Richardson-extrapolated value.
    pub value: f64,
    /// Pass at step `δ`.
    pub coarse: f64,
    /// Pass at step `δ/2`.
    pub fine: f64,
    /// Coarse and fine passes disagree by more than 0.5%.
    pub flagged: bool,
    pub dim: usize,
    /// Not flagged and, when checked, stable under doubling of the truncation.
    pub trusted: bool,
}

fn overlap_qfi(psi: &DVector<Complex64>, dpsi: &DVector<Complex64>) -> f64 {
    4.0 * (dpsi.norm_squared() - psi.dotc(dpsi).norm_sqr())
}

/// QFI of a pure-state family `θ ↦ |ψ(θ)⟩` at `at`, from the overlap form
/// `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)` with central differences at `step` and `step/2`.
pub fn pure_state_qfi<F>(family: F, at: f64, step: f64) -> Result<QfiEstimate>
where
    F: Fn(f64) -> Result<DVector<Complex64>>,
{
    if !(step > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be > 0, got {step}")));
    }
    let psi = family(at)?;
    let central = |h: f64| -> Result<DVector<Complex64>> {
        Ok((family(at + h)? - family(at - h)?) / Complex64::new(2.0 * h, 0.0))
    };
    let d_coarse = central(step)?;
    let d_fine = central(step / 2.0)?;
    let d_rich = (&d_fine * Complex64::new(4.0, 0.0) - &d_coarse) / Complex64::new(3.0, 0.0);

    let coarse = overlap_qfi(&psi, &d_coarse);
    let fine = overlap_qfi(&psi, &d_fine);
    let value = overlap_qfi(&psi, &d_rich);
    let relative = (coarse - fine).abs() / fine.abs().max(1e-300);
    if relative > FAIL_REL && (coarse - fine).abs() > 1e-12 {
        return Err(Error::Convergence {
            coarse,
            fine,
            relative,
        });
    }
    let flagged = relative > FLAG_REL && (coarse - fine).abs() > 1e-12;
    Ok(QfiEstimate {
        value,
        coarse,
        fine,
        flagged,
        dim: psi.len(),
        trusted: !flagged,
    })
}

/// QFI of the encoded state `e^{-iNλH_λ} e^{-iNḡH_g}|Ψ⟩` w.r.t. `λ̄`, at one truncation.
pub fn qfi_numeric(p: &EncodingProtocol<f64>, dim: usize, step: f64) -> Result<QfiEstimate> {
    let n = p.n() as f64;
    let probe = FockVector::from_probe(p.probe(), dim)?;
    let g_spec = matrix_of(p.h_g(), dim).spectrum()?;
    let after_g = FockVector::from_amplitudes_unchecked(g_spec.apply(n * p.g_bar(), probe.amplitudes()));
    after_g.check_leakage()?;
    let l_spec = matrix_of(p.h_lambda(), dim).spectrum()?;
    pure_state_qfi(
        |lambda| {
            let out = FockVector::from_amplitudes_unchecked(l_spec.apply(n * lambda, after_g.amplitudes()));
            out.check_leakage()?;
            Ok(out.amplitudes().clone())
        },
        p.lambda_bar(),
        step,
    )
}

/// [`qfi_numeric`] with truncation doubling until two successive truncations
/// agree within 0.5%, up to [`MAX_DIM`]. Leakage at a truncation also triggers
/// doubling. An estimate that never stabilizes comes back with `trusted = false`.
pub fn qfi_numeric_converged(p: &EncodingProtocol<f64>, dim: usize, step: f64) -> Result<QfiEstimate> {
    let mut dim = dim.max(2);
    let mut previous: Option<QfiEstimate> = None;
    let mut leak: Option<Error> = None;
    loop {
        match qfi_numeric(p, dim, step) {
            Ok(est) => {
                if let Some(prev) = previous {
                    let rel = (est.value - prev.value).abs() / est.value.abs().max(1e-300);
                    if rel < TRUNCATION_REL {
                        return Ok(QfiEstimate {
                            trusted: !est.flagged,
                            ..est
                        });
                    }
                }
                previous = Some(est);
            }
            Err(e @ Error::Leakage { .. }) => leak = Some(e),
            Err(e) => return Err(e),
        }
        if dim * 2 > MAX_DIM {
            return match previous {
                Some(est) => Ok(QfiEstimate {
                    trusted: false,
                    ..est
                }),
                None => Err(leak.unwrap_or_else(|| Error::Domain("no truncation up to the oracle limit held the state".into()))),
            };
        }
        dim *= 2;
    }
}
